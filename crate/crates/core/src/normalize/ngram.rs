use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::filefmt::{verify_checksum, with_checksum, write_atomic};
use crate::textcore::{canonicalize, tokenize, EncoderConfig};

use super::CoherencyScorer;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

const MAGIC: &str = "CRYPTEXT-LM";

/// Additively smoothed n-gram model.
///
/// `P(w | h) = (c(h, w) + α) / (c(h) + α·V)` where `V` counts the
/// vocabulary (including the end-of-text symbol) plus `<unk>`. A history
/// never seen in training is shortened from the left until one is found,
/// so every conditional distribution still sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    alpha: f64,
    // counts[m - 1]: history of m - 1 symbols (space joined) -> next symbol -> count
    counts: Vec<HashMap<String, HashMap<String, u64>>>,
    totals: Vec<HashMap<String, u64>>,
    vocab: BTreeSet<String>,
}

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Canonical lowercase word tokens of a text: the model's token stream.
pub fn model_tokens(text: &str, encoder: &EncoderConfig) -> Vec<String> {
    tokenize(text, encoder)
        .into_iter()
        .filter(|s| s.is_word)
        .map(|s| canonicalize(&s.raw, encoder))
        .collect()
}

impl NGramModel {
    fn empty(order: usize, alpha: f64) -> Self {
        NGramModel {
            order,
            alpha,
            counts: vec![HashMap::new(); order],
            totals: vec![HashMap::new(); order],
            vocab: BTreeSet::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    /// `V`: vocabulary size plus one for `<unk>`.
    pub fn smoothing_size(&self) -> usize {
        self.vocab.len() + 1
    }

    fn add(&mut self, m: usize, history: String, word: String, n: u64) {
        *self.counts[m - 1]
            .entry(history.clone())
            .or_default()
            .entry(word)
            .or_default() += n;
        *self.totals[m - 1].entry(history).or_default() += n;
    }

    fn add_sentence(&mut self, tokens: &[String]) {
        let pad = self.order - 1;
        let mut seq: Vec<&str> = vec![BOS; pad];
        seq.extend(tokens.iter().map(String::as_str));
        seq.push(EOS);
        for i in pad..seq.len() {
            self.vocab.insert(seq[i].to_string());
            for m in 1..=self.order {
                let history = seq[i + 1 - m..i].join(" ");
                self.add(m, history, seq[i].to_string(), 1);
            }
        }
    }

    /// Trains on the canonical word tokens of each document; each document
    /// is one sentence bounded by `<s>` / `</s>`.
    pub fn train<I>(docs: I, order: usize, alpha: f64, encoder: &EncoderConfig) -> Result<Self>
    where
        I: IntoIterator<Item = Document>,
    {
        if order == 0 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let mut model = NGramModel::empty(order, alpha);
        let mut tokens_seen = 0usize;
        for doc in docs {
            let tokens = model_tokens(&doc.text, encoder);
            if tokens.is_empty() {
                continue;
            }
            tokens_seen += tokens.len();
            model.add_sentence(&tokens);
        }
        if tokens_seen == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(model)
    }

    fn symbol<'a>(&self, w: &'a str) -> &'a str {
        if self.vocab.contains(w) || w == BOS {
            w
        } else {
            UNK
        }
    }

    /// Conditional probability of `word` after `history` (oldest first).
    /// Histories longer than `order - 1` are cut to their last symbols.
    pub fn prob(&self, history: &[&str], word: &str) -> f64 {
        let word = self.symbol(word);
        let keep = history.len().min(self.order - 1);
        let hist: Vec<&str> = history[history.len() - keep..].iter().map(|w| self.symbol(w)).collect();
        let v = self.smoothing_size() as f64;
        for start in 0..=hist.len() {
            let h = hist[start..].join(" ");
            let m = hist.len() - start + 1;
            let Some(&total) = self.totals[m - 1].get(&h) else {
                continue;
            };
            let c = self.counts[m - 1]
                .get(&h)
                .and_then(|row| row.get(word))
                .copied()
                .unwrap_or(0);
            return (c as f64 + self.alpha) / (total as f64 + self.alpha * v);
        }
        // unreachable for a trained model: the empty history always exists
        1.0 / v
    }

    pub fn log_prob(&self, history: &[&str], word: &str) -> f64 {
        self.prob(history, word).ln()
    }

    /// Sum of log-probabilities of every n-gram that covers the slot when
    /// `word` fills it, with `<s>` / `</s>` standing in at text edges.
    pub fn slot_score(&self, word: &str, left: &[String], right: &[String]) -> f64 {
        let width = self.order - 1;
        let mut seq: Vec<&str> = Vec::with_capacity(2 * width + 1);
        let l = left.len().min(width);
        seq.extend(std::iter::repeat_n(BOS, width - l));
        seq.extend(left[left.len() - l..].iter().map(String::as_str));
        let slot = seq.len();
        seq.push(word);
        let r = right.len().min(width);
        seq.extend(right[..r].iter().map(String::as_str));
        if r < width {
            seq.push(EOS);
        }
        (slot..seq.len())
            .map(|p| self.log_prob(&seq[p - width..p], seq[p]))
            .sum()
    }

    pub fn unigram_count(&self, word: &str) -> u64 {
        self.counts[0]
            .get("")
            .and_then(|row| row.get(word))
            .copied()
            .unwrap_or(0)
    }

    pub fn to_model_string(&self) -> String {
        let mut out = format!("{MAGIC} v1 order={} alpha={}\n", self.order, self.alpha);
        for (i, table) in self.counts.iter().enumerate() {
            let sorted: BTreeMap<&String, BTreeMap<&String, &u64>> =
                table.iter().map(|(h, row)| (h, row.iter().collect())).collect();
            for (h, row) in sorted {
                for (w, c) in row {
                    let _ = writeln!(out, "{}\t{h}\t{w}\t{c}", i + 1);
                }
            }
        }
        with_checksum(out)
    }

    pub fn from_model_string(text: &str) -> Result<Self> {
        let header = text.lines().next().unwrap_or("");
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.first() != Some(&MAGIC) {
            return Err(Error::CorruptFile("not a language model file".into()));
        }
        match parts.get(1) {
            Some(&"v1") => {}
            Some(v) => return Err(Error::UnsupportedVersion((*v).to_string())),
            None => return Err(Error::CorruptFile("header lacks a version".into())),
        }
        let field = |i: usize, name: &str| -> Result<&str> {
            parts
                .get(i)
                .and_then(|p| p.strip_prefix(name))
                .ok_or_else(|| Error::CorruptFile(format!("header lacks {name}")))
        };
        let order: usize = field(2, "order=")?
            .parse()
            .map_err(|_| Error::CorruptFile("bad order".into()))?;
        let alpha: f64 = field(3, "alpha=")?
            .parse()
            .map_err(|_| Error::CorruptFile("bad alpha".into()))?;
        if order == 0 || parts.len() != 4 || !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::CorruptFile("bad header".into()));
        }
        let body = verify_checksum(text)?;
        let mut model = NGramModel::empty(order, alpha);
        for line in body.lines().skip(1) {
            let corrupt = || Error::CorruptFile(format!("bad model line {line:?}"));
            let fields: Vec<&str> = line.split('\t').collect();
            let [m, h, w, c] = fields.as_slice() else {
                return Err(corrupt());
            };
            let m: usize = m.parse().map_err(|_| corrupt())?;
            let c: u64 = c.parse().map_err(|_| corrupt())?;
            let hist_len = if h.is_empty() { 0 } else { h.split(' ').count() };
            if m == 0 || m > order || hist_len != m - 1 || w.is_empty() || c == 0 {
                return Err(corrupt());
            }
            if m == 1 {
                model.vocab.insert(w.to_string());
            }
            model.add(m, h.to_string(), w.to_string(), c);
        }
        if model.vocab.is_empty() {
            return Err(Error::CorruptFile("model has no unigrams".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_model_string().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let text = String::from_utf8(bytes).map_err(|_| Error::CorruptFile("not UTF-8".into()))?;
        Self::from_model_string(&text)
    }
}

impl CoherencyScorer for NGramModel {
    fn score(&self, candidate: &str, left: &[String], right: &[String]) -> Result<f64> {
        Ok(self.slot_score(candidate, left, right))
    }

    fn frequency(&self, word: &str) -> u64 {
        self.unigram_count(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(texts: &[&str], order: usize) -> NGramModel {
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::plain(i.to_string(), *t));
        NGramModel::train(docs, order, DEFAULT_ALPHA, &EncoderConfig::default()).unwrap()
    }

    #[test]
    fn bigram_hand_count() {
        // vocabulary {a, b, </s>} plus <unk>: V = 4; "a" is a history twice
        let m = train(&["a b a b"], 2);
        assert_eq!(m.smoothing_size(), 4);
        let p = m.prob(&["a"], "b");
        assert!((p - (2.0 + 0.1) / (2.0 + 0.1 * 4.0)).abs() < 1e-12);
    }

    #[test]
    fn distributions_sum_to_one() {
        let m = train(&["the dirty republicans", "thee dirty republicans", "the cat sat"], 3);
        let mut support: Vec<&str> = m.vocab().collect();
        support.push(UNK);
        for hist in [
            vec![],
            vec!["the"],
            vec!["the", "dirty"],
            vec!["zzz", "qq"],
            vec![BOS, BOS],
        ] {
            let total: f64 = support.iter().map(|w| m.prob(&hist, w)).sum();
            assert!((total - 1.0).abs() < 1e-9, "history {hist:?}: {total}");
        }
    }

    #[test]
    fn unknown_words_are_finite() {
        let m = train(&["a b a b"], 3);
        let s = m.slot_score("never", &["seen".into()], &["words".into()]);
        assert!(s.is_finite());
        assert!((m.prob(&[], "never") - m.prob(&[], "other")).abs() < 1e-15);
    }

    #[test]
    fn unigram_slot_score_is_log_unigram() {
        let m = train(&["a b a b"], 1);
        let s = m.slot_score("a", &[], &[]);
        assert!((s - m.prob(&[], "a").ln()).abs() < 1e-12);
    }

    #[test]
    fn context_prefers_seen_continuation() {
        let texts = vec!["the dirty republicans"; 20];
        let m = train(&texts, 3);
        let left = vec!["the".to_string(), "dirty".to_string()];
        let good = m.slot_score("republicans", &left, &[]);
        let bad = m.slot_score("the", &left, &[]);
        assert!(good > bad);
        assert_eq!(good, m.slot_score("republicans", &left, &[]));
    }

    #[test]
    fn serialization_round_trip() {
        let m = train(&["the dirty republicans", "a b a b"], 3);
        let text = m.to_model_string();
        assert!(text.starts_with("CRYPTEXT-LM v1 order=3 alpha=0.1\n"));
        let back = NGramModel::from_model_string(&text).unwrap();
        assert_eq!(back, m);
        let damaged = text.replacen("dirty", "dirtx", 1);
        assert!(matches!(
            NGramModel::from_model_string(&damaged),
            Err(Error::CorruptFile(_))
        ));
    }

    #[test]
    fn empty_corpus_rejected() {
        let docs = vec![Document::plain("1", "!!! ...")];
        assert!(matches!(
            NGramModel::train(docs, 3, 0.1, &EncoderConfig::default()),
            Err(Error::EmptyCorpus)
        ));
        assert!(NGramModel::train(Vec::new(), 0, 0.1, &EncoderConfig::default()).is_err());
    }
}
