//! De-perturbation: every word token that is not already a dictionary word
//! is matched against dictionary words sharing its phonetic key within
//! edit distance `d`, and replaced by the candidate that best fits its
//! context.

mod dictionary;
pub mod ngram;
mod scorer;

use std::cmp::Ordering;

use serde::Serialize;

pub use dictionary::{DictionaryReport, WordDictionary};
pub use ngram::NGramModel;
pub use scorer::{CoherencyScorer, ProcessScorer};

use crate::error::{Error, Result};
use crate::textcore::{canonicalize, casefold, encode, levenshtein, tokenize, TokenSpan};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub word: String,
    pub distance: usize,
    pub coherency: f64,
    pub corpus_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenStatus {
    Clean,
    Normalized,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annotation {
    #[serde(flatten)]
    pub span: Span,
    pub original: String,
    pub replacement: Option<String>,
    pub status: TokenStatus,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl From<&TokenSpan> for Span {
    fn from(t: &TokenSpan) -> Self {
        Span {
            start: t.start,
            end: t.end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationResult {
    pub output_text: String,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeParams {
    pub k: u8,
    pub d: usize,
    pub top_n: usize,
}

impl Default for NormalizeParams {
    fn default() -> Self {
        NormalizeParams { k: 1, d: 3, top_n: 5 }
    }
}

fn check_level(dict: &WordDictionary, k: u8) -> Result<()> {
    if dict.has_level(k) {
        Ok(())
    } else {
        Err(Error::LevelMismatch {
            expected: dict.levels().next().unwrap_or(0),
            actual: k,
        })
    }
}

/// Dictionary words sharing the token's key at level `k` and within
/// distance `d` of its case-folded spelling. Coherency is left at zero.
pub fn candidates_for(token: &str, dict: &WordDictionary, k: u8, d: usize) -> Result<Vec<Candidate>> {
    check_level(dict, k)?;
    let key = encode(token, k, dict.encoder())?;
    let folded = casefold(token);
    Ok(dict
        .words_for_key(k, key.as_str())
        .iter()
        .filter_map(|w| {
            let distance = levenshtein(&folded, w);
            (distance <= d).then(|| Candidate {
                word: w.clone(),
                distance,
                coherency: 0.0,
                corpus_count: 0,
            })
        })
        .collect())
}

/// Ranking: coherency (high first), then distance, corpus frequency and
/// finally the word itself.
pub fn rank_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.coherency
        .total_cmp(&a.coherency)
        .then(a.distance.cmp(&b.distance))
        .then(b.corpus_count.cmp(&a.corpus_count))
        .then_with(|| a.word.cmp(&b.word))
}

/// Copies the original's casing pattern onto the replacement: all caps
/// stays all caps, a capitalised word stays capitalised, anything else
/// comes out lowercase.
pub fn apply_casing(original: &str, word: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase()) {
        return word.to_uppercase();
    }
    let capitalised =
        letters.first().is_some_and(|c| c.is_uppercase()) && letters[1..].iter().all(|c| !c.is_uppercase());
    if capitalised {
        let mut chars = word.chars();
        return match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => String::new(),
        };
    }
    word.to_string()
}

/// A token is clean when it is spelled as a dictionary word: its canonical
/// form is listed and it carries nothing but letters and apostrophes.
/// Look-alike symbols or hyphens mark it as a candidate perturbation even
/// when they canonicalize back to a valid word.
fn is_clean(raw: &str, dict: &WordDictionary) -> bool {
    raw.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '\u{2019}')
        && dict.contains(&canonicalize(raw, dict.encoder()))
}

pub fn normalize_text(
    text: &str,
    dict: &WordDictionary,
    scorer: &dyn CoherencyScorer,
    params: &NormalizeParams,
) -> Result<NormalizationResult> {
    check_level(dict, params.k)?;
    let encoder = dict.encoder();
    let words: Vec<TokenSpan> = tokenize(text, encoder).into_iter().filter(|t| t.is_word).collect();
    let canon: Vec<String> = words.iter().map(|t| canonicalize(&t.raw, encoder)).collect();

    // left context uses already-normalized words, right context the input
    let mut context: Vec<String> = canon.clone();
    let mut annotations = Vec::with_capacity(words.len());

    for (i, token) in words.iter().enumerate() {
        let mut annotation = Annotation {
            span: token.into(),
            original: token.raw.clone(),
            replacement: None,
            status: TokenStatus::Clean,
            candidates: Vec::new(),
        };
        if is_clean(&token.raw, dict) {
            annotations.push(annotation);
            continue;
        }
        let mut candidates = match candidates_for(&token.raw, dict, params.k, params.d) {
            Ok(c) => c,
            Err(Error::EmptyToken(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        if candidates.is_empty() {
            annotation.status = TokenStatus::Unknown;
            annotations.push(annotation);
            continue;
        }
        let (left, right) = (&context[..i], &context[i + 1..]);
        for c in &mut candidates {
            c.coherency = scorer.score(&c.word, left, right)?;
            c.corpus_count = scorer.frequency(&c.word);
        }
        candidates.sort_by(rank_order);
        let best = candidates[0].word.clone();
        annotation.replacement = Some(apply_casing(&token.raw, &best));
        annotation.status = TokenStatus::Normalized;
        candidates.truncate(params.top_n);
        annotation.candidates = candidates;
        context[i] = best;
        annotations.push(annotation);
    }

    let mut output_text = String::with_capacity(text.len());
    let mut cursor = 0;
    for a in &annotations {
        if let Some(rep) = &a.replacement {
            output_text.push_str(&text[cursor..a.span.start]);
            output_text.push_str(rep);
            cursor = a.span.end;
        }
    }
    output_text.push_str(&text[cursor..]);
    Ok(NormalizationResult {
        output_text,
        annotations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::textcore::EncoderConfig;
    use std::sync::Arc;

    fn dict(words: &[&str]) -> WordDictionary {
        WordDictionary::build(words, &[0, 1, 2], Arc::new(EncoderConfig::default()), "t")
            .unwrap()
            .0
    }

    fn caption_model() -> NGramModel {
        let docs = (0..30).map(|i| Document::plain(i.to_string(), "the dirty republicans"));
        NGramModel::train(docs, 3, 0.1, &EncoderConfig::default()).unwrap()
    }

    #[test]
    fn candidates() {
        let d = dict(&["the", "dirty", "republicans", "thy"]);
        let c = candidates_for("repubLIEcans", &d, 1, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].word, "republicans");
        assert_eq!(c[0].distance, levenshtein("republiecans", "republicans"));
        let c = candidates_for("the", &d, 1, 3).unwrap();
        assert!(c.iter().any(|c| c.word == "the" && c.distance == 0));
        assert!(candidates_for("zzzz", &d, 1, 3).unwrap().is_empty());
        assert!(matches!(candidates_for("--", &d, 1, 3), Err(Error::EmptyToken(_))));
        let small = WordDictionary::build(["the"], &[1], Arc::new(EncoderConfig::default()), "x")
            .unwrap()
            .0;
        assert!(matches!(
            candidates_for("the", &small, 2, 3),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn caption_sentence_is_restored() {
        let d = dict(&["the", "dirty", "republicans", "cat"]);
        let model = caption_model();
        let r = normalize_text("thee dirty repubLIEcans", &d, &model, &NormalizeParams::default()).unwrap();
        assert_eq!(r.output_text, "the dirty republicans");
        let statuses: Vec<TokenStatus> = r.annotations.iter().map(|a| a.status).collect();
        assert_eq!(
            statuses,
            [TokenStatus::Normalized, TokenStatus::Clean, TokenStatus::Normalized]
        );
        assert_eq!(r.annotations[2].candidates[0].word, "republicans");
    }

    #[test]
    fn clean_text_unchanged() {
        let d = dict(&["the", "dirty", "republicans"]);
        let r = normalize_text(
            "the dirty republicans",
            &d,
            &caption_model(),
            &NormalizeParams::default(),
        )
        .unwrap();
        assert_eq!(r.output_text, "the dirty republicans");
        assert!(r.annotations.iter().all(|a| a.status == TokenStatus::Clean));
    }

    #[test]
    fn unknown_token_left_alone() {
        let d = dict(&["the", "dirty", "republicans"]);
        let r = normalize_text(
            "the qqqq republicans!",
            &d,
            &caption_model(),
            &NormalizeParams::default(),
        )
        .unwrap();
        assert_eq!(r.output_text, "the qqqq republicans!");
        assert_eq!(r.annotations[1].status, TokenStatus::Unknown);
    }

    #[test]
    fn symbols_that_canonicalize_to_a_word_are_still_fixed() {
        let d = dict(&["the", "dirty", "democrats"]);
        let r = normalize_text(
            "those DEM0CRATS, the Dem0crats.",
            &d,
            &caption_model(),
            &NormalizeParams::default(),
        )
        .unwrap();
        assert_eq!(r.output_text, "those DEMOCRATS, the Democrats.");
    }

    #[test]
    fn bytes_outside_replacements_are_kept() {
        let d = dict(&["the", "dirty", "republicans"]);
        let text = "  «thee»   dirrty\t(repubLIEcans)…  ";
        let r = normalize_text(text, &d, &caption_model(), &NormalizeParams::default()).unwrap();
        assert_eq!(r.output_text, "  «the»   dirty\t(republicans)…  ");
    }

    #[test]
    fn casing_rules() {
        assert_eq!(apply_casing("THEE", "the"), "THE");
        assert_eq!(apply_casing("Thee", "the"), "The");
        assert_eq!(apply_casing("repubLIEcans", "republicans"), "republicans");
        assert_eq!(apply_casing("dem0", "demo"), "demo");
    }

    #[test]
    fn ranking_is_total() {
        let mk = |w: &str, coh: f64, dist: usize, cnt: u64| Candidate {
            word: w.into(),
            distance: dist,
            coherency: coh,
            corpus_count: cnt,
        };
        let mut v = [
            mk("b", -1.0, 1, 5),
            mk("a", -1.0, 1, 5),
            mk("c", -1.0, 1, 9),
            mk("d", -1.0, 0, 0),
            mk("e", -0.5, 3, 0),
        ];
        v.sort_by(rank_order);
        let order: Vec<&str> = v.iter().map(|c| c.word.as_str()).collect();
        assert_eq!(order, ["e", "d", "c", "a", "b"]);
    }

    #[test]
    fn top_n_truncates() {
        let d = dict(&["bat", "bet", "bit", "bot", "but", "batt"]);
        let model = caption_model();
        let params = NormalizeParams { k: 0, d: 3, top_n: 2 };
        let r = normalize_text("b@t", &d, &model, &params).unwrap();
        assert_eq!(r.annotations[0].candidates.len(), 2);
        assert_eq!(r.annotations[0].status, TokenStatus::Normalized);
    }
}
