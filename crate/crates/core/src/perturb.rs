//! Perturbation: replace a chosen fraction of a text's word tokens with
//! perturbations observed in the index.
//!
//! Randomness comes from ChaCha8 seeded with the request's 64-bit seed, so
//! a given (text, index, request) always yields the same output.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::hash::fnv1a64;
use crate::index::PhoneticIndex;
use crate::query::{perturbations_only, LookupParams, Member};
use crate::textcore::{tokenize, TokenSpan};

pub const RNG_NAME: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbRequest {
    pub ratio: f64,
    pub seed: u64,
    pub case_sensitive: bool,
    pub lookup: LookupParams,
}

impl PerturbRequest {
    pub fn new(ratio: f64, seed: u64) -> Self {
        PerturbRequest {
            ratio,
            seed,
            case_sensitive: false,
            lookup: LookupParams::default(),
        }
    }

    fn validate(&self, index: &PhoneticIndex) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::RatioOutOfRange(self.ratio));
        }
        if self.lookup.k != index.level() {
            return Err(Error::LevelMismatch {
                expected: index.level(),
                actual: self.lookup.k,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Replacement {
    pub start: usize,
    pub end: usize,
    pub original: String,
    pub replacement: String,
    pub bucket_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerturbResult {
    pub output_text: String,
    pub replacements: Vec<Replacement>,
    pub requested: usize,
    pub eligible: usize,
    pub achieved: usize,
    pub words: usize,
}

/// `round(ratio · words)`, halves rounded up.
pub fn requested_count(ratio: f64, words: usize) -> usize {
    ((ratio * words as f64 + 0.5).floor() as usize).min(words)
}

pub fn perturb_text(text: &str, index: &PhoneticIndex, req: &PerturbRequest) -> Result<PerturbResult> {
    req.validate(index)?;
    let params = LookupParams {
        case_sensitive: req.case_sensitive,
        ..req.lookup
    };
    let words: Vec<TokenSpan> = tokenize(text, index.encoder())
        .into_iter()
        .filter(|t| t.is_word)
        .collect();

    let mut options: HashMap<&str, Vec<Member>> = HashMap::new();
    for w in &words {
        if !options.contains_key(w.raw.as_str()) {
            let members = match perturbations_only(index, &w.raw, &params) {
                Ok(set) => set.members,
                Err(Error::EmptyToken(_)) => Vec::new(),
                Err(e) => return Err(e),
            };
            options.insert(&w.raw, members);
        }
    }
    let mut eligible: Vec<usize> = (0..words.len())
        .filter(|&i| !options[words[i].raw.as_str()].is_empty())
        .collect();

    let requested = requested_count(req.ratio, words.len());
    let take = requested.min(eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    // partial Fisher-Yates: the first `take` slots become the sample
    for i in 0..take {
        let j = rng.gen_range(i..eligible.len());
        eligible.swap(i, j);
    }
    let mut targets = eligible[..take].to_vec();
    targets.sort_unstable();

    let mut replacements = Vec::with_capacity(take);
    for &t in &targets {
        let span = &words[t];
        let pool = &options[span.raw.as_str()];
        let pick = &pool[rng.gen_range(0..pool.len())];
        replacements.push(Replacement {
            start: span.start,
            end: span.end,
            original: span.raw.clone(),
            replacement: pick.raw.clone(),
            bucket_size: pool.len(),
        });
    }

    let mut output_text = String::with_capacity(text.len() + 16);
    let mut cursor = 0;
    for r in &replacements {
        output_text.push_str(&text[cursor..r.start]);
        output_text.push_str(&r.replacement);
        cursor = r.end;
    }
    output_text.push_str(&text[cursor..]);

    Ok(PerturbResult {
        output_text,
        achieved: replacements.len(),
        replacements,
        requested,
        eligible: eligible.len(),
        words: words.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestRow {
    pub doc_id: String,
    pub words: usize,
    pub requested: usize,
    pub eligible: usize,
    pub achieved: usize,
    pub achieved_ratio: f64,
    pub rng: &'static str,
    pub replacements: Vec<(usize, usize, String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub words: usize,
    pub requested: usize,
    pub eligible: usize,
    pub achieved: usize,
    pub achieved_ratio: f64,
    pub skipped: Vec<crate::index::Skipped>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusPerturbation {
    pub documents: Vec<Document>,
    pub manifest: Vec<ManifestRow>,
    pub summary: CorpusSummary,
}

/// Per-document seed: the request seed xor the FNV-1a hash of the id.
pub fn document_seed(seed: u64, doc_id: &str) -> u64 {
    seed ^ fnv1a64(doc_id.as_bytes())
}

fn ratio(achieved: usize, words: usize) -> f64 {
    if words == 0 {
        0.0
    } else {
        achieved as f64 / words as f64
    }
}

/// Perturbs each document independently. Malformed input lines are
/// skipped and listed in the summary.
pub fn perturb_corpus<I>(corpus: I, index: &PhoneticIndex, req: &PerturbRequest) -> Result<CorpusPerturbation>
where
    I: IntoIterator<Item = Result<Document>>,
{
    req.validate(index)?;
    let mut docs = Vec::new();
    let mut skipped = Vec::new();
    for item in corpus {
        match item {
            Ok(d) => docs.push(d),
            Err(Error::MalformedDocument { line, reason }) => skipped.push(crate::index::Skipped { line, reason }),
            Err(e) => return Err(e),
        }
    }
    let results: Vec<(Document, ManifestRow)> = docs
        .into_par_iter()
        .map(|doc| {
            let doc_req = PerturbRequest {
                seed: document_seed(req.seed, &doc.id),
                ..*req
            };
            let r = perturb_text(&doc.text, index, &doc_req)?;
            let row = ManifestRow {
                doc_id: doc.id.clone(),
                words: r.words,
                requested: r.requested,
                eligible: r.eligible,
                achieved: r.achieved,
                achieved_ratio: ratio(r.achieved, r.words),
                rng: RNG_NAME,
                replacements: r
                    .replacements
                    .into_iter()
                    .map(|x| (x.start, x.end, x.original, x.replacement))
                    .collect(),
            };
            Ok((
                Document {
                    text: r.output_text,
                    ..doc
                },
                row,
            ))
        })
        .collect::<Result<_>>()?;

    let mut summary = CorpusSummary {
        documents: results.len(),
        skipped,
        ..CorpusSummary::default()
    };
    for (_, row) in &results {
        summary.words += row.words;
        summary.requested += row.requested;
        summary.eligible += row.eligible;
        summary.achieved += row.achieved;
    }
    summary.achieved_ratio = ratio(summary.achieved, summary.words);
    let (documents, manifest) = results.into_iter().unzip();
    Ok(CorpusPerturbation {
        documents,
        manifest,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::tests::caption_index;
    use crate::query::perturbations_only;

    fn req(ratio: f64, seed: u64, d: usize) -> PerturbRequest {
        PerturbRequest {
            lookup: LookupParams::with_kd(1, d),
            ..PerturbRequest::new(ratio, seed)
        }
    }

    #[test]
    fn zero_ratio_is_identity() {
        let idx = caption_index(1);
        let r = perturb_text("the dirty republicans.", &idx, &req(0.0, 7, 3)).unwrap();
        assert_eq!(r.output_text, "the dirty republicans.");
        assert_eq!(r.achieved, 0);
    }

    #[test]
    fn full_ratio_replaces_every_word() {
        let idx = caption_index(1);
        let r = perturb_text("the dirty republicans", &idx, &req(1.0, 3, 1)).unwrap();
        assert_eq!(r.achieved, 3);
        assert_eq!(r.words, 3);
        assert_ne!(r.output_text, "the dirty republicans");
    }

    #[test]
    fn one_of_three() {
        let idx = caption_index(1);
        let allowed = [("the", "thee"), ("dirty", "dirrty"), ("republicans", "repubLIEcans")];
        for seed in 0..50 {
            let r = perturb_text("the dirty republicans", &idx, &req(0.34, seed, 1)).unwrap();
            assert_eq!(r.requested, 1);
            assert_eq!(r.achieved, 1);
            let rep = &r.replacements[0];
            assert!(
                allowed.contains(&(rep.original.as_str(), rep.replacement.as_str())),
                "{rep:?}"
            );
        }
    }

    #[test]
    fn replacements_are_valid_perturbations() {
        let idx = caption_index(1);
        let q = req(1.0, 11, 3);
        let r = perturb_text("The dirty republicans and the dirty ones", &idx, &q).unwrap();
        for rep in &r.replacements {
            let set = perturbations_only(&idx, &rep.original, &q.lookup).unwrap();
            assert!(set.contains(&rep.replacement));
        }
        // "and", "ones" have no perturbations
        assert_eq!(r.eligible, 5);
        assert_eq!(r.requested, 7);
        assert_eq!(r.achieved, 5);
    }

    #[test]
    fn deterministic_for_seed() {
        let idx = caption_index(1);
        let text = "the dirty republicans the dirty republicans the dirty";
        let a = perturb_text(text, &idx, &req(0.5, 99, 3)).unwrap();
        let b = perturb_text(text, &idx, &req(0.5, 99, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ratio_and_level_errors() {
        let idx = caption_index(1);
        assert!(matches!(
            perturb_text("x", &idx, &req(1.5, 0, 1)),
            Err(Error::RatioOutOfRange(_))
        ));
        assert!(matches!(
            perturb_text("x", &idx, &req(f64::NAN, 0, 1)),
            Err(Error::RatioOutOfRange(_))
        ));
        let mut bad = req(0.5, 0, 1);
        bad.lookup.k = 2;
        assert!(matches!(
            perturb_text("x", &idx, &bad),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(requested_count(0.25, 2), 1);
        assert_eq!(requested_count(0.34, 3), 1);
        assert_eq!(requested_count(0.5, 3), 2);
        assert_eq!(requested_count(0.15, 10), 2);
        assert_eq!(requested_count(1.0, 0), 0);
    }

    #[test]
    fn corpus_manifest() {
        let idx = caption_index(1);
        let docs: Vec<Result<Document>> = (0..10)
            .map(|i| Ok(Document::plain(i.to_string(), "the dirty republicans the dirty")))
            .collect();
        let a = perturb_corpus(
            docs.iter().map(|d| Ok(d.as_ref().unwrap().clone())),
            &idx,
            &req(0.4, 5, 3),
        )
        .unwrap();
        let b = perturb_corpus(docs, &idx, &req(0.4, 5, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.manifest.len(), 10);
        assert!(a.manifest.iter().all(|r| r.achieved == 2 && r.rng == RNG_NAME));
        assert_eq!(a.summary.achieved, 20);
        let empty = perturb_corpus(Vec::new(), &idx, &req(0.4, 5, 3)).unwrap();
        assert!(empty.documents.is_empty() && empty.manifest.is_empty());
    }
}
