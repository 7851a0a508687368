//! Request shapes and their evaluation, shared by the HTTP handlers and the
//! command line so that both emit the same JSON for the same inputs.

use chrono::{DateTime, NaiveDate, Utc};
use pertext_core::analytics::{build_timeline, Granularity, SentimentLexicon, TimelineQuery, TimelineSeries};
use pertext_core::corpus::{parse_timestamp, Document};
use pertext_core::index::{IndexDir, PhoneticIndex};
use pertext_core::normalize::{normalize_text, CoherencyScorer, NormalizationResult, NormalizeParams, WordDictionary};
use pertext_core::perturb::{perturb_corpus, perturb_text, CorpusSummary, ManifestRow, PerturbRequest, PerturbResult};
use pertext_core::query::{lookup, LookupParams, PerturbationSet};
use pertext_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_BULK_ITEMS: usize = 1000;

fn default_k() -> u8 {
    1
}

fn default_d() -> usize {
    3
}

fn default_top_n() -> usize {
    5
}

fn default_true() -> bool {
    true
}

fn default_min_count() -> u64 {
    1
}

fn default_granularity() -> String {
    "day".into()
}

/// The index for level `k`, or `LevelMismatch` naming a level that exists.
pub fn index_level(dir: &IndexDir, k: u8) -> Result<&PhoneticIndex> {
    dir.get(k).ok_or_else(|| Error::LevelMismatch {
        expected: dir.levels.keys().next().copied().unwrap_or(0),
        actual: k,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("response types serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupRequest {
    pub token: String,
    #[serde(default = "default_k")]
    pub k: u8,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default)]
    pub case_sensitive: bool,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    #[serde(default = "default_true")]
    pub include_query: bool,
}

impl LookupRequest {
    pub fn new(token: impl Into<String>, k: u8, d: usize) -> Self {
        LookupRequest {
            token: token.into(),
            k,
            d,
            case_sensitive: false,
            min_count: default_min_count(),
            include_query: true,
        }
    }

    pub fn params(&self) -> LookupParams {
        LookupParams {
            k: self.k,
            d: self.d,
            case_sensitive: self.case_sensitive,
            include_query: self.include_query,
            min_count: self.min_count,
        }
    }

    pub fn run(&self, dir: &IndexDir) -> Result<PerturbationSet> {
        lookup(index_level(dir, self.k)?, &self.token, &self.params())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeRequest {
    pub text: String,
    #[serde(default = "default_k")]
    pub k: u8,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
}

impl NormalizeRequest {
    pub fn new(text: impl Into<String>) -> Self {
        NormalizeRequest {
            text: text.into(),
            k: default_k(),
            d: default_d(),
            top_n: default_top_n(),
        }
    }

    pub fn run(&self, dict: &WordDictionary, scorer: &dyn CoherencyScorer) -> Result<NormalizationResult> {
        let params = NormalizeParams {
            k: self.k,
            d: self.d,
            top_n: self.top_n,
        };
        normalize_text(&self.text, dict, scorer, &params)
    }
}

/// Stand-in when no language model is configured: every candidate fits
/// equally, so ranking falls through to distance.
pub struct FlatScorer;

impl CoherencyScorer for FlatScorer {
    fn score(&self, _: &str, _: &[String], _: &[String]) -> Result<f64> {
        Ok(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbRequestBody {
    pub text: String,
    pub ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub case_sensitive: bool,
    #[serde(default = "default_k")]
    pub k: u8,
    #[serde(default = "default_d")]
    pub d: usize,
}

/// Perturbation settings with case sensitivity applied to the lookup too.
pub fn perturb_request(ratio: f64, seed: u64, case_sensitive: bool, k: u8, d: usize) -> PerturbRequest {
    PerturbRequest {
        case_sensitive,
        lookup: LookupParams {
            case_sensitive,
            ..LookupParams::with_kd(k, d)
        },
        ..PerturbRequest::new(ratio, seed)
    }
}

impl PerturbRequestBody {
    pub fn new(text: impl Into<String>, ratio: f64, seed: u64) -> Self {
        PerturbRequestBody {
            text: text.into(),
            ratio,
            seed,
            case_sensitive: false,
            k: default_k(),
            d: default_d(),
        }
    }

    pub fn run(&self, dir: &IndexDir) -> Result<PerturbResult> {
        let req = perturb_request(self.ratio, self.seed, self.case_sensitive, self.k, self.d);
        perturb_text(&self.text, index_level(dir, self.k)?, &req)
    }
}

/// A bulk item: a bare string or `{id, text}`. Bare strings take their
/// position as id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusItem {
    Text(String),
    Doc {
        #[serde(default)]
        id: Option<String>,
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbCorpusBody {
    pub documents: Vec<CorpusItem>,
    pub ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub case_sensitive: bool,
    #[serde(default = "default_k")]
    pub k: u8,
    #[serde(default = "default_d")]
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputDocument {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbCorpusResponse {
    pub documents: Vec<OutputDocument>,
    pub manifest: Vec<ManifestRow>,
    pub summary: CorpusSummary,
}

impl PerturbCorpusBody {
    pub fn run(&self, dir: &IndexDir) -> Result<PerturbCorpusResponse> {
        if self.documents.len() > MAX_BULK_ITEMS {
            return Err(Error::InvalidParameter(format!(
                "{} documents exceed the limit of {MAX_BULK_ITEMS}",
                self.documents.len()
            )));
        }
        let docs = self.documents.iter().enumerate().map(|(i, item)| {
            Ok(match item {
                CorpusItem::Text(text) => Document::plain(i.to_string(), text.clone()),
                CorpusItem::Doc { id, text } => {
                    Document::plain(id.clone().unwrap_or_else(|| i.to_string()), text.clone())
                }
            })
        });
        let req = perturb_request(self.ratio, self.seed, self.case_sensitive, self.k, self.d);
        let out = perturb_corpus(docs, index_level(dir, self.k)?, &req)?;
        Ok(PerturbCorpusResponse {
            documents: out
                .documents
                .into_iter()
                .map(|d| OutputDocument { id: d.id, text: d.text })
                .collect(),
            manifest: out.manifest,
            summary: out.summary,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineRequest {
    pub word: String,
    #[serde(default)]
    pub from: Option<String>,
    #[serde(default)]
    pub to: Option<String>,
    #[serde(default = "default_granularity")]
    pub granularity: String,
    #[serde(default = "default_k")]
    pub k: u8,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_true")]
    pub split_variants: bool,
}

/// RFC 3339 instant, or a bare `YYYY-MM-DD` meaning UTC midnight.
pub fn parse_instant(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(date) = NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d") {
        return Ok(date.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    parse_timestamp(s)
}

impl TimelineRequest {
    pub fn new(word: impl Into<String>) -> Self {
        TimelineRequest {
            word: word.into(),
            from: None,
            to: None,
            granularity: default_granularity(),
            k: default_k(),
            d: default_d(),
            split_variants: true,
        }
    }

    pub fn query(&self) -> Result<TimelineQuery> {
        Ok(TimelineQuery {
            lookup: LookupParams::with_kd(self.k, self.d),
            from: self.from.as_deref().map(parse_instant).transpose()?,
            to: self.to.as_deref().map(parse_instant).transpose()?,
            split_variants: self.split_variants,
            ..TimelineQuery::new(self.word.clone(), self.granularity.parse::<Granularity>()?)
        })
    }

    pub fn run<I>(&self, dir: &IndexDir, corpus: I, lex: Option<&SentimentLexicon>) -> Result<TimelineSeries>
    where
        I: IntoIterator<Item = Document>,
    {
        let q = self.query()?;
        build_timeline(corpus, index_level(dir, self.k)?, &q, lex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let r: LookupRequest = serde_json::from_str(r#"{"token":"x"}"#).unwrap();
        assert_eq!(r, LookupRequest::new("x", 1, 3));
        let n: NormalizeRequest = serde_json::from_str(r#"{"text":"x"}"#).unwrap();
        assert_eq!(n, NormalizeRequest::new("x"));
        assert!(serde_json::from_str::<PerturbRequestBody>(r#"{"text":"x","ratio":0.5}"#).is_err());
        assert!(serde_json::from_str::<NormalizeRequest>(r#"{"text":"x","extra":1}"#).is_err());
    }

    #[test]
    fn bulk_items_take_either_shape() {
        let b: PerturbCorpusBody =
            serde_json::from_str(r#"{"documents":["a",{"id":"z","text":"b"}],"ratio":0,"seed":1}"#).unwrap();
        assert_eq!(b.documents[0], CorpusItem::Text("a".into()));
        assert_eq!(
            b.documents[1],
            CorpusItem::Doc {
                id: Some("z".into()),
                text: "b".into()
            }
        );
    }

    #[test]
    fn instants() {
        assert_eq!(
            parse_instant("2021-11-02").unwrap().to_rfc3339(),
            "2021-11-02T00:00:00+00:00"
        );
        assert!(parse_instant("2021-11-02T03:00:00Z").is_ok());
        assert_eq!(parse_instant("yesterday").unwrap_err().code(), "UnparseableTimestamp");
    }
}
