//! Timelines of how often a word and its perturbations appear in a
//! timestamped corpus, with optional lexicon sentiment per bucket.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{open_corpus, Document};
use crate::error::{Error, Result};
use crate::index::PhoneticIndex;
use crate::query::{lookup, perturbations_only, LookupParams};
use crate::textcore::{canonicalize, casefold, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    Week,
    Month,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "day" => Ok(Granularity::Day),
            "week" => Ok(Granularity::Week),
            "month" => Ok(Granularity::Month),
            other => Err(Error::InvalidParameter(format!("unknown granularity {other:?}"))),
        }
    }
}

impl Granularity {
    /// Start of the bucket holding `t`: UTC midnight, the Monday of its ISO
    /// week, or the first of its month.
    pub fn bucket_start(self, t: DateTime<Utc>) -> DateTime<Utc> {
        let date = t.date_naive();
        let start = match self {
            Granularity::Day => date,
            Granularity::Week => date - Duration::days(i64::from(date.weekday().num_days_from_monday())),
            Granularity::Month => NaiveDate::from_ymd_opt(date.year(), date.month(), 1).expect("valid date"),
        };
        Utc.from_utc_datetime(&start.and_hms_opt(0, 0, 0).expect("midnight"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimelineQuery {
    pub word: String,
    pub lookup: LookupParams,
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
    pub granularity: Granularity,
    pub split_variants: bool,
}

impl TimelineQuery {
    pub fn new(word: impl Into<String>, granularity: Granularity) -> Self {
        TimelineQuery {
            word: word.into(),
            lookup: LookupParams::default(),
            from: None,
            to: None,
            granularity,
            split_variants: true,
        }
    }

    fn in_range(&self, t: DateTime<Utc>) -> bool {
        self.from.is_none_or(|f| t >= f) && self.to.is_none_or(|e| t < e)
    }
}

/// Word valences in [-1, 1]; words not listed score 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn new(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut valences = HashMap::new();
        for (word, v) in entries {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "valence for {word:?} must be in [-1, 1], got {v}"
                )));
            }
            valences.insert(casefold(&word), v);
        }
        Ok(SentimentLexicon { valences })
    }

    /// `word<TAB>valence` per line; `#` comment lines and blanks ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (w, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::InvalidParameter(format!("lexicon line {}: expected word<TAB>valence", n + 1)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("lexicon line {}: bad valence", n + 1)))?;
            entries.push((w.trim().to_string(), v));
        }
        Self::new(entries)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn valence(&self, token: &str) -> f64 {
        self.valences.get(&casefold(token)).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineBucket {
    pub bucket_start: DateTime<Utc>,
    pub document_total: u64,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_sentiment: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TimelineReport {
    pub scanned: u64,
    pub matched: u64,
    pub out_of_range: u64,
    pub missing_timestamp: u64,
    pub unparseable_timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineSeries {
    pub word: String,
    pub granularity: Granularity,
    pub variants: Vec<String>,
    pub buckets: Vec<TimelineBucket>,
    pub report: TimelineReport,
    pub warnings: Vec<String>,
}

enum DocOutcome {
    NoTimestamp,
    BadTimestamp,
    OutOfRange,
    NoMatch,
    Match {
        bucket: DateTime<Utc>,
        counts: Vec<(usize, u64)>,
        sentiment: Option<f64>,
    },
}

struct Matcher<'a> {
    variants: &'a [String],
    exact: HashMap<&'a str, usize>,
    folded: HashMap<String, usize>,
    case_sensitive: bool,
}

impl<'a> Matcher<'a> {
    fn new(variants: &'a [String], case_sensitive: bool) -> Self {
        let mut exact = HashMap::new();
        let mut folded = HashMap::new();
        for (i, v) in variants.iter().enumerate() {
            exact.entry(v.as_str()).or_insert(i);
            folded.entry(casefold(v)).or_insert(i);
        }
        Matcher {
            variants,
            exact,
            folded,
            case_sensitive,
        }
    }

    /// Variant index a token counts toward. Case-insensitive matching
    /// credits an exact spelling first, else the first variant with the
    /// same case folding.
    fn classify(&self, raw: &str) -> Option<usize> {
        if let Some(&i) = self.exact.get(raw) {
            return Some(i);
        }
        if self.case_sensitive {
            None
        } else {
            self.folded.get(&casefold(raw)).copied()
        }
    }
}

fn scan_document(
    doc: &Document,
    q: &TimelineQuery,
    matcher: &Matcher<'_>,
    lex: Option<&SentimentLexicon>,
    index: &PhoneticIndex,
) -> DocOutcome {
    let ts = match doc.parsed_timestamp() {
        Ok(Some(t)) => t,
        Ok(None) => return DocOutcome::NoTimestamp,
        Err(_) => return DocOutcome::BadTimestamp,
    };
    if !q.in_range(ts) {
        return DocOutcome::OutOfRange;
    }
    let mut counts = vec![0u64; matcher.variants.len()];
    let mut words = 0u64;
    let mut valence = 0.0;
    for t in tokenize(&doc.text, index.encoder()) {
        if let Some(i) = matcher.classify(&t.raw) {
            counts[i] += 1;
        }
        if t.is_word {
            words += 1;
            if let Some(lex) = lex {
                let mut v = lex.valence(&t.raw);
                if v == 0.0 {
                    v = lex.valence(&canonicalize(&t.raw, index.encoder()));
                }
                valence += v;
            }
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return DocOutcome::NoMatch;
    }
    DocOutcome::Match {
        bucket: q.granularity.bucket_start(ts),
        counts: counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect(),
        sentiment: lex.map(|_| if words == 0 { 0.0 } else { valence / words as f64 }),
    }
}

/// Variant set for a timeline: the word's look-up members.
pub fn timeline_variants(index: &PhoneticIndex, q: &TimelineQuery) -> Result<Vec<String>> {
    Ok(lookup(index, &q.word, &q.lookup)?
        .members
        .into_iter()
        .map(|m| m.raw)
        .collect())
}

pub fn build_timeline<I>(
    corpus: I,
    index: &PhoneticIndex,
    q: &TimelineQuery,
    lex: Option<&SentimentLexicon>,
) -> Result<TimelineSeries>
where
    I: IntoIterator<Item = Document>,
{
    if let (Some(f), Some(t)) = (q.from, q.to) {
        if f > t {
            return Err(Error::InvalidParameter(format!("range start {f} is after its end {t}")));
        }
    }
    let variants = timeline_variants(index, q)?;
    let mut series = TimelineSeries {
        word: q.word.clone(),
        granularity: q.granularity,
        variants,
        buckets: Vec::new(),
        report: TimelineReport::default(),
        warnings: Vec::new(),
    };
    if series.variants.is_empty() {
        series
            .warnings
            .push(format!("EmptyVariantSet: {:?} has no indexed variants", q.word));
        return Ok(series);
    }

    let matcher = Matcher::new(&series.variants, q.lookup.case_sensitive);
    let docs: Vec<Document> = corpus.into_iter().collect();
    let outcomes: Vec<DocOutcome> = docs
        .par_iter()
        .map(|d| scan_document(d, q, &matcher, lex, index))
        .collect();

    struct Acc {
        total: u64,
        counts: Vec<u64>,
        sentiment_sum: f64,
    }
    let mut buckets: BTreeMap<DateTime<Utc>, Acc> = BTreeMap::new();
    let report = &mut series.report;
    for outcome in outcomes {
        report.scanned += 1;
        match outcome {
            DocOutcome::NoTimestamp => report.missing_timestamp += 1,
            DocOutcome::BadTimestamp => report.unparseable_timestamp += 1,
            DocOutcome::OutOfRange => report.out_of_range += 1,
            DocOutcome::NoMatch => {}
            DocOutcome::Match {
                bucket,
                counts,
                sentiment,
            } => {
                report.matched += 1;
                let acc = buckets.entry(bucket).or_insert_with(|| Acc {
                    total: 0,
                    counts: vec![0; matcher.variants.len()],
                    sentiment_sum: 0.0,
                });
                acc.total += 1;
                for (i, c) in counts {
                    acc.counts[i] += c;
                }
                acc.sentiment_sum += sentiment.unwrap_or(0.0);
            }
        }
    }
    if report.missing_timestamp + report.unparseable_timestamp > 0 {
        series.warnings.push(format!(
            "skipped {} documents without a timestamp and {} with an unparseable one",
            report.missing_timestamp, report.unparseable_timestamp
        ));
    }

    series.buckets = buckets
        .into_iter()
        .map(|(start, acc)| {
            let counts = if q.split_variants {
                series
                    .variants
                    .iter()
                    .zip(&acc.counts)
                    .filter(|(_, &c)| c > 0)
                    .map(|(v, &c)| (v.clone(), c))
                    .collect()
            } else {
                BTreeMap::from([(q.word.clone(), acc.counts.iter().sum())])
            };
            TimelineBucket {
                bucket_start: start,
                document_total: acc.total,
                counts,
                mean_sentiment: lex.map(|_| acc.sentiment_sum / acc.total as f64),
            }
        })
        .collect();
    Ok(series)
}

/// Where timeline documents come from. File corpora are built in; a
/// platform client would implement the same call.
pub trait SourceAdapter {
    fn fetch(
        &self,
        variants: &[String],
        from: Option<DateTime<Utc>>,
        to: Option<DateTime<Utc>>,
    ) -> Result<Vec<Document>>;
}

/// Reads every document of a set of corpus files. Malformed lines are
/// dropped.
#[derive(Debug, Clone)]
pub struct FileSource {
    pub paths: Vec<PathBuf>,
}

impl SourceAdapter for FileSource {
    fn fetch(
        &self,
        _variants: &[String],
        _from: Option<DateTime<Utc>>,
        _to: Option<DateTime<Utc>>,
    ) -> Result<Vec<Document>> {
        let mut docs = Vec::new();
        for p in &self.paths {
            for item in open_corpus(p)? {
                match item {
                    Ok(d) => docs.push(d),
                    Err(Error::MalformedDocument { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(docs)
    }
}

pub fn timeline_from_source(
    source: &dyn SourceAdapter,
    index: &PhoneticIndex,
    q: &TimelineQuery,
    lex: Option<&SentimentLexicon>,
) -> Result<TimelineSeries> {
    let variants = timeline_variants(index, q)?;
    let docs = if variants.is_empty() {
        Vec::new()
    } else {
        source.fetch(&variants, q.from, q.to)?
    };
    build_timeline(docs, index, q, lex)
}

/// Each word mapped to itself plus its perturbations, as extra search
/// keywords.
pub fn keyword_enrich(
    index: &PhoneticIndex,
    words: &[String],
    params: &LookupParams,
) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for w in words {
        let mut variants = vec![w.clone()];
        match perturbations_only(index, w, params) {
            Ok(set) => variants.extend(set.members.into_iter().map(|m| m.raw)),
            Err(Error::EmptyToken(_)) => {}
            Err(e) => return Err(e),
        }
        let mut seen = std::collections::HashSet::new();
        variants.retain(|v| seen.insert(v.clone()));
        out.insert(w.clone(), variants);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::tests::caption_index;

    fn at(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn doc(id: &str, text: &str, ts: &str) -> Document {
        Document::timestamped(id, text, at(ts))
    }

    fn query(word: &str, d: usize, g: Granularity) -> TimelineQuery {
        TimelineQuery {
            lookup: LookupParams::with_kd(1, d),
            ..TimelineQuery::new(word, g)
        }
    }

    #[test]
    fn one_day_fixture() {
        let idx = caption_index(1);
        let docs = vec![
            doc("1", "the the dirty thee", "2021-11-02T08:00:00Z"),
            doc("2", "The republicans", "2021-11-02T12:00:00Z"),
            doc("3", "thee end", "2021-11-02T23:59:59Z"),
            doc("4", "nothing here", "2021-11-02T10:00:00Z"),
        ];
        let s = build_timeline(docs, &idx, &query("the", 1, Granularity::Day), None).unwrap();
        assert_eq!(s.buckets.len(), 1);
        let b = &s.buckets[0];
        assert_eq!(b.bucket_start, at("2021-11-02T00:00:00Z"));
        assert_eq!(b.document_total, 3);
        assert_eq!(b.counts["the"], 3);
        assert_eq!(b.counts["thee"], 2);
        assert_eq!(b.mean_sentiment, None);
        assert_eq!(s.report.matched, 3);
    }

    #[test]
    fn range_is_half_open_and_empty_range_is_empty() {
        let idx = caption_index(1);
        let docs = vec![
            doc("1", "the", "2021-11-01T00:00:00Z"),
            doc("2", "the", "2021-11-03T00:00:00Z"),
        ];
        let mut q = query("the", 1, Granularity::Day);
        q.from = Some(at("2021-11-01T00:00:00Z"));
        q.to = Some(at("2021-11-03T00:00:00Z"));
        let s = build_timeline(docs.clone(), &idx, &q, None).unwrap();
        assert_eq!(s.buckets.len(), 1);
        assert_eq!(s.report.out_of_range, 1);
        q.to = q.from;
        assert!(build_timeline(docs.clone(), &idx, &q, None).unwrap().buckets.is_empty());
        q.to = Some(at("2021-10-01T00:00:00Z"));
        assert!(build_timeline(docs, &idx, &q, None).is_err());
    }

    #[test]
    fn neutral_lexicon_gives_zero_sentiment() {
        let idx = caption_index(1);
        let lex = SentimentLexicon::new([("table".to_string(), 0.0)]).unwrap();
        let docs = vec![doc("1", "the dirty", "2021-11-02T08:00:00Z")];
        let s = build_timeline(docs, &idx, &query("dirty", 1, Granularity::Day), Some(&lex)).unwrap();
        assert_eq!(s.buckets[0].mean_sentiment, Some(0.0));
    }

    #[test]
    fn sentiment_mean_per_document_then_bucket() {
        let idx = caption_index(1);
        let lex = SentimentLexicon::parse("dirty\t-1\nthe\t0.5\n").unwrap();
        let docs = vec![
            doc("1", "dirty dirty", "2021-11-02T08:00:00Z"), // -1
            doc("2", "the dirty", "2021-11-02T09:00:00Z"),   // -0.25
        ];
        let s = build_timeline(docs, &idx, &query("dirty", 1, Granularity::Day), Some(&lex)).unwrap();
        assert!((s.buckets[0].mean_sentiment.unwrap() - (-0.625)).abs() < 1e-12);
    }

    #[test]
    fn weeks_start_monday_and_months_on_the_first() {
        let t = at("2021-11-04T15:00:00Z"); // Thursday
        assert_eq!(Granularity::Week.bucket_start(t), at("2021-11-01T00:00:00Z"));
        assert_eq!(Granularity::Month.bucket_start(t), at("2021-11-01T00:00:00Z"));
        assert_eq!(Granularity::Day.bucket_start(t), at("2021-11-04T00:00:00Z"));
        assert_eq!(
            Granularity::Week.bucket_start(at("2021-11-07T23:00:00Z")),
            at("2021-11-01T00:00:00Z")
        );
    }

    #[test]
    fn missing_and_bad_timestamps_are_reported() {
        let idx = caption_index(1);
        let mut bad = Document::plain("2", "the");
        bad.timestamp = Some("tuesday".into());
        let docs = vec![
            Document::plain("1", "the"),
            bad,
            doc("3", "the", "2021-11-02T08:00:00Z"),
        ];
        let s = build_timeline(docs, &idx, &query("the", 1, Granularity::Day), None).unwrap();
        assert_eq!(s.report.missing_timestamp, 1);
        assert_eq!(s.report.unparseable_timestamp, 1);
        assert_eq!(s.buckets[0].document_total, 1);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn unindexed_word_gives_empty_series_with_warning() {
        let idx = caption_index(1);
        let s = build_timeline(vec![], &idx, &query("zzzz", 1, Granularity::Day), None).unwrap();
        assert!(s.buckets.is_empty());
        assert!(s.warnings[0].starts_with("EmptyVariantSet"));
    }

    #[test]
    fn merged_variant_counts() {
        let idx = caption_index(1);
        let mut q = query("the", 1, Granularity::Day);
        q.split_variants = false;
        let docs = vec![doc("1", "the thee the", "2021-11-02T08:00:00Z")];
        let s = build_timeline(docs, &idx, &q, None).unwrap();
        assert_eq!(s.buckets[0].counts, BTreeMap::from([("the".to_string(), 3)]));
    }

    #[test]
    fn enrichment() {
        let idx = caption_index(1);
        let params = LookupParams::with_kd(1, 3);
        let m = keyword_enrich(&idx, &["republicans".to_string()], &params).unwrap();
        let mut got = m["republicans"].clone();
        got.sort();
        assert_eq!(got, ["repubLIEcans", "republic@@ns", "republicans"]);
        assert!(keyword_enrich(&idx, &[], &params).unwrap().is_empty());
        let m = keyword_enrich(&idx, &["zebra".to_string()], &params).unwrap();
        assert_eq!(m["zebra"], ["zebra"]);
    }

    #[test]
    fn lexicon_validation() {
        assert!(SentimentLexicon::parse("good\t2.0\n").is_err());
        assert!(SentimentLexicon::parse("good 1\n").is_err());
        let lex = SentimentLexicon::parse("# c\nGood\t0.8\n").unwrap();
        assert_eq!(lex.valence("GOOD"), 0.8);
        assert_eq!(lex.valence("meh"), 0.0);
    }
}
