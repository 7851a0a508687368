use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{PhoneticIndex, TokenStats};
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::textcore::{tokenize, EncoderConfig};

/// Longer runs are treated as junk rather than tokens.
pub const MAX_TOKEN_CHARS: usize = 64;

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub encoder: Arc<EncoderConfig>,
    pub max_level: u8,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            encoder: Arc::new(EncoderConfig::default()),
            max_level: 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub documents: u64,
    pub tokens: u64,
    pub rejected_tokens: u64,
    pub bad_timestamps: u64,
    pub malformed: Vec<Skipped>,
}

impl IngestReport {
    fn absorb(&mut self, other: IngestReport) {
        self.documents += other.documents;
        self.tokens += other.tokens;
        self.rejected_tokens += other.rejected_tokens;
        self.bad_timestamps += other.bad_timestamps;
        self.malformed.extend(other.malformed);
    }
}

#[derive(Default)]
struct Partial {
    counts: HashMap<String, TokenStats>,
    report: IngestReport,
}

impl Partial {
    fn absorb(mut self, other: Partial) -> Partial {
        let (mut big, small) = if self.counts.len() >= other.counts.len() {
            (std::mem::take(&mut self.counts), other.counts)
        } else {
            (other.counts, std::mem::take(&mut self.counts))
        };
        for (raw, s) in small {
            big.entry(raw).or_default().absorb(s);
        }
        self.report.absorb(other.report);
        Partial {
            counts: big,
            report: self.report,
        }
    }

    fn add_document(&mut self, doc: &Document, encoder: &EncoderConfig) {
        let first_seen = match doc.parsed_timestamp() {
            Ok(ts) => ts,
            Err(_) => {
                self.report.bad_timestamps += 1;
                None
            }
        };
        self.report.documents += 1;
        for span in tokenize(&doc.text, encoder) {
            if !span.is_word || span.raw.chars().count() > MAX_TOKEN_CHARS {
                self.report.rejected_tokens += 1;
                continue;
            }
            self.report.tokens += 1;
            self.counts
                .entry(span.raw)
                .or_default()
                .absorb(TokenStats { count: 1, first_seen });
        }
    }
}

fn check_levels(levels: &[u8], opts: &IngestOptions) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("at least one level is required".into()));
    }
    if let Some(&k) = levels.iter().find(|&&k| k > opts.max_level) {
        return Err(Error::InvalidParameter(format!(
            "level {k} exceeds the maximum of {}",
            opts.max_level
        )));
    }
    Ok(())
}

/// Tokenizes every document and files each admitted word token under its
/// key at every requested level. Malformed records are skipped and listed
/// in the report; I/O errors abort.
pub fn ingest<I>(corpus: I, levels: &[u8], opts: &IngestOptions) -> Result<(BTreeMap<u8, PhoneticIndex>, IngestReport)>
where
    I: IntoIterator<Item = Result<Document>>,
    I::IntoIter: Send,
{
    check_levels(levels, opts)?;
    let encoder = &opts.encoder;
    let partial = corpus
        .into_iter()
        .par_bridge()
        .try_fold(Partial::default, |mut acc, item| {
            match item {
                Ok(doc) => acc.add_document(&doc, encoder),
                Err(Error::MalformedDocument { line, reason }) => acc.report.malformed.push(Skipped { line, reason }),
                Err(e) => return Err(e),
            }
            Ok(acc)
        })
        .try_reduce(Partial::default, |a, b| Ok(a.absorb(b)))?;

    let Partial { counts, mut report } = partial;
    report.malformed.sort_by_key(|s| s.line);

    let mut sorted: Vec<(String, TokenStats)> = counts.into_iter().collect();
    sorted.sort_unstable_by(|a, b| a.0.cmp(&b.0));

    let mut wanted: Vec<u8> = levels.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let built: Vec<(u8, PhoneticIndex)> = wanted
        .par_iter()
        .map(|&k| {
            let mut index = PhoneticIndex::empty(k, encoder.clone());
            for (raw, stats) in &sorted {
                // admitted tokens always carry a letter, so encoding cannot fail
                index.insert(raw, *stats)?;
            }
            index.add_documents(report.documents);
            Ok((k, index))
        })
        .collect::<Result<_>>()?;
    Ok((built.into_iter().collect(), report))
}

/// Convenience wrapper for in-memory documents.
pub fn ingest_documents<I>(
    docs: I,
    levels: &[u8],
    opts: &IngestOptions,
) -> Result<(BTreeMap<u8, PhoneticIndex>, IngestReport)>
where
    I: IntoIterator<Item = Document>,
    I::IntoIter: Send,
{
    ingest(docs.into_iter().map(Ok), levels, opts)
}
