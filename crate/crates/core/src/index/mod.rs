//! Phonetic hash-maps: Soundex key at level `k` → observed raw tokens with
//! occurrence counts.

mod format;
mod incremental;
mod ingest;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::textcore::{encode, EncoderConfig, SoundexKey};

pub use format::{from_index_string, load, load_dir, save, save_dir, to_index_string, IndexDir, ENCODER_FILE};
pub use incremental::{list_corpus_files, update_dir, INGESTED_LOG};
pub use ingest::{ingest, ingest_documents, IngestOptions, IngestReport, Skipped, MAX_TOKEN_CHARS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenEntry {
    pub raw: String,
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_seen: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct TokenStats {
    pub count: u64,
    pub first_seen: Option<DateTime<Utc>>,
}

impl TokenStats {
    pub(crate) fn absorb(&mut self, other: TokenStats) {
        self.count += other.count;
        self.first_seen = match (self.first_seen, other.first_seen) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

pub(crate) type Bucket = BTreeMap<String, TokenStats>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexStats {
    pub token_count: usize,
    pub bucket_count: usize,
    pub document_count: u64,
}

/// The hash-map for one phonetic level. Immutable once built; `merge`
/// produces a new value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneticIndex {
    level: u8,
    encoder: Arc<EncoderConfig>,
    buckets: BTreeMap<String, Bucket>,
    token_count: usize,
    document_count: u64,
}

impl PhoneticIndex {
    pub fn empty(level: u8, encoder: Arc<EncoderConfig>) -> Self {
        PhoneticIndex {
            level,
            encoder,
            buckets: BTreeMap::new(),
            token_count: 0,
            document_count: 0,
        }
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn encoder(&self) -> &Arc<EncoderConfig> {
        &self.encoder
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            token_count: self.token_count,
            bucket_count: self.buckets.len(),
            document_count: self.document_count,
        }
    }

    pub fn key_for(&self, raw: &str) -> Result<SoundexKey> {
        encode(raw, self.level, &self.encoder)
    }

    /// Entries stored under `key`, ordered by raw token.
    pub fn get_bucket(&self, key: &SoundexKey) -> Result<Vec<TokenEntry>> {
        if key.level() != self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                actual: key.level(),
            });
        }
        Ok(self
            .bucket_ref(key.as_str())
            .map(|b| {
                b.iter()
                    .map(|(raw, s)| TokenEntry {
                        raw: raw.clone(),
                        count: s.count,
                        first_seen: s.first_seen,
                    })
                    .collect()
            })
            .unwrap_or_default())
    }

    pub(crate) fn bucket_ref(&self, key: &str) -> Option<&Bucket> {
        self.buckets.get(key)
    }

    /// Keys in lexicographic order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.buckets.keys().map(String::as_str)
    }

    /// Every `(key, entry)` pair sorted by `(key, raw)`.
    pub fn entries(&self) -> impl Iterator<Item = (&str, TokenEntry)> + '_ {
        self.buckets.iter().flat_map(|(key, bucket)| {
            bucket.iter().map(move |(raw, s)| {
                (
                    key.as_str(),
                    TokenEntry {
                        raw: raw.clone(),
                        count: s.count,
                        first_seen: s.first_seen,
                    },
                )
            })
        })
    }

    /// Count for an exact raw token, 0 if unseen.
    pub fn count_of(&self, raw: &str) -> u64 {
        self.key_for(raw)
            .ok()
            .and_then(|k| self.buckets.get(k.as_str()))
            .and_then(|b| b.get(raw))
            .map_or(0, |s| s.count)
    }

    pub(crate) fn insert_keyed(&mut self, key: String, raw: String, stats: TokenStats) {
        let bucket = self.buckets.entry(key).or_default();
        match bucket.get_mut(&raw) {
            Some(existing) => existing.absorb(stats),
            None => {
                bucket.insert(raw, stats);
                self.token_count += 1;
            }
        }
    }

    pub(crate) fn insert(&mut self, raw: &str, stats: TokenStats) -> Result<()> {
        let key = self.key_for(raw)?;
        self.insert_keyed(key.as_str().to_string(), raw.to_string(), stats);
        Ok(())
    }

    pub(crate) fn add_documents(&mut self, n: u64) {
        self.document_count += n;
    }

    /// Bucket-wise union with counts added for shared raw tokens.
    pub fn merge(&self, other: &PhoneticIndex) -> Result<PhoneticIndex> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                actual: other.level,
            });
        }
        if self.encoder != other.encoder {
            return Err(Error::ConfigMismatch {
                expected: self.encoder.fingerprint(),
                found: other.encoder.fingerprint(),
            });
        }
        let (mut out, smaller) = if self.token_count >= other.token_count {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (key, bucket) in &smaller.buckets {
            for (raw, stats) in bucket {
                out.insert_keyed(key.clone(), raw.clone(), *stats);
            }
        }
        out.document_count = self.document_count + other.document_count;
        Ok(out)
    }
}

pub fn merge(a: &PhoneticIndex, b: &PhoneticIndex) -> Result<PhoneticIndex> {
    a.merge(b)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::Document;

    pub(crate) const CAPTION: [&str; 3] = [
        "the dirrty republicans",
        "thee dirty repubLIEcans",
        "the dirty republic@@ns",
    ];

    pub(crate) fn caption_index(level: u8) -> PhoneticIndex {
        let docs: Vec<Document> = CAPTION
            .iter()
            .enumerate()
            .map(|(i, t)| Document::plain(i.to_string(), *t))
            .collect();
        let (mut levels, _) = ingest_documents(docs, &[level], &IngestOptions::default()).unwrap();
        levels.remove(&level).unwrap()
    }

    fn raws(index: &PhoneticIndex, key: &str) -> Vec<(String, u64)> {
        let key = SoundexKey::from_parts(index.level(), key).unwrap();
        index
            .get_bucket(&key)
            .unwrap()
            .into_iter()
            .map(|e| (e.raw, e.count))
            .collect()
    }

    #[test]
    fn caption_buckets() {
        let idx = caption_index(1);
        assert_eq!(idx.stats().bucket_count, 3);
        assert_eq!(idx.stats().token_count, 7);
        assert_eq!(idx.stats().document_count, 3);
        assert_eq!(raws(&idx, "TH000"), [("the".to_string(), 2), ("thee".to_string(), 1)]);
        assert_eq!(
            raws(&idx, "DI630"),
            [("dirrty".to_string(), 1), ("dirty".to_string(), 2)]
        );
        assert!(raws(&idx, "ZZ000").is_empty());
    }

    #[test]
    fn level_mismatch_on_get_bucket() {
        let idx = caption_index(1);
        let key = SoundexKey::from_parts(0, "T000").unwrap();
        assert!(matches!(idx.get_bucket(&key), Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn merge_rejects_mismatches() {
        let a = caption_index(1);
        let b = caption_index(0);
        assert!(matches!(a.merge(&b), Err(Error::LevelMismatch { .. })));
        let other_cfg = Arc::new(EncoderConfig::parse("[visual_map]\n@=a\n").unwrap());
        let c = PhoneticIndex::empty(1, other_cfg);
        assert!(matches!(a.merge(&c), Err(Error::ConfigMismatch { .. })));
    }

    #[test]
    fn merge_identity_and_count_sum() {
        let a = caption_index(1);
        let empty = PhoneticIndex::empty(1, a.encoder().clone());
        assert_eq!(a.merge(&empty).unwrap(), a);
        assert_eq!(empty.merge(&a).unwrap(), a);
        let doubled = a.merge(&a).unwrap();
        assert_eq!(doubled.count_of("the"), 4);
        assert_eq!(doubled.stats().token_count, 7);
        assert_eq!(doubled.stats().document_count, 6);
    }
}
