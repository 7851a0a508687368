use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::textcore::{canonicalize, encode, EncoderConfig};

/// The set of valid words, keyed by phonetic code at each built level.
#[derive(Debug, Clone)]
pub struct WordDictionary {
    words: BTreeSet<String>,
    by_key: BTreeMap<u8, HashMap<String, Vec<String>>>,
    encoder: Arc<EncoderConfig>,
    source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DictionaryReport {
    pub admitted: usize,
    pub duplicates: usize,
    pub rejected: Vec<String>,
}

/// Dictionary form of a wordlist entry: canonical and alphabetic, with
/// accents reduced. Entries carrying digits or look-alike symbols are
/// refused; separators such as apostrophes are dropped.
fn admit(entry: &str, encoder: &EncoderConfig) -> Option<String> {
    let ok_chars = entry
        .chars()
        .all(|c| c.is_alphabetic() || (encoder.is_strip_char(c) && !encoder.is_visual_symbol(c)));
    if !ok_chars {
        return None;
    }
    let word = canonicalize(entry, encoder);
    (!word.is_empty() && word.chars().all(char::is_alphabetic)).then_some(word)
}

impl WordDictionary {
    pub fn build<I, S>(
        wordlist: I,
        levels: &[u8],
        encoder: Arc<EncoderConfig>,
        source: impl Into<String>,
    ) -> Result<(Self, DictionaryReport)>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("at least one level is required".into()));
        }
        let mut report = DictionaryReport::default();
        let mut words = BTreeSet::new();
        for entry in wordlist {
            let entry = entry.as_ref().trim();
            if entry.is_empty() {
                continue;
            }
            match admit(entry, &encoder) {
                Some(w) => {
                    if words.insert(w) {
                        report.admitted += 1;
                    } else {
                        report.duplicates += 1;
                    }
                }
                None => report.rejected.push(entry.to_string()),
            }
        }
        if words.is_empty() {
            return Err(Error::EmptyWordlist);
        }
        let mut by_key = BTreeMap::new();
        for &k in levels {
            let mut map: HashMap<String, Vec<String>> = HashMap::new();
            for w in &words {
                let key = encode(w, k, &encoder)?;
                map.entry(key.as_str().to_string()).or_default().push(w.clone());
            }
            by_key.insert(k, map);
        }
        Ok((
            WordDictionary {
                words,
                by_key,
                encoder,
                source: source.into(),
            },
            report,
        ))
    }

    /// Reads a wordlist file: one word per line, `#` starts a comment line.
    pub fn from_file(
        path: impl AsRef<Path>,
        levels: &[u8],
        encoder: Arc<EncoderConfig>,
    ) -> Result<(Self, DictionaryReport)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let lines = text.lines().map(str::trim).filter(|l| !l.starts_with('#'));
        Self::build(lines, levels, encoder, path.display().to_string())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn levels(&self) -> impl Iterator<Item = u8> + '_ {
        self.by_key.keys().copied()
    }

    pub fn has_level(&self, k: u8) -> bool {
        self.by_key.contains_key(&k)
    }

    pub fn encoder(&self) -> &Arc<EncoderConfig> {
        &self.encoder
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Words filed under `key` at level `k`, sorted.
    pub fn words_for_key(&self, k: u8, key: &str) -> &[String] {
        self.by_key.get(&k).and_then(|m| m.get(key)).map_or(&[], Vec::as_slice)
    }
}
