//! On-disk index format.
//!
//! ```text
//! CRYPTEXT-INDEX<TAB>v1<TAB>k=<k><TAB>encoder=<16-hex>
//! <key><TAB><raw><TAB><count>          one per entry, sorted by (key, raw)
//! #CHECKSUM<TAB><16-hex FNV-1a of every preceding byte>
//! ```
//!
//! Document counts and first-seen timestamps live in a `<file>.meta`
//! sidecar with the same header/checksum framing, so the index file itself
//! stays exactly in the layout above.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};

use super::{PhoneticIndex, TokenStats};
use crate::error::{Error, Result};
use crate::filefmt::{verify_checksum, with_checksum, write_atomic};
use crate::textcore::EncoderConfig;

const MAGIC: &str = "CRYPTEXT-INDEX";
const META_MAGIC: &str = "CRYPTEXT-INDEX-META";
const VERSION: &str = "v1";
pub const ENCODER_FILE: &str = "encoder.conf";

fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn to_index_string(index: &PhoneticIndex) -> String {
    let mut out = format!(
        "{MAGIC}\t{VERSION}\tk={}\tencoder={}\n",
        index.level,
        index.encoder.fingerprint()
    );
    for (key, bucket) in &index.buckets {
        for (raw, stats) in bucket {
            let _ = writeln!(out, "{key}\t{raw}\t{}", stats.count);
        }
    }
    with_checksum(out)
}

fn to_meta_string(index: &PhoneticIndex) -> String {
    let mut out = format!("{META_MAGIC}\t{VERSION}\tk={}\n", index.level);
    let _ = writeln!(out, "documents\t{}", index.document_count);
    let mut seen: Vec<(&str, DateTime<Utc>)> = index
        .buckets
        .values()
        .flat_map(|b| b.iter())
        .filter_map(|(raw, s)| s.first_seen.map(|t| (raw.as_str(), t)))
        .collect();
    seen.sort_unstable();
    for (raw, t) in seen {
        let _ = writeln!(out, "seen\t{raw}\t{}", t.to_rfc3339_opts(SecondsFormat::AutoSi, true));
    }
    with_checksum(out)
}

/// Writes the index and its sidecar. Each file is replaced atomically.
pub fn save(index: &PhoneticIndex, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(&meta_path(path), to_meta_string(index).as_bytes())?;
    write_atomic(path, to_index_string(index).as_bytes())
}

fn parse_header<'a>(line: &'a str, magic: &str, fields: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.split('\t').collect();
    if parts.first() != Some(&magic) {
        return Err(Error::CorruptFile(format!("not a {magic} file")));
    }
    match parts.get(1) {
        Some(&VERSION) => {}
        Some(v) => return Err(Error::UnsupportedVersion((*v).to_string())),
        None => return Err(Error::CorruptFile("header lacks a version".into())),
    }
    if parts.len() != fields {
        return Err(Error::CorruptFile(format!("header has {} fields", parts.len())));
    }
    Ok(parts)
}

fn parse_level(field: &str) -> Result<u8> {
    field
        .strip_prefix("k=")
        .and_then(|k| k.parse().ok())
        .ok_or_else(|| Error::CorruptFile(format!("bad level field {field:?}")))
}

/// Parses an index file's contents, verifying that it was written with
/// `encoder`.
pub fn from_index_string(text: &str, encoder: Arc<EncoderConfig>) -> Result<PhoneticIndex> {
    let header = text.lines().next().unwrap_or("");
    let parts = parse_header(header, MAGIC, 4)?;
    let level = parse_level(parts[2])?;
    let found = parts[3]
        .strip_prefix("encoder=")
        .ok_or_else(|| Error::CorruptFile("bad encoder field".into()))?;
    let body = verify_checksum(text)?;
    let expected = encoder.fingerprint();
    if found != expected {
        return Err(Error::ConfigMismatch {
            expected,
            found: found.to_string(),
        });
    }

    let mut index = PhoneticIndex::empty(level, encoder);
    let mut prev: Option<(&str, &str)> = None;
    for (n, line) in body.lines().enumerate().skip(1) {
        let corrupt = |why: &str| Error::CorruptFile(format!("line {}: {why}", n + 1));
        let mut fields = line.split('\t');
        let (Some(key), Some(raw), Some(count), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(corrupt("expected key, raw and count"));
        };
        let count: u64 = count.parse().map_err(|_| corrupt("bad count"))?;
        if count == 0 || raw.is_empty() {
            return Err(corrupt("empty entry"));
        }
        if prev.is_some_and(|p| p >= (key, raw)) {
            return Err(corrupt("entries out of order"));
        }
        prev = Some((key, raw));
        let actual = index.key_for(raw).map_err(|_| corrupt("token has no key"))?;
        if actual.as_str() != key {
            return Err(corrupt(&format!("{raw:?} encodes to {actual}, filed under {key}")));
        }
        index.insert_keyed(
            key.to_string(),
            raw.to_string(),
            TokenStats {
                count,
                first_seen: None,
            },
        );
    }
    Ok(index)
}

fn apply_meta(index: &mut PhoneticIndex, text: &str) -> Result<()> {
    let header = text.lines().next().unwrap_or("");
    let parts = parse_header(header, META_MAGIC, 3)?;
    if parse_level(parts[2])? != index.level {
        return Err(Error::CorruptFile("sidecar level differs from index".into()));
    }
    let body = verify_checksum(text)?;
    for line in body.lines().skip(1) {
        let corrupt = || Error::CorruptFile(format!("bad sidecar line {line:?}"));
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["documents", n] => index.document_count = n.parse().map_err(|_| corrupt())?,
            ["seen", raw, ts] => {
                let t = DateTime::parse_from_rfc3339(ts).map_err(|_| corrupt())?;
                let key = index.key_for(raw).map_err(|_| corrupt())?;
                let stats = index
                    .buckets
                    .get_mut(key.as_str())
                    .and_then(|b| b.get_mut(*raw))
                    .ok_or_else(corrupt)?;
                stats.first_seen = Some(t.with_timezone(&Utc));
            }
            _ => return Err(corrupt()),
        }
    }
    Ok(())
}

/// Reads an index written by [`save`]. The sidecar is optional; when absent
/// the document count is zero and no first-seen times are known.
pub fn load(path: impl AsRef<Path>, encoder: Arc<EncoderConfig>) -> Result<PhoneticIndex> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::CorruptFile("not UTF-8".into()))?;
    let mut index = from_index_string(&text, encoder)?;
    match fs::read(meta_path(path)) {
        Ok(bytes) => {
            let meta = String::from_utf8(bytes).map_err(|_| Error::CorruptFile("sidecar not UTF-8".into()))?;
            apply_meta(&mut index, &meta)?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(e.into()),
    }
    Ok(index)
}

/// A directory holding `encoder.conf` plus one `k<level>.idx` per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexDir {
    pub encoder: Arc<EncoderConfig>,
    pub levels: BTreeMap<u8, PhoneticIndex>,
}

impl IndexDir {
    pub fn file_name(level: u8) -> String {
        format!("k{level}.idx")
    }

    pub fn get(&self, level: u8) -> Option<&PhoneticIndex> {
        self.levels.get(&level)
    }

    pub fn document_count(&self) -> u64 {
        self.levels
            .values()
            .map(|i| i.stats().document_count)
            .max()
            .unwrap_or(0)
    }
}

pub fn save_dir(dir: impl AsRef<Path>, indexes: &IndexDir) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join(ENCODER_FILE), indexes.encoder.to_config_string().as_bytes())?;
    for (level, index) in &indexes.levels {
        save(index, dir.join(IndexDir::file_name(*level)))?;
    }
    Ok(())
}

/// Loads every `k<level>.idx` in `dir`. A missing `encoder.conf` means the
/// default encoder.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<IndexDir> {
    let dir = dir.as_ref();
    let conf = dir.join(ENCODER_FILE);
    let encoder = Arc::new(if conf.exists() {
        EncoderConfig::from_file(&conf)?
    } else {
        EncoderConfig::default()
    });
    let mut levels = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        let Some(level) = name
            .strip_prefix('k')
            .and_then(|s| s.strip_suffix(".idx"))
            .and_then(|s| s.parse::<u8>().ok())
        else {
            continue;
        };
        levels.insert(level, load(dir.join(&name), encoder.clone())?);
    }
    if levels.is_empty() {
        return Err(Error::CorruptFile(format!("no index files in {}", dir.display())));
    }
    Ok(IndexDir { encoder, levels })
}
