use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::format::{load_dir, save_dir, IndexDir};
use super::ingest::{ingest, IngestOptions, IngestReport};
use crate::corpus::open_corpus;
use crate::error::{Error, Result};
use crate::filefmt::write_atomic;

/// Names of corpus files already folded into an index directory.
pub const INGESTED_LOG: &str = "ingested.log";

fn read_log(dir: &Path) -> Result<BTreeSet<String>> {
    match fs::read_to_string(dir.join(INGESTED_LOG)) {
        Ok(text) => Ok(text.lines().map(str::to_string).collect()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeSet::new()),
        Err(e) => Err(e.into()),
    }
}

fn log_name(path: &Path) -> String {
    fs::canonicalize(path)
        .unwrap_or_else(|_| path.to_path_buf())
        .display()
        .to_string()
}

/// Ingests `files` and merges the result into the index directory `dir`
/// (created when absent). Files already recorded in the directory's log are
/// skipped. Returns the report and the files actually ingested.
pub fn update_dir(
    dir: &Path,
    files: &[PathBuf],
    levels: &[u8],
    opts: &IngestOptions,
) -> Result<(IngestReport, Vec<PathBuf>)> {
    let existing = if dir.join(super::format::ENCODER_FILE).exists() {
        Some(load_dir(dir)?)
    } else {
        None
    };
    let mut log = read_log(dir)?;
    let fresh: Vec<PathBuf> = files.iter().filter(|p| !log.contains(&log_name(p))).cloned().collect();

    let (encoder, levels): (_, Vec<u8>) = match &existing {
        Some(ix) => (ix.encoder.clone(), ix.levels.keys().copied().collect()),
        None => (opts.encoder.clone(), levels.to_vec()),
    };
    if existing.as_ref().is_some_and(|ix| ix.encoder != opts.encoder) {
        return Err(Error::ConfigMismatch {
            expected: encoder.fingerprint(),
            found: opts.encoder.fingerprint(),
        });
    }
    let mut streams = Vec::new();
    for p in &fresh {
        streams.push(open_corpus(p)?);
    }
    let opts = IngestOptions {
        encoder: Arc::clone(&encoder),
        ..opts.clone()
    };
    let (built, report) = ingest(streams.into_iter().flatten(), &levels, &opts)?;
    let merged = match existing {
        Some(old) => {
            let mut out = old.levels.clone();
            for (k, idx) in built {
                let m = match old.levels.get(&k) {
                    Some(prev) => prev.merge(&idx)?,
                    None => idx,
                };
                out.insert(k, m);
            }
            out
        }
        None => built,
    };
    save_dir(
        dir,
        &IndexDir {
            encoder,
            levels: merged,
        },
    )?;
    log.extend(fresh.iter().map(|p| log_name(p)));
    let text: String = log.iter().map(|l| format!("{l}\n")).collect();
    write_atomic(&dir.join(INGESTED_LOG), text.as_bytes())?;
    Ok((report, fresh))
}

/// Corpus files directly inside `folder` (sorted), ignoring hidden files.
pub fn list_corpus_files(folder: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(folder)? {
        let entry = entry?;
        let name = entry.file_name();
        if entry.file_type()?.is_file() && !name.to_string_lossy().starts_with('.') {
            files.push(entry.path());
        }
    }
    files.sort();
    Ok(files)
}
