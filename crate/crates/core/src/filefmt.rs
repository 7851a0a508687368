//! Framing shared by the index and language-model files: a trailing
//! `#CHECKSUM<TAB><16-hex FNV-1a>` line over every preceding byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hash::{fnv1a64, hex16};

const CHECKSUM_TAG: &str = "#CHECKSUM\t";

pub(crate) fn with_checksum(mut body: String) -> String {
    let sum = hex16(fnv1a64(body.as_bytes()));
    let _ = writeln!(body, "{CHECKSUM_TAG}{sum}");
    body
}

/// Splits off and verifies the checksum trailer, returning the body.
pub(crate) fn verify_checksum(text: &str) -> Result<&str> {
    let trimmed = text.strip_suffix('\n').unwrap_or(text);
    let cut = trimmed.rfind('\n').map_or(0, |i| i + 1);
    let (body, trailer) = trimmed.split_at(cut);
    let expected = trailer
        .strip_prefix(CHECKSUM_TAG)
        .ok_or_else(|| Error::CorruptFile("missing checksum trailer".into()))?;
    let actual = hex16(fnv1a64(body.as_bytes()));
    if expected != actual {
        return Err(Error::CorruptFile(format!(
            "checksum mismatch: recorded {expected}, computed {actual}"
        )));
    }
    Ok(body)
}

pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
