//! Corpus readers. A corpus is line oriented: either one plain-text
//! document per line, or one JSON record per line carrying `text` and
//! optionally `id`, `timestamp` (RFC 3339) and `source`.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Whether the document came from a structured record, so writers can
    /// emit it back in the same shape.
    #[serde(skip)]
    pub structured: bool,
}

impl Document {
    pub fn plain(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            timestamp: None,
            source: None,
            structured: false,
        }
    }

    pub fn timestamped(id: impl Into<String>, text: impl Into<String>, ts: DateTime<Utc>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            timestamp: Some(ts.to_rfc3339()),
            source: None,
            structured: true,
        }
    }

    /// `Ok(None)` when the document carries no timestamp.
    pub fn parsed_timestamp(&self) -> Result<Option<DateTime<Utc>>> {
        self.timestamp.as_deref().map(parse_timestamp).transpose()
    }

    /// Serializes in the document's original shape (plain line or record).
    pub fn to_line(&self) -> String {
        if self.structured {
            serde_json::to_string(self).expect("document serializes")
        } else {
            self.text.clone()
        }
    }
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| Error::UnparseableTimestamp(s.to_string()))
}

/// Parses one corpus line. Blank lines yield `Ok(None)`.
pub fn parse_line(line: &str, lineno: usize) -> Result<Option<Document>> {
    let line = line.trim_end_matches(['\n', '\r']);
    if line.trim().is_empty() {
        return Ok(None);
    }
    if !line.trim_start().starts_with('{') {
        return Ok(Some(Document::plain(lineno.to_string(), line)));
    }
    let malformed = |reason: String| Error::MalformedDocument { line: lineno, reason };
    let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("record is not an object".into()))?;
    let text = obj
        .get("text")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing string field `text`".into()))?;
    let id = match obj.get("id") {
        None | Some(Value::Null) => lineno.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err(malformed("`id` must be a string or number".into())),
    };
    let opt_str = |field: &str| -> Result<Option<String>> {
        match obj.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(malformed(format!("`{field}` must be a string"))),
        }
    };
    Ok(Some(Document {
        id,
        text: text.to_string(),
        timestamp: opt_str("timestamp")?,
        source: opt_str("source")?,
        structured: true,
    }))
}

/// Streams documents out of a reader. Malformed lines (bad JSON, invalid
/// UTF-8) come out as `Err` items; the stream continues after them.
pub struct DocumentReader<R> {
    reader: R,
    lineno: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> DocumentReader<R> {
    pub fn new(reader: R) -> Self {
        DocumentReader {
            reader,
            lineno: 0,
            buf: Vec::new(),
        }
    }
}

impl<R: BufRead> Iterator for DocumentReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.lineno += 1;
            let line = match std::str::from_utf8(&self.buf) {
                Ok(s) => s,
                Err(e) => {
                    return Some(Err(Error::MalformedDocument {
                        line: self.lineno,
                        reason: format!("invalid UTF-8: {e}"),
                    }))
                }
            };
            match parse_line(line, self.lineno) {
                Ok(None) => continue,
                Ok(Some(doc)) => return Some(Ok(doc)),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub fn read_documents<R: Read>(reader: R) -> DocumentReader<BufReader<R>> {
    DocumentReader::new(BufReader::new(reader))
}

pub fn open_corpus(path: impl AsRef<Path>) -> Result<DocumentReader<BufReader<File>>> {
    Ok(read_documents(File::open(path)?))
}

/// Reads a whole in-memory corpus, returning good documents and the
/// errors for skipped lines.
pub fn documents_from_str(text: &str) -> (Vec<Document>, Vec<Error>) {
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for item in read_documents(text.as_bytes()) {
        match item {
            Ok(d) => docs.push(d),
            Err(e) => errors.push(e),
        }
    }
    (docs, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_structured_lines() {
        let text = "hello world\n\n{\"text\":\"dem0crats\",\"timestamp\":\"2021-11-02T10:00:00Z\",\"id\":7}\n";
        let (docs, errors) = documents_from_str(text);
        assert!(errors.is_empty());
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "1");
        assert!(!docs[0].structured);
        assert_eq!(docs[1].id, "7");
        assert_eq!(
            docs[1].parsed_timestamp().unwrap().unwrap().to_rfc3339(),
            "2021-11-02T10:00:00+00:00"
        );
    }

    #[test]
    fn malformed_lines_are_reported_and_skipped() {
        let mut bytes = b"{\"text\": 3}\nok line\n".to_vec();
        bytes.extend_from_slice(b"\xff\xfe bad\n{broken\nlast\n");
        let items: Vec<_> = read_documents(&bytes[..]).collect();
        assert_eq!(items.len(), 5);
        assert!(matches!(items[0], Err(Error::MalformedDocument { line: 1, .. })));
        assert_eq!(items[1].as_ref().unwrap().text, "ok line");
        assert!(matches!(items[2], Err(Error::MalformedDocument { line: 3, .. })));
        assert!(matches!(items[3], Err(Error::MalformedDocument { line: 4, .. })));
        assert_eq!(items[4].as_ref().unwrap().text, "last");
    }

    #[test]
    fn bad_timestamp_is_an_error() {
        let doc = parse_line(r#"{"text":"x","timestamp":"yesterday"}"#, 1)
            .unwrap()
            .unwrap();
        assert!(matches!(doc.parsed_timestamp(), Err(Error::UnparseableTimestamp(_))));
    }

    #[test]
    fn to_line_preserves_shape() {
        let doc = parse_line(r#"{"text":"a b","source":"reddit"}"#, 4).unwrap().unwrap();
        let again = parse_line(&doc.to_line(), 4).unwrap().unwrap();
        assert_eq!(again, doc);
        assert_eq!(Document::plain("1", "raw text").to_line(), "raw text");
    }
}
