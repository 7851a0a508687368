use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use pertext_core::{Error, Result};

pub const TOKEN_ENV: &str = "CRYPTEXT_API_TOKEN";
pub const DEFAULT_CACHE_CAPACITY: usize = 1024;

/// Service settings, read from a `key = value` file. Blank lines and lines
/// starting with `#` are ignored. Relative paths resolve against the
/// directory holding the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiConfig {
    pub bind: SocketAddr,
    /// `None` serves without authentication.
    pub token: Option<String>,
    /// Zero disables the response cache.
    pub cache_capacity: usize,
    pub index_dir: PathBuf,
    pub dictionary: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub corpus: Vec<PathBuf>,
    pub ui_dir: Option<PathBuf>,
    /// Seconds between checks of the index directory; 0 turns polling off.
    pub watch_interval_secs: u64,
}

impl ApiConfig {
    pub fn new(index_dir: impl Into<PathBuf>) -> Self {
        ApiConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            token: None,
            cache_capacity: DEFAULT_CACHE_CAPACITY,
            index_dir: index_dir.into(),
            dictionary: None,
            model: None,
            lexicon: None,
            corpus: Vec::new(),
            ui_dir: None,
            watch_interval_secs: 0,
        }
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut index_dir = None;
        let mut cfg = ApiConfig::new(PathBuf::new());
        let path = |v: &str| base.join(v);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!("line {}: expected key = value", n + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::InvalidConfig(format!("line {}: invalid {what} {value:?}", n + 1));
            match key {
                "bind" => cfg.bind = value.parse().map_err(|_| bad("bind address"))?,
                "token" => cfg.token = Some(value.to_string()).filter(|t| !t.is_empty()),
                "cache_capacity" => cfg.cache_capacity = value.parse().map_err(|_| bad("cache capacity"))?,
                "index_dir" => index_dir = Some(path(value)),
                "dictionary" => cfg.dictionary = Some(path(value)),
                "model" => cfg.model = Some(path(value)),
                "lexicon" => cfg.lexicon = Some(path(value)),
                "corpus" => cfg
                    .corpus
                    .extend(value.split(',').map(str::trim).filter(|p| !p.is_empty()).map(path)),
                "ui_dir" => cfg.ui_dir = Some(path(value)),
                "watch_interval_secs" => cfg.watch_interval_secs = value.parse().map_err(|_| bad("interval"))?,
                other => return Err(Error::InvalidConfig(format!("line {}: unknown key {other:?}", n + 1))),
            }
        }
        cfg.index_dir = index_dir.ok_or_else(|| Error::InvalidConfig("index_dir is required".into()))?;
        Ok(cfg)
    }

    /// Reads the file, then lets `CRYPTEXT_API_TOKEN` override the token.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text, path.parent().unwrap_or(Path::new(".")))?;
        if let Ok(token) = std::env::var(TOKEN_ENV) {
            cfg.token = Some(token).filter(|t| !t.is_empty());
        }
        Ok(cfg)
    }
}
