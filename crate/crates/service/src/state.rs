use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, SystemTime};

use parking_lot::{Mutex, RwLock};
use pertext_core::analytics::SentimentLexicon;
use pertext_core::corpus::{open_corpus, Document};
use pertext_core::index::{load_dir, IndexDir};
use pertext_core::normalize::{CoherencyScorer, NGramModel, WordDictionary};
use pertext_core::{Error, Result};

use crate::api::FlatScorer;
use crate::cache::ResponseCache;
use crate::config::ApiConfig;

/// Artifacts that do not change on reload.
pub struct Resources {
    /// Raw wordlist lines; the dictionary is rebuilt per generation so it
    /// always uses the index's encoder.
    pub wordlist: Option<(String, Vec<String>)>,
    pub model: Option<NGramModel>,
    pub lexicon: Option<SentimentLexicon>,
    pub corpus: Vec<PathBuf>,
}

impl Resources {
    pub fn load(cfg: &ApiConfig) -> Result<Self> {
        let wordlist = match &cfg.dictionary {
            None => None,
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                let lines = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.starts_with('#'))
                    .map(String::from)
                    .collect();
                Some((p.display().to_string(), lines))
            }
        };
        Ok(Resources {
            wordlist,
            model: cfg.model.as_ref().map(NGramModel::load).transpose()?,
            lexicon: cfg.lexicon.as_ref().map(SentimentLexicon::from_file).transpose()?,
            corpus: cfg.corpus.clone(),
        })
    }

    pub fn scorer(&self) -> &dyn CoherencyScorer {
        match &self.model {
            Some(m) => m,
            None => &FlatScorer,
        }
    }
}

/// Everything a request reads, published as one immutable unit.
pub struct Generation {
    pub id: u64,
    pub index: IndexDir,
    pub dictionary: Option<WordDictionary>,
    pub corpus: Vec<Document>,
}

impl Generation {
    fn build(id: u64, index: IndexDir, res: &Resources) -> Result<Self> {
        let dictionary = match &res.wordlist {
            None => None,
            Some((source, lines)) => {
                let mut levels: BTreeSet<u8> = index.levels.keys().copied().collect();
                levels.insert(1);
                let levels: Vec<u8> = levels.into_iter().collect();
                Some(WordDictionary::build(lines, &levels, index.encoder.clone(), source.clone())?.0)
            }
        };
        let mut corpus = Vec::new();
        for p in &res.corpus {
            for item in open_corpus(p)? {
                match item {
                    Ok(d) => corpus.push(d),
                    Err(Error::MalformedDocument { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(Generation {
            id,
            index,
            dictionary,
            corpus,
        })
    }
}

pub struct AppState {
    pub token: Option<String>,
    pub index_dir: PathBuf,
    pub ui_dir: Option<PathBuf>,
    pub resources: Resources,
    pub cache: ResponseCache,
    current: RwLock<Arc<Generation>>,
    reload_lock: Mutex<u64>,
}

impl AppState {
    pub fn new(cfg: &ApiConfig, index: IndexDir, resources: Resources) -> Result<Self> {
        let generation = Generation::build(0, index, &resources)?;
        Ok(AppState {
            token: cfg.token.clone(),
            index_dir: cfg.index_dir.clone(),
            ui_dir: cfg.ui_dir.clone(),
            cache: ResponseCache::new(cfg.cache_capacity),
            resources,
            current: RwLock::new(Arc::new(generation)),
            reload_lock: Mutex::new(0),
        })
    }

    /// Loads every artifact named by the config.
    pub fn from_config(cfg: &ApiConfig) -> Result<Self> {
        let index = load_dir(&cfg.index_dir)?;
        if index.levels.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "no index files in {}",
                cfg.index_dir.display()
            )));
        }
        Self::new(cfg, index, Resources::load(cfg)?)
    }

    pub fn current(&self) -> Arc<Generation> {
        self.current.read().clone()
    }

    /// Loads `dir` and publishes it as a new generation. On any failure the
    /// serving generation is left untouched.
    pub fn reload_index(&self, dir: &Path) -> Result<u64> {
        let mut last = self.reload_lock.lock();
        let index = load_dir(dir)?;
        if index.levels.is_empty() {
            return Err(Error::InvalidConfig(format!("no index files in {}", dir.display())));
        }
        let id = *last + 1;
        let generation = Arc::new(Generation::build(id, index, &self.resources)?);
        *self.current.write() = generation;
        *last = id;
        self.cache.retain_generation(id);
        tracing::info!(generation = id, dir = %dir.display(), "index reloaded");
        Ok(id)
    }
}

/// Names, sizes and modification times of the files in `dir`.
fn dir_signature(dir: &Path) -> Vec<(String, u64, Option<SystemTime>)> {
    let mut sig: Vec<_> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .filter_map(|e| {
            let meta = e.metadata().ok()?;
            Some((
                e.file_name().to_string_lossy().into_owned(),
                meta.len(),
                meta.modified().ok(),
            ))
        })
        .collect();
    sig.sort();
    sig
}

/// Polls the index directory and reloads when its files change.
pub fn spawn_watcher(state: Arc<AppState>, every: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut seen = dir_signature(&state.index_dir);
        let mut tick = tokio::time::interval(every);
        tick.tick().await;
        loop {
            tick.tick().await;
            let sig = dir_signature(&state.index_dir);
            if sig == seen {
                continue;
            }
            seen = sig;
            let st = state.clone();
            let outcome = tokio::task::spawn_blocking(move || st.reload_index(&st.index_dir)).await;
            if let Ok(Err(e)) = outcome {
                tracing::warn!(code = e.code(), error = %e, "reload failed; keeping the serving index");
            }
        }
    })
}
