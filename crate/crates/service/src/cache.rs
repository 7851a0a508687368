use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};

use bytes::Bytes;
use lru::LruCache;
use parking_lot::Mutex;
use serde::Serialize;

/// Route, canonical parameters, index generation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub route: &'static str,
    pub params: String,
    pub generation: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CacheMetrics {
    pub capacity: usize,
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
}

/// LRU map of response bodies. A capacity of zero stores nothing.
pub struct ResponseCache {
    capacity: usize,
    map: Option<Mutex<LruCache<CacheKey, Bytes>>>,
    hits: AtomicU64,
    misses: AtomicU64,
    evictions: AtomicU64,
}

impl ResponseCache {
    pub fn new(capacity: usize) -> Self {
        ResponseCache {
            capacity,
            map: NonZeroUsize::new(capacity).map(|c| Mutex::new(LruCache::new(c))),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            evictions: AtomicU64::new(0),
        }
    }

    pub fn get(&self, key: &CacheKey) -> Option<Bytes> {
        let found = self.map.as_ref().and_then(|m| m.lock().get(key).cloned());
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn put(&self, key: CacheKey, body: Bytes) {
        if let Some(m) = &self.map {
            let mut m = m.lock();
            if !m.contains(&key) && m.len() == m.cap().get() {
                self.evictions.fetch_add(1, Ordering::Relaxed);
            }
            m.put(key, body);
        }
    }

    /// Drops every entry not belonging to `generation`.
    pub fn retain_generation(&self, generation: u64) {
        if let Some(m) = &self.map {
            let mut m = m.lock();
            let stale: Vec<CacheKey> = m
                .iter()
                .filter(|(k, _)| k.generation != generation)
                .map(|(k, _)| k.clone())
                .collect();
            for k in stale {
                m.pop(&k);
            }
        }
    }

    pub fn metrics(&self) -> CacheMetrics {
        CacheMetrics {
            capacity: self.capacity,
            entries: self.map.as_ref().map_or(0, |m| m.lock().len()),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            evictions: self.evictions.load(Ordering::Relaxed),
        }
    }
}
