//! Look Up: the perturbation set of a token is every indexed token that
//! shares its phonetic key and lies within edit distance `d` of it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::PhoneticIndex;
use crate::textcore::{casefold, levenshtein, within_distance, SoundexKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupParams {
    pub k: u8,
    pub d: usize,
    pub case_sensitive: bool,
    pub include_query: bool,
    pub min_count: u64,
}

impl Default for LookupParams {
    fn default() -> Self {
        LookupParams {
            k: 1,
            d: 3,
            case_sensitive: false,
            include_query: true,
            min_count: 1,
        }
    }
}

impl LookupParams {
    pub fn with_kd(k: u8, d: usize) -> Self {
        LookupParams {
            k,
            d,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Member {
    pub raw: String,
    pub count: u64,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerturbationSet {
    #[serde(rename = "token")]
    pub query: String,
    pub key: SoundexKey,
    pub members: Vec<Member>,
}

impl PerturbationSet {
    pub fn raws(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.raw.as_str())
    }

    pub fn contains(&self, raw: &str) -> bool {
        self.members.iter().any(|m| m.raw == raw)
    }
}

pub fn lookup(index: &PhoneticIndex, x: &str, params: &LookupParams) -> Result<PerturbationSet> {
    select(index, x, params, |_| true)
}

/// [`lookup`] minus the query itself; in case-insensitive mode members that
/// differ from the query only by case are dropped as well.
pub fn perturbations_only(index: &PhoneticIndex, x: &str, params: &LookupParams) -> Result<PerturbationSet> {
    let params = LookupParams {
        include_query: false,
        ..*params
    };
    let folded = casefold(x);
    select(index, x, &params, |raw| {
        params.case_sensitive || casefold(raw) != folded
    })
}

fn select(
    index: &PhoneticIndex,
    x: &str,
    params: &LookupParams,
    keep: impl Fn(&str) -> bool,
) -> Result<PerturbationSet> {
    if params.k != index.level() {
        return Err(Error::LevelMismatch {
            expected: index.level(),
            actual: params.k,
        });
    }
    let key = index.key_for(x)?;
    let fold = |s: &str| {
        if params.case_sensitive {
            s.to_string()
        } else {
            casefold(s)
        }
    };
    let query = fold(x);
    let mut members: Vec<Member> = index
        .bucket_ref(key.as_str())
        .into_iter()
        .flat_map(|b| b.iter())
        .filter(|(raw, stats)| {
            stats.count >= params.min_count && (params.include_query || raw.as_str() != x) && keep(raw)
        })
        .filter_map(|(raw, stats)| {
            let candidate = fold(raw);
            within_distance(&query, &candidate, params.d).then(|| Member {
                raw: raw.clone(),
                count: stats.count,
                distance: levenshtein(&query, &candidate),
            })
        })
        .collect();
    members.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.distance.cmp(&b.distance))
            .then_with(|| a.raw.cmp(&b.raw))
    });
    Ok(PerturbationSet {
        query: x.to_string(),
        key,
        members,
    })
}
