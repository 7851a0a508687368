use std::collections::BTreeMap;
use std::str::FromStr;

use percent_encoding::percent_decode;

use crate::error::ApiError;

/// Decoded query-string pairs. Decoding is strict: malformed UTF-8,
/// repeated keys and keys the route does not know are rejected.
#[derive(Debug, Default)]
pub struct QueryParams(BTreeMap<String, String>);

fn decode(part: &str) -> Result<String, ApiError> {
    let spaced = part.replace('+', " ");
    percent_decode(spaced.as_bytes())
        .decode_utf8()
        .map(|s| s.into_owned())
        .map_err(|_| ApiError::bad_request("query string is not valid UTF-8"))
}

impl QueryParams {
    pub fn parse(raw: Option<&str>) -> Result<Self, ApiError> {
        let mut map = BTreeMap::new();
        for pair in raw.unwrap_or("").split('&').filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
            let key = decode(k)?;
            if map.insert(key.clone(), decode(v)?).is_some() {
                return Err(ApiError::bad_request(format!("parameter {key:?} given more than once")));
            }
        }
        Ok(QueryParams(map))
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    pub fn require(&mut self, key: &str) -> Result<String, ApiError> {
        self.take_str(key)
            .ok_or_else(|| ApiError::bad_request(format!("missing parameter {key:?}")))
    }

    pub fn take<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, ApiError> {
        match self.0.remove(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| ApiError::bad_request(format!("invalid value {v:?} for {key:?}"))),
        }
    }

    /// Call after every known key has been taken.
    pub fn finish(self) -> Result<(), ApiError> {
        match self.0.into_keys().next() {
            None => Ok(()),
            Some(k) => Err(ApiError::bad_request(format!("unknown parameter {k:?}"))),
        }
    }
}
