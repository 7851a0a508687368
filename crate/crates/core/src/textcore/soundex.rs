use std::fmt;

use serde::{Serialize, Serializer};

use super::{canonicalize, EncoderConfig};
use crate::error::{Error, Result};

/// Phonetic key of a token at level `k`: `k + 1` literal leading letters
/// followed by at least `min_digits` consonant-group digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SoundexKey {
    level: u8,
    text: String,
}

impl SoundexKey {
    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Wraps a stored key. Only the digit tail is checked; prefixes may hold
    /// non-ASCII letters that lack an ASCII base.
    pub fn from_parts(level: u8, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        let prefix_len = usize::from(level) + 1;
        let chars: Vec<char> = text.chars().collect();
        if chars.len() < prefix_len + 1 || !chars[prefix_len..].iter().all(char::is_ascii_digit) {
            return Err(Error::InvalidParameter(format!("{text:?} is not a level-{level} key")));
        }
        Ok(SoundexKey { level, text })
    }

    /// Digit tail after the literal prefix.
    pub fn digits(&self) -> &str {
        let prefix_bytes: usize = self
            .text
            .chars()
            .take(usize::from(self.level) + 1)
            .map(char::len_utf8)
            .sum();
        &self.text[prefix_bytes..]
    }
}

impl fmt::Display for SoundexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for SoundexKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

/// Canonical letters with runs of the same letter collapsed to one.
fn phonetic_letters(raw: &str, config: &EncoderConfig) -> Vec<char> {
    let mut letters: Vec<char> = Vec::new();
    for c in canonicalize(raw, config).chars().filter(|c| c.is_alphabetic()) {
        if letters.last() != Some(&c) {
            letters.push(c);
        }
    }
    letters
}

fn upper_one(c: char) -> char {
    let mut up = c.to_uppercase();
    match (up.next(), up.next()) {
        (Some(u), None) => u,
        _ => c,
    }
}

/// Encodes `raw` at phonetic level `k`.
///
/// Repeated letters are collapsed before the prefix is taken, so
/// "porrrrn" and "porn" (or "tthe" and "the") always share a key.
pub fn encode(raw: &str, k: u8, config: &EncoderConfig) -> Result<SoundexKey> {
    let letters = phonetic_letters(raw, config);
    if letters.is_empty() {
        return Err(Error::EmptyToken(raw.to_string()));
    }
    let prefix_len = usize::from(k) + 1;
    let mut text = String::with_capacity(prefix_len + config.min_digits() + 4);
    for i in 0..prefix_len {
        text.push(letters.get(i).map_or('0', |&c| upper_one(c)));
    }

    let mut last = None;
    let mut digits = 0;
    for &c in letters.iter().skip(prefix_len) {
        let d = config.digit_for(c).unwrap_or('0');
        if Some(d) != last {
            if d != '0' {
                text.push(d);
                digits += 1;
            }
            last = Some(d);
        }
    }
    for _ in digits..config.min_digits() {
        text.push('0');
    }
    Ok(SoundexKey { level: k, text })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(raw: &str, k: u8) -> String {
        encode(raw, k, &EncoderConfig::default()).unwrap().text
    }

    #[test]
    fn caption_rows() {
        assert_eq!(key("the", 1), "TH000");
        assert_eq!(key("thee", 1), "TH000");
        assert_eq!(key("dirty", 1), "DI630");
        assert_eq!(key("dirrrty", 1), "DI630");
        assert_eq!(key("dirrty", 1), "DI630");
    }

    #[test]
    fn fixed_first_letter_collision_and_split() {
        assert_eq!(key("lesbian", 0), "L215");
        assert_eq!(key("losbian", 0), "L215");
        let le = encode("lesbian", 1, &EncoderConfig::default()).unwrap();
        let lo = encode("losbian", 1, &EncoderConfig::default()).unwrap();
        assert_ne!(le, lo);
        assert_eq!(le.digits(), lo.digits());
    }

    #[test]
    fn republicans_variants_share_a_key() {
        let k = key("republicans", 1);
        assert_eq!(key("repubLIEcans", 1), k);
        assert_eq!(key("republic@@ns", 1), k);
        // digit tail is not truncated
        assert!(k.len() > 5);
    }

    #[test]
    fn repetitions_collapse() {
        assert_eq!(key("porn", 0), key("porrrrn", 0));
        assert_eq!(key("tthe", 1), key("the", 1));
    }

    #[test]
    fn short_tokens_are_padded() {
        assert_eq!(key("a", 1), "A0000");
        assert_eq!(key("ur", 2), "UR0000");
    }

    #[test]
    fn empty_token_rejected() {
        assert!(matches!(
            encode("2%&69", 1, &EncoderConfig::default()),
            Err(Error::EmptyToken(_))
        ));
        assert!(matches!(
            encode("", 0, &EncoderConfig::default()),
            Err(Error::EmptyToken(_))
        ));
    }

    #[test]
    fn from_parts_validates_digit_tail() {
        assert!(SoundexKey::from_parts(1, "TH000").is_ok());
        assert!(SoundexKey::from_parts(1, "TH").is_err());
        assert!(SoundexKey::from_parts(1, "THE00").is_err());
    }
}
