//! Text kernel: tokenization, visual canonicalization, the level-`k`
//! phonetic encoder and edit distance.

mod canon;
mod config;
mod distance;
mod soundex;
mod tokenize;

pub use canon::{canonicalize, casefold};
pub use config::EncoderConfig;
pub use distance::{levenshtein, within_distance};
pub use soundex::{encode, SoundexKey};
pub use tokenize::{is_word, tokenize, TokenSpan};
