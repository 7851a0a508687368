use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hash::{fnv1a64, hex16};

/// Rules for canonicalizing and encoding tokens.
///
/// The default table uses the classical Soundex consonant groups and a
/// visual map that folds common look-alike symbols back onto letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderConfig {
    visual_map: BTreeMap<char, char>,
    digit_groups: BTreeMap<char, char>,
    skip_set: BTreeSet<char>,
    strip_chars: BTreeSet<char>,
    min_digits: usize,
}

const DEFAULT_VISUAL: &[(char, char)] = &[
    ('1', 'l'),
    ('!', 'i'),
    ('|', 'l'),
    ('0', 'o'),
    ('@', 'a'),
    ('4', 'a'),
    ('$', 's'),
    ('5', 's'),
    ('3', 'e'),
    ('7', 't'),
    ('8', 'b'),
    ('+', 't'),
];

const DEFAULT_GROUPS: &[(&str, char)] = &[
    ("bfpv", '1'),
    ("cgjkqsxz", '2'),
    ("dt", '3'),
    ("l", '4'),
    ("mn", '5'),
    ("r", '6'),
];

const DEFAULT_SKIP: &str = "aeiouhwy";
const DEFAULT_STRIP: &[char] = &['-', '\'', '.', '_'];

impl Default for EncoderConfig {
    fn default() -> Self {
        let digit_groups = DEFAULT_GROUPS
            .iter()
            .flat_map(|(letters, d)| letters.chars().map(move |c| (c, *d)))
            .collect();
        EncoderConfig {
            visual_map: DEFAULT_VISUAL.iter().copied().collect(),
            digit_groups,
            skip_set: DEFAULT_SKIP.chars().collect(),
            strip_chars: DEFAULT_STRIP.iter().copied().collect(),
            min_digits: 3,
        }
    }
}

impl EncoderConfig {
    pub fn new(
        visual_map: BTreeMap<char, char>,
        digit_groups: BTreeMap<char, char>,
        skip_set: BTreeSet<char>,
        strip_chars: BTreeSet<char>,
        min_digits: usize,
    ) -> Result<Self> {
        let cfg = EncoderConfig {
            visual_map,
            digit_groups,
            skip_set,
            strip_chars,
            min_digits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for (&src, &dst) in &self.visual_map {
            if !dst.is_ascii_lowercase() {
                return Err(Error::InvalidConfig(format!(
                    "visual_map target for {src:?} must be a lowercase letter, got {dst:?}"
                )));
            }
            if self.visual_map.contains_key(&dst) {
                return Err(Error::InvalidConfig(format!(
                    "visual_map target {dst:?} is also a source"
                )));
            }
            if self.strip_chars.contains(&src) {
                return Err(Error::InvalidConfig(format!(
                    "{src:?} is both a visual_map source and a strip character"
                )));
            }
        }
        for (&letter, &digit) in &self.digit_groups {
            if !letter.is_ascii_lowercase() {
                return Err(Error::InvalidConfig(format!(
                    "digit group member {letter:?} is not a lowercase letter"
                )));
            }
            if !('1'..='9').contains(&digit) {
                return Err(Error::InvalidConfig(format!(
                    "digit for {letter:?} must be in 1-9, got {digit:?}"
                )));
            }
            if self.skip_set.contains(&letter) {
                return Err(Error::InvalidConfig(format!(
                    "{letter:?} is both in a digit group and in the skip set"
                )));
            }
        }
        for c in 'a'..='z' {
            if !self.digit_groups.contains_key(&c) && !self.skip_set.contains(&c) {
                return Err(Error::InvalidConfig(format!(
                    "letter {c:?} is neither grouped nor skipped"
                )));
            }
        }
        if let Some(c) = self.skip_set.iter().find(|c| !c.is_ascii_lowercase()) {
            return Err(Error::InvalidConfig(format!(
                "skip set member {c:?} is not a lowercase letter"
            )));
        }
        if self.min_digits == 0 {
            return Err(Error::InvalidConfig("min_digits must be at least 1".into()));
        }
        Ok(())
    }

    pub fn visual_target(&self, c: char) -> Option<char> {
        self.visual_map.get(&c).copied()
    }

    pub fn is_visual_symbol(&self, c: char) -> bool {
        self.visual_map.contains_key(&c)
    }

    pub fn is_strip_char(&self, c: char) -> bool {
        self.strip_chars.contains(&c)
    }

    /// Digit for a letter, `None` for skipped or unknown characters.
    pub fn digit_for(&self, c: char) -> Option<char> {
        self.digit_groups.get(&c).copied()
    }

    pub fn min_digits(&self) -> usize {
        self.min_digits
    }

    pub fn visual_map(&self) -> &BTreeMap<char, char> {
        &self.visual_map
    }

    /// Stable textual form; also the on-disk config file layout.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        out.push_str("[visual_map]\n");
        for (src, dst) in &self.visual_map {
            let _ = writeln!(out, "{src}={dst}");
        }
        out.push_str("[digit_groups]\n");
        let mut by_digit: BTreeMap<char, String> = BTreeMap::new();
        for (&letter, &digit) in &self.digit_groups {
            by_digit.entry(digit).or_default().push(letter);
        }
        for (digit, letters) in by_digit {
            let _ = writeln!(out, "{letters}={digit}");
        }
        out.push_str("[skip]\n");
        out.extend(self.skip_set.iter());
        out.push('\n');
        out.push_str("[strip]\n");
        out.extend(self.strip_chars.iter());
        out.push('\n');
        out.push_str("[options]\n");
        let _ = writeln!(out, "min_digits={}", self.min_digits);
        out
    }

    /// 16-hex fingerprint written into index headers.
    pub fn fingerprint(&self) -> String {
        hex16(fnv1a64(self.to_config_string().as_bytes()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses the sectioned config format. Sections absent from the text
    /// keep their defaults; a section that is present replaces the default
    /// wholesale.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq, Clone, Copy)]
        enum Section {
            None,
            Visual,
            Groups,
            Skip,
            Strip,
            Options,
        }

        let defaults = EncoderConfig::default();
        let mut visual: Option<BTreeMap<char, char>> = None;
        let mut groups: Option<BTreeMap<char, char>> = None;
        let mut skip: Option<BTreeSet<char>> = None;
        let mut strip: Option<BTreeSet<char>> = None;
        let mut min_digits = defaults.min_digits;
        let mut section = Section::None;

        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::InvalidConfig(format!("line {}: {msg}", lineno + 1));
            if trimmed.starts_with('[') && trimmed.ends_with(']') {
                section = match trimmed {
                    "[visual_map]" => {
                        visual.get_or_insert_with(BTreeMap::new);
                        Section::Visual
                    }
                    "[digit_groups]" => {
                        groups.get_or_insert_with(BTreeMap::new);
                        Section::Groups
                    }
                    "[skip]" => {
                        skip.get_or_insert_with(BTreeSet::new);
                        Section::Skip
                    }
                    "[strip]" => {
                        strip.get_or_insert_with(BTreeSet::new);
                        Section::Strip
                    }
                    "[options]" => Section::Options,
                    other => return Err(bad(&format!("unknown section {other}"))),
                };
                continue;
            }
            match section {
                Section::None => return Err(bad("entry outside of any section")),
                Section::Visual => {
                    let chars: Vec<char> = trimmed.chars().collect();
                    if chars.len() != 3 || chars[1] != '=' {
                        return Err(bad("expected `src=dst` with single characters"));
                    }
                    visual.as_mut().unwrap().insert(chars[0], chars[2]);
                }
                Section::Groups => {
                    let (letters, digit) = trimmed
                        .rsplit_once('=')
                        .ok_or_else(|| bad("expected `letters=digit`"))?;
                    let mut digits = digit.trim().chars();
                    let d = match (digits.next(), digits.next()) {
                        (Some(d), None) => d,
                        _ => return Err(bad("digit must be a single character")),
                    };
                    let map = groups.as_mut().unwrap();
                    for c in letters.trim().chars() {
                        if map.insert(c, d).is_some() {
                            return Err(bad(&format!("letter {c:?} assigned twice")));
                        }
                    }
                }
                Section::Skip => skip
                    .as_mut()
                    .unwrap()
                    .extend(trimmed.chars().filter(|c| !c.is_whitespace())),
                Section::Strip => strip
                    .as_mut()
                    .unwrap()
                    .extend(trimmed.chars().filter(|c| !c.is_whitespace())),
                Section::Options => {
                    let (key, value) = trimmed.split_once('=').ok_or_else(|| bad("expected `key=value`"))?;
                    match key.trim() {
                        "min_digits" => {
                            min_digits = value.trim().parse().map_err(|_| bad("min_digits must be an integer"))?
                        }
                        other => return Err(bad(&format!("unknown option {other}"))),
                    }
                }
            }
        }

        EncoderConfig::new(
            visual.unwrap_or(defaults.visual_map),
            groups.unwrap_or(defaults.digit_groups),
            skip.unwrap_or(defaults.skip_set),
            strip.unwrap_or(defaults.strip_chars),
            min_digits,
        )
    }
}
