use serde::Serialize;

use super::{canonicalize, EncoderConfig};

/// One token located in its source text by byte offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenSpan {
    pub raw: String,
    pub start: usize,
    pub end: usize,
    pub is_word: bool,
}

/// Characters that may join a run anywhere but are trimmed off its edges.
fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Characters accepted only between two core characters.
fn is_inner_only(c: char) -> bool {
    matches!(c, '.' | '_')
}

fn is_core(c: char, config: &EncoderConfig) -> bool {
    c.is_alphanumeric() || config.is_visual_symbol(c)
}

/// Visual symbols that read as punctuation when they end or start a run
/// ("wow!", "|quote|").
fn is_edge_punct(c: char) -> bool {
    is_joiner(c) || matches!(c, '!' | '|' | '+')
}

/// Splits text into maximal runs of letters, digits and perturbation
/// symbols. Hyphens and apostrophes may appear inside a token; periods and
/// underscores only between two token characters.
pub fn tokenize(text: &str, config: &EncoderConfig) -> Vec<TokenSpan> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !(is_core(c, config) || is_joiner(c)) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() {
            let c = chars[j].1;
            let inner = is_inner_only(c)
                && j > run_start
                && is_core(chars[j - 1].1, config)
                && chars.get(j + 1).is_some_and(|&(_, n)| is_core(n, config));
            if !(is_core(c, config) || is_joiner(c) || inner) {
                break;
            }
            j += 1;
        }
        let mut lo = run_start;
        let mut hi = j;
        while lo < hi && is_edge_punct(chars[lo].1) && !chars[lo].1.is_alphanumeric() {
            lo += 1;
        }
        while hi > lo && is_edge_punct(chars[hi - 1].1) && !chars[hi - 1].1.is_alphanumeric() {
            hi -= 1;
        }
        if lo < hi {
            let start = chars[lo].0;
            let end = chars.get(hi).map_or(text.len(), |&(b, _)| b);
            let raw = &text[start..end];
            spans.push(TokenSpan {
                raw: raw.to_string(),
                start,
                end,
                is_word: is_word(raw, config),
            });
        }
        i = j;
    }
    spans
}

/// A word has at least one written letter and keeps one after
/// canonicalization; runs of digits and symbols alone are not words.
pub fn is_word(raw: &str, config: &EncoderConfig) -> bool {
    raw.chars().any(char::is_alphabetic) && canonicalize(raw, config).chars().any(char::is_alphabetic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raws(text: &str) -> Vec<String> {
        tokenize(text, &EncoderConfig::default())
            .into_iter()
            .map(|s| s.raw)
            .collect()
    }

    #[test]
    fn caption_sentence() {
        assert_eq!(raws("the dirrty republicans"), ["the", "dirrty", "republicans"]);
    }

    #[test]
    fn empty_text() {
        assert!(raws("").is_empty());
        assert!(raws("  ,;  ").is_empty());
    }

    #[test]
    fn trailing_period_excluded() {
        assert_eq!(raws("Thinking about suic1de."), ["Thinking", "about", "suic1de"]);
    }

    #[test]
    fn perturbation_symbols_stay_inside() {
        assert_eq!(
            raws("thee dirty repubLIEcans, republic@@ns!"),
            ["thee", "dirty", "repubLIEcans", "republic@@ns"]
        );
        assert_eq!(
            raws("mus-lim vac-cine 'quoted' sh!t"),
            ["mus-lim", "vac-cine", "quoted", "sh!t"]
        );
        assert_eq!(raws("wait...what d.e.m"), ["wait", "what", "d.e.m"]);
    }

    #[test]
    fn offsets_and_word_flag() {
        let spans = tokenize("a 2020 $$ héllo", &EncoderConfig::default());
        assert_eq!(spans.len(), 4);
        assert_eq!((spans[0].start, spans[0].end), (0, 1));
        assert!(spans[0].is_word);
        assert!(!spans[1].is_word);
        assert!(!spans[2].is_word);
        assert_eq!(&"a 2020 $$ héllo"[spans[3].start..spans[3].end], "héllo");
        assert!(spans[3].is_word);
    }
}
