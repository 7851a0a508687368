use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::EncoderConfig;

/// Lowercases `raw`, folds visual look-alikes onto letters, drops
/// intra-token separators and reduces accented letters to their ASCII base.
///
/// Idempotent: every emitted character is a fixed point of the same rules.
pub fn canonicalize(raw: &str, config: &EncoderConfig) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        if let Some(t) = config.visual_target(c) {
            out.push(t);
            continue;
        }
        for lower in c.to_lowercase() {
            push_lowered(lower, config, &mut out);
        }
    }
    out
}

fn push_lowered(c: char, config: &EncoderConfig, out: &mut String) {
    if config.is_strip_char(c) {
        return;
    }
    if let Some(t) = config.visual_target(c) {
        out.push(t);
        return;
    }
    if c.is_ascii() {
        out.push(c);
        return;
    }
    let base: String = c.nfd().filter(|&m| !is_combining_mark(m)).collect();
    if base.is_empty() {
        // a bare combining mark
        return;
    }
    if base.is_ascii() {
        for b in base.chars() {
            push_lowered(b.to_ascii_lowercase(), config, out);
        }
    } else {
        out.push(c);
    }
}

/// Lowercase form used for edit-distance comparisons.
pub fn casefold(s: &str) -> String {
    s.to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(s: &str) -> String {
        canonicalize(s, &EncoderConfig::default())
    }

    #[test]
    fn visual_symbols_fold_to_letters() {
        assert_eq!(canon("republic@@ns"), "republicaans");
        assert_eq!(canon("suic1de"), "suiclde");
        assert_eq!(canon("$5"), "ss");
    }

    #[test]
    fn clean_words_are_fixed_points() {
        assert_eq!(canon("democrats"), "democrats");
        assert_eq!(canon("DemocRATs"), "democrats");
    }

    #[test]
    fn separators_are_stripped() {
        assert_eq!(canon("mus-lim"), "muslim");
        assert_eq!(canon("d.o.n'_t"), "dont");
    }

    #[test]
    fn accents_reduce_to_ascii_base() {
        assert_eq!(canon("répub"), "repub");
        assert_eq!(canon("ÉCOLE"), "ecole");
        // no ASCII decomposition: kept as-is (lowercased)
        assert_eq!(canon("Ωmega"), "ωmega");
    }

    #[test]
    fn idempotent_on_tricky_inputs() {
        for s in ["İstanbul", "a\u{0301}", "Straße", "ﬁne", "x̧y", "1|!0@4$53+78"] {
            let once = canon(s);
            assert_eq!(canon(&once), once, "input {s:?}");
        }
    }
}
