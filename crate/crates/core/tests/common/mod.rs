#![allow(dead_code)]

use std::collections::HashMap;

/// Reference edit distance: memoized recursion over suffixes, kept apart
/// from the library's table-based routes.
pub fn oracle_distance(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&v) = memo.get(&(a.len(), b.len())) {
            return v;
        }
        let v = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo)
                .min(go(a, &b[1..], memo))
                .min(go(&a[1..], &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), v);
        v
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    go(&a, &b, &mut HashMap::new())
}

pub const CAPTION: [&str; 3] = [
    "the dirrty republicans",
    "thee dirty repubLIEcans",
    "the dirty republic@@ns",
];
