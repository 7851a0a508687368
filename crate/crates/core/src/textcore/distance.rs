//! Levenshtein distance: a full two-row table and a banded early-exit
//! check for the common "is it within d?" question.

/// Exact character-level edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0; short.len() + 1];
    for (i, &lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let sub = prev[j] + usize::from(lc != sc);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// `levenshtein(a, b) <= d`, evaluated only inside the diagonal band of
/// width `2d + 1` and abandoned as soon as a whole band row exceeds `d`.
pub fn within_distance(a: &str, b: &str, d: usize) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();

    // shared prefix and suffix never contribute edits
    let pre = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[pre..], &b[pre..]);
    let suf = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[..a.len() - suf], &b[..b.len() - suf]);

    let (m, n) = (a.len(), b.len());
    if m.abs_diff(n) > d {
        return false;
    }
    if m.max(n) <= d {
        return true;
    }

    const FAR: usize = usize::MAX / 2;
    let mut prev = vec![FAR; n + 1];
    let mut cur = vec![FAR; n + 1];
    for (j, slot) in prev.iter_mut().enumerate().take(d.min(n) + 1) {
        *slot = j;
    }
    for i in 1..=m {
        let lo = i.saturating_sub(d).max(1);
        let hi = (i + d).min(n);
        cur[lo - 1] = if lo == 1 && i <= d { i } else { FAR };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < n {
            cur[hi + 1] = FAR;
        }
        if row_min > d {
            return false;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n] <= d
}
