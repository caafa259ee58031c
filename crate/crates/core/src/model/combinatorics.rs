//! Counting and lexicographic (un)ranking of node multisets.
//!
//! A multiset of size `m` over `n` nodes is represented by its sorted node tuple
//! (0-based). Multisets of one size are ordered lexicographically by that tuple, so
//! index 0 is `(0, 0, .., 0)` and the last index is `(n-1, .., n-1)`.

use crate::{Error, Result};

/// Largest hyperedge cardinality for which `|e|!` fits in a `u64`.
pub const MAX_FACTORIAL: usize = 20;

pub fn factorial(m: usize) -> u64 {
    (1..=m as u64).product()
}

/// `C(n, k)`, or `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of multisets of size `m` drawn from `n` values: `C(n + m - 1, m)`.
pub fn multiset_count(n: u64, m: u64) -> Option<u64> {
    if n == 0 {
        return Some(u64::from(m == 0));
    }
    binomial(n + m - 1, m)
}

/// `b_e = |e|! / Π_k a_{ek}!`, the number of distinct orderings of a hyperedge given
/// its node multiplicities.
pub fn ordering_count(multiplicities: &[usize]) -> Result<u64> {
    let size: usize = multiplicities.iter().sum();
    if !(2..=MAX_FACTORIAL).contains(&size) {
        return Err(Error::EdgeSize {
            size,
            max: MAX_FACTORIAL,
        });
    }
    // multinomial built as a product of binomials to avoid dividing large factorials
    let mut acc = 1u64;
    let mut placed = 0u64;
    for &a in multiplicities {
        placed += a as u64;
        acc *= binomial(placed, a as u64).expect("size <= 20 cannot overflow");
    }
    Ok(acc)
}

/// Multiplicities of a sorted node tuple, in order of first appearance.
pub fn run_lengths(sorted: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

fn count_or_overflow(n: u64, m: u64) -> Result<u64> {
    multiset_count(n, m).ok_or_else(|| {
        Error::InvalidParams(format!("C({n}+{m}-1, {m}) overflows a 64-bit index"))
    })
}

/// Lexicographic rank of a sorted multiset of size `m = sorted.len()` over `n` values.
pub fn rank_multiset(sorted: &[usize], n: usize) -> Result<u64> {
    let m = sorted.len() as u64;
    let n64 = n as u64;
    let mut rank = 0u64;
    let mut lo = 0u64;
    for (t, &v) in sorted.iter().enumerate() {
        let v = v as u64;
        if v >= n64 || v < lo {
            return Err(Error::InvalidParams(format!(
                "multiset {sorted:?} is not sorted over {n} nodes"
            )));
        }
        let r = m - t as u64;
        // multisets whose element at position t is in [lo, v)
        rank += count_or_overflow(n64 - lo, r)? - count_or_overflow(n64 - v, r)?;
        lo = v;
    }
    Ok(rank)
}

/// The `index`-th multiset of size `m` over `n` values in lexicographic order.
pub fn unrank_multiset(index: u64, n: usize, m: usize) -> Result<Vec<usize>> {
    let n64 = n as u64;
    let total = count_or_overflow(n64, m as u64)?;
    if index >= total {
        return Err(Error::IndexOutOfRange {
            index,
            count: total,
        });
    }
    let mut out = Vec::with_capacity(m);
    let mut rem = index;
    let mut lo = 0u64;
    for t in 0..m {
        let r = (m - t) as u64;
        let all = count_or_overflow(n64 - lo, r)?;
        // largest v in [lo, n) with all - count(n - v, r) <= rem
        let (mut a, mut b) = (lo, n64 - 1);
        while a < b {
            let mid = a + (b - a).div_ceil(2);
            if all - count_or_overflow(n64 - mid, r)? <= rem {
                a = mid;
            } else {
                b = mid - 1;
            }
        }
        rem -= all - count_or_overflow(n64 - a, r)?;
        out.push(a as usize);
        lo = a;
    }
    Ok(out)
}

/// Calls `f` on every sorted multiset of size `m` over `n` values, in lexicographic
/// order.
pub fn for_each_multiset(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        if m == 0 {
            f(&[]);
        }
        return;
    }
    let mut cur = vec![0usize; m];
    loop {
        f(&cur);
        // advance: rightmost position that can still grow
        let Some(pos) = (0..m).rev().find(|&p| cur[p] + 1 < n) else {
            return;
        };
        let next = cur[pos] + 1;
        for slot in &mut cur[pos..] {
            *slot = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ordering_count_examples() {
        assert_eq!(ordering_count(&run_lengths(&[2, 6])).unwrap(), 2);
        assert_eq!(ordering_count(&run_lengths(&[1, 3, 8])).unwrap(), 6);
        assert_eq!(ordering_count(&run_lengths(&[1, 4, 4, 7])).unwrap(), 12);
        assert!(ordering_count(&[1]).is_err());
        assert!(ordering_count(&[21]).is_err());
    }

    #[test]
    fn ordering_count_times_factorials_is_size_factorial() {
        for m in 2..=5 {
            for_each_multiset(8, m, |e| {
                let runs = run_lengths(e);
                let denom: u64 = runs.iter().map(|&a| factorial(a)).product();
                assert_eq!(ordering_count(&runs).unwrap() * denom, factorial(m));
            });
        }
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(unrank_multiset(0, 3, 2).unwrap(), vec![0, 0]);
        assert_eq!(unrank_multiset(3, 3, 2).unwrap(), vec![1, 1]);
        assert_eq!(unrank_multiset(5, 3, 2).unwrap(), vec![2, 2]);
        assert!(matches!(
            unrank_multiset(6, 3, 2),
            Err(Error::IndexOutOfRange { index: 6, count: 6 })
        ));
    }

    #[test]
    fn enumeration_order_matches_unrank() {
        for n in 1..=6 {
            for m in 1..=4 {
                let mut idx = 0u64;
                for_each_multiset(n, m, |e| {
                    assert_eq!(unrank_multiset(idx, n, m).unwrap(), e);
                    assert_eq!(rank_multiset(e, n).unwrap(), idx);
                    idx += 1;
                });
                assert_eq!(idx, multiset_count(n as u64, m as u64).unwrap());
            }
        }
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, 7), Some(0));
        assert_eq!(binomial(67, 33), Some(14_226_520_737_620_288_370));
        assert_eq!(binomial(200, 100), None);
        assert_eq!(multiset_count(3003 - 3, 4), binomial(3003, 4));
    }

    proptest! {
        #[test]
        fn rank_inverts_unrank(n in 1usize..400, m in 1usize..5, frac in 0.0f64..1.0) {
            let total = multiset_count(n as u64, m as u64).unwrap();
            let idx = ((total as f64 * frac) as u64).min(total - 1);
            let e = unrank_multiset(idx, n, m).unwrap();
            prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(rank_multiset(&e, n).unwrap(), idx);
        }
    }
}
