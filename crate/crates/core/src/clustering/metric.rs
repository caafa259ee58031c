use std::io::Write;

use itertools::Itertools;

use crate::Result;

/// Up to this many communities the optimal permutation is found by enumeration.
pub const EXHAUSTIVE_MAX_K: usize = 8;

/// `C[a][b] = #{i : g_i = a, g'_i = b}`.
pub fn confusion_matrix(g: &[usize], g_prime: &[usize], k: usize) -> Vec<Vec<usize>> {
    assert_eq!(g.len(), g_prime.len(), "label vectors differ in length");
    let mut c = vec![vec![0usize; k]; k];
    for (&a, &b) in g.iter().zip(g_prime) {
        c[a][b] += 1;
    }
    c
}

/// `l(g, g') = min_σ Σ_i 1{g_i != σ(g'_i)}` over permutations of the `K` labels.
pub fn misclustering(g: &[usize], g_prime: &[usize], k: usize) -> usize {
    let c = confusion_matrix(g, g_prime, k);
    let agree = if k <= EXHAUSTIVE_MAX_K {
        best_agreement_exhaustive(&c)
    } else {
        best_agreement_hungarian(&c)
    };
    g.len() - agree
}

/// Largest `Σ_b C[σ(b)][b]` by enumerating permutations.
pub fn best_agreement_exhaustive(c: &[Vec<usize>]) -> usize {
    let k = c.len();
    (0..k)
        .permutations(k)
        .map(|sigma| (0..k).map(|b| c[sigma[b]][b]).sum::<usize>())
        .max()
        .unwrap_or(0)
}

/// Same quantity via the Hungarian algorithm on costs `max C - C` (O(K³)).
pub fn best_agreement_hungarian(c: &[Vec<usize>]) -> usize {
    let k = c.len();
    if k == 0 {
        return 0;
    }
    let top = c.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| top - c[i - 1][j - 1] as i64;
    // potentials formulation, 1-based with a virtual column 0
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=k).map(|j| c[p[j] - 1][j - 1]).sum()
}

/// Plain-text confusion matrix: rows are true labels, columns estimated labels.
pub fn write_confusion<W: Write>(c: &[Vec<usize>], mut w: W) -> Result<()> {
    write!(w, "true\\est")?;
    for b in 1..=c.len() {
        write!(w, ",{b}")?;
    }
    writeln!(w)?;
    for (a, row) in c.iter().enumerate() {
        write!(w, "{}", a + 1)?;
        for x in row {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn examples() {
        let g = vec![0, 0, 1, 1];
        assert_eq!(misclustering(&g, &g, 2), 0);
        assert_eq!(misclustering(&g, &[1, 1, 0, 0], 2), 0);
        assert_eq!(misclustering(&g, &[0, 1, 1, 1], 2), 1);
    }

    #[test]
    fn hungarian_agrees_with_enumeration() {
        let mut rng = rng_from_seed(17);
        for _ in 0..200 {
            let k = rng.random_range(1..=7);
            let n = rng.random_range(1..60);
            let g: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            let h: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            let c = confusion_matrix(&g, &h, k);
            assert_eq!(best_agreement_exhaustive(&c), best_agreement_hungarian(&c));
        }
    }

    #[test]
    fn invariant_under_relabeling() {
        let mut rng = rng_from_seed(3);
        for k in [2, 3, 5, 9, 12] {
            let g: Vec<usize> = (0..80).map(|_| rng.random_range(0..k)).collect();
            let h: Vec<usize> = (0..80).map(|_| rng.random_range(0..k)).collect();
            let base = misclustering(&g, &h, k);
            let mut sigma: Vec<usize> = (0..k).collect();
            sigma.shuffle(&mut rng);
            let permuted: Vec<usize> = h.iter().map(|&l| sigma[l]).collect();
            assert_eq!(misclustering(&g, &permuted, k), base);
            assert_eq!(misclustering(&g, &g.iter().map(|&l| sigma[l]).collect::<Vec<_>>(), k), 0);
        }
    }

    #[test]
    fn confusion_dump() {
        let c = confusion_matrix(&[0, 0, 1], &[1, 0, 1], 2);
        let mut buf = Vec::new();
        write_confusion(&c, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "true\\est,1,2\n1,1,1\n2,0,1\n");
    }
}
