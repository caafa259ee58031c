use std::collections::BTreeMap;

use num_rational::Ratio;

use super::sparse::SparseSymMatrix;
use crate::model::{Edge, Hypergraph};
use crate::{Error, Result};

/// Largest dimension accepted by [`weighted_adjacency_exact`].
pub const EXACT_PATH_MAX_N: usize = 100;

/// Contributions of one hyperedge to the weighted adjacency matrix as
/// `(i, j, numerator)` with common denominator `|e| - 1`:
/// `a_i a_j` off the diagonal and `a_i (a_i - 1)` on it.
fn edge_contributions(e: &Edge) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
    let runs = e.runs();
    runs.iter().enumerate().flat_map(move |(x, &(i, ai))| {
        let diag = (ai > 1).then_some((i, i, (ai * (ai - 1)) as u64));
        diag.into_iter().chain(
            runs[x + 1..]
                .iter()
                .map(move |&(j, aj)| (i, j, (ai * aj) as u64)),
        )
    })
}

/// Clique-expansion adjacency: `A_ij = Σ_e a_ei a_ej / (|e| - 1)` for `i != j` and
/// `A_ii = Σ_e a_ei (a_ei - 1) / (|e| - 1)`.
pub fn weighted_adjacency(h: &Hypergraph) -> SparseSymMatrix {
    let triplets = h.edges().iter().flat_map(|e| {
        let denom = (e.size() - 1) as f64;
        edge_contributions(e).map(move |(i, j, num)| (i, j, num as f64 / denom))
    });
    SparseSymMatrix::from_triplets(h.n(), triplets)
}

/// The same matrix in exact rational arithmetic, upper triangle only.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactAdjacency {
    pub n: usize,
    pub entries: BTreeMap<(usize, usize), Ratio<i64>>,
}

impl ExactAdjacency {
    pub fn row_sums(&self) -> Vec<Ratio<i64>> {
        let mut s = vec![Ratio::from_integer(0); self.n];
        for (&(i, j), &v) in &self.entries {
            s[i] += v;
            if i != j {
                s[j] += v;
            }
        }
        s
    }

    pub fn get(&self, i: usize, j: usize) -> Ratio<i64> {
        self.entries
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or_else(|| Ratio::from_integer(0))
    }
}

pub fn weighted_adjacency_exact(h: &Hypergraph) -> Result<ExactAdjacency> {
    if h.n() > EXACT_PATH_MAX_N {
        return Err(Error::Dimension(format!(
            "rational construction supports n <= {EXACT_PATH_MAX_N}, got {}",
            h.n()
        )));
    }
    let mut entries: BTreeMap<(usize, usize), Ratio<i64>> = BTreeMap::new();
    for e in h.edges() {
        let denom = (e.size() - 1) as i64;
        for (i, j, num) in edge_contributions(e) {
            *entries.entry((i, j)).or_insert_with(|| Ratio::from_integer(0)) +=
                Ratio::new(num as i64, denom);
        }
    }
    Ok(ExactAdjacency { n: h.n(), entries })
}
