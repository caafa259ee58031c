use std::cmp::Ordering;

use super::{Algorithm, ClusteringResult};
use crate::linalg::DenseMatrix;

/// Above this many nodes the pair list is not materialised; see [`threshold_cluster`].
pub const MATERIALIZED_PAIRS_MAX_N: usize = 8192;

#[derive(Debug, Clone)]
struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.components -= 1;
        true
    }
}

fn dist(u: &DenseMatrix, i: usize, j: usize) -> f64 {
    u.row(i)
        .iter()
        .zip(u.row(j))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Strict total order on pairs: `(distance, i, j)`.
fn pair_cmp(a: &(f64, usize, usize), b: &(f64, usize, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// Adds node pairs in ascending `(distance, i, j)` order until exactly `k` connected
/// components remain. Components are numbered by their smallest node id.
pub fn threshold_cluster(ustar: &DenseMatrix, k: usize) -> ClusteringResult {
    let n = ustar.rows();
    assert!(k >= 1 && k <= n, "need 1 <= K <= n");
    let (sets, objective) = if n <= MATERIALIZED_PAIRS_MAX_N {
        merge_sorted_pairs(ustar, k)
    } else {
        merge_spanning_tree(ustar, k)
    };
    let mut sets = sets;
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let labels = (0..n)
        .map(|i| {
            let r = sets.find(i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            label_of_root[r]
        })
        .collect();
    ClusteringResult {
        labels,
        algorithm: Algorithm::Threshold,
        objective,
        zero_row_nodes: Vec::new(),
        degenerate: false,
    }
}

fn merge_sorted_pairs(ustar: &DenseMatrix, k: usize) -> (DisjointSets, f64) {
    let n = ustar.rows();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((dist(ustar, i, j), i, j));
        }
    }
    pairs.sort_unstable_by(pair_cmp);
    let mut sets = DisjointSets::new(n);
    let mut reached = 0.0;
    for &(d, i, j) in &pairs {
        if sets.components == k {
            break;
        }
        sets.union(i, j);
        reached = d;
    }
    (sets, reached)
}

/// Same partition as [`merge_sorted_pairs`] with O(n) memory: Kruskal under a strict
/// total order stops at `k` components exactly when the `k - 1` largest edges of the
/// (unique) minimum spanning tree are left out, and Prim finds that tree.
fn merge_spanning_tree(ustar: &DenseMatrix, k: usize) -> (DisjointSets, f64) {
    let n = ustar.rows();
    let mut in_tree = vec![false; n];
    // best connecting pair per node, as (distance, min id, max id)
    let mut best: Vec<(f64, usize, usize)> = vec![(f64::INFINITY, usize::MAX, usize::MAX); n];
    let mut tree: Vec<(f64, usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (dist(ustar, 0, j), 0, j);
    }
    for _ in 1..n {
        let next = (0..n)
            .filter(|&j| !in_tree[j])
            .min_by(|&a, &b| pair_cmp(&best[a], &best[b]))
            .expect("a node remains outside the tree");
        in_tree[next] = true;
        tree.push(best[next]);
        for j in 0..n {
            if !in_tree[j] {
                let cand = (dist(ustar, next, j), next.min(j), next.max(j));
                if pair_cmp(&cand, &best[j]) == Ordering::Less {
                    best[j] = cand;
                }
            }
        }
    }
    tree.sort_unstable_by(pair_cmp);
    let mut sets = DisjointSets::new(n);
    let mut reached = 0.0;
    for &(d, i, j) in tree.iter().take(n - k) {
        sets.union(i, j);
        reached = d;
    }
    (sets, reached)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    #[test]
    fn two_tight_clusters() {
        let u = DenseMatrix::from_rows(&[
            vec![1.0, 1e-6],
            vec![0.0, 1.0],
            vec![1.0 - 1e-6, 0.0],
            vec![1e-6, 1.0],
            vec![1.0, -1e-6],
        ]);
        let res = threshold_cluster(&u, 2);
        assert_eq!(res.labels, vec![0, 1, 0, 1, 0]);
        assert!(res.objective < 1e-5);
    }

    #[test]
    fn k_equals_n_keeps_singletons() {
        let u = DenseMatrix::from_rows(&[vec![0.0], vec![0.0], vec![1.0]]);
        let res = threshold_cluster(&u, 3);
        assert_eq!(res.labels, vec![0, 1, 2]);
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn spanning_tree_route_matches_sorted_pairs() {
        let mut rng = rng_from_seed(5);
        for trial in 0..20 {
            let n = 30 + trial;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let u = DenseMatrix::from_rows(&rows);
            for k in [1, 2, 4, 7] {
                let (mut a, da) = merge_sorted_pairs(&u, k);
                let (mut b, db) = merge_spanning_tree(&u, k);
                assert_eq!(da, db);
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!(a.find(i) == a.find(j), b.find(i) == b.find(j));
                    }
                }
            }
        }
    }
}
