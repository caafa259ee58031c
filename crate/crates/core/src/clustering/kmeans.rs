use rand::Rng;

use super::{Algorithm, ClusteringResult};
use crate::linalg::DenseMatrix;
use crate::seed::stream_rng;

#[derive(Debug, Clone)]
pub struct KmeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        KmeansOptions {
            restarts: 20,
            max_iter: 300,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

struct Run {
    labels: Vec<usize>,
    centers: Vec<Vec<f64>>,
    cost: f64,
    degenerate: bool,
}

/// k-means++ seeding followed by Lloyd iterations on the given points.
fn lloyd(points: &[&[f64]], k: usize, max_iter: usize, rng: &mut impl Rng) -> Run {
    let m = points.len();
    let dim = points.first().map_or(0, |p| p.len());
    let mut degenerate = false;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..m)].to_vec());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard the rounding tail: never pick a point already at a centre
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            // fewer distinct points than clusters: duplicate centres collapse
            degenerate = true;
            rng.random_range(0..m)
        };
        let c = points[pick].to_vec();
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &c));
        }
        centers.push(c);
    }

    let mut labels = vec![usize::MAX; m];
    let mut cost = f64::INFINITY;
    for _ in 0..max_iter {
        let mut changed = false;
        let mut new_cost = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            new_cost += d;
        }
        debug_assert!(
            new_cost <= cost * (1.0 + 1e-12) + 1e-12,
            "Lloyd cost increased: {cost} -> {new_cost}"
        );
        cost = new_cost;
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p.iter()).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            // an empty cluster keeps its previous centre
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // cost after the centre update, for the monotonicity check
        let updated: f64 = points
            .iter()
            .zip(&labels)
            .map(|(p, &l)| sq_dist(p, &centers[l]))
            .sum();
        debug_assert!(updated <= cost * (1.0 + 1e-12) + 1e-12);
        cost = updated;
    }
    let used = {
        let mut seen = vec![false; k];
        labels.iter().for_each(|&l| seen[l] = true);
        seen.iter().filter(|&&s| s).count()
    };
    Run {
        labels,
        centers,
        cost,
        degenerate: degenerate || used < k,
    }
}

/// Best-of-restarts k-means on the non-zero rows of `ustar`; zero rows are assigned to
/// the nearest resulting centre and reported. Labels are numbered by first appearance.
pub fn kmeans_rows(ustar: &DenseMatrix, k: usize, opts: &KmeansOptions, seed: u64) -> ClusteringResult {
    let n = ustar.rows();
    assert!(k >= 1 && opts.restarts >= 1, "need K >= 1 and at least one restart");
    let nonzero: Vec<usize> = (0..n)
        .filter(|&i| ustar.row(i).iter().any(|&x| x != 0.0))
        .collect();
    let zero_row_nodes: Vec<usize> = (0..n)
        .filter(|&i| ustar.row(i).iter().all(|&x| x == 0.0))
        .collect();
    if nonzero.is_empty() {
        return ClusteringResult {
            labels: vec![0; n],
            algorithm: Algorithm::Kmeans,
            objective: 0.0,
            zero_row_nodes,
            degenerate: true,
        };
    }
    let points: Vec<&[f64]> = nonzero.iter().map(|&i| ustar.row(i)).collect();

    let mut best: Option<Run> = None;
    for r in 0..opts.restarts {
        let mut rng = stream_rng(seed, "kmeans-restart", &[r as u64]);
        let run = lloyd(&points, k, opts.max_iter, &mut rng);
        // ties keep the earlier restart
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");

    let mut raw = vec![0usize; n];
    for (&i, &l) in nonzero.iter().zip(&best.labels) {
        raw[i] = l;
    }
    for &i in &zero_row_nodes {
        raw[i] = nearest(ustar.row(i), &best.centers).0;
    }
    ClusteringResult {
        labels: relabel_by_first_appearance(&raw, k),
        algorithm: Algorithm::Kmeans,
        objective: best.cost,
        zero_row_nodes,
        degenerate: best.degenerate,
    }
}

pub(crate) fn relabel_by_first_appearance(labels: &[usize], k: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; k.max(labels.iter().max().map_or(0, |m| m + 1))];
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_one_dimensional_groups() {
        let u = DenseMatrix::from_rows(&[
            vec![0.0],
            vec![0.0],
            vec![0.0],
            vec![10.0],
            vec![10.0],
            vec![10.0],
        ]);
        // all-zero rows would be treated as zero rows, so shift the first group
        let mut shifted = u.clone();
        for i in 0..6 {
            shifted[(i, 0)] += 1.0;
        }
        let res = kmeans_rows(&shifted, 2, &KmeansOptions::default(), 3);
        assert_eq!(res.labels, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(res.objective, 0.0);
        assert!(!res.degenerate);
    }

    #[test]
    fn orthonormal_points_cost_zero() {
        let mut rows = Vec::new();
        for i in 0..9 {
            let mut r = vec![0.0; 3];
            r[i % 3] = 1.0;
            rows.push(r);
        }
        let res = kmeans_rows(&DenseMatrix::from_rows(&rows), 3, &KmeansOptions::default(), 1);
        assert_eq!(res.objective, 0.0);
        for i in 0..9 {
            assert_eq!(res.labels[i], res.labels[i % 3]);
        }
        assert_eq!(&res.labels[..3], &[0, 1, 2]);
    }

    #[test]
    fn zero_rows_are_flagged_and_assigned() {
        let u = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![0.9, 0.1]]);
        let res = kmeans_rows(&u, 2, &KmeansOptions::default(), 0);
        assert_eq!(res.zero_row_nodes, vec![1]);
        assert!(res.labels[1] < 2);
        assert_eq!(res.labels[0], res.labels[3]);
        assert_ne!(res.labels[0], res.labels[2]);
    }

    #[test]
    fn too_few_distinct_rows_is_degenerate() {
        let u = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]]);
        let res = kmeans_rows(&u, 2, &KmeansOptions::default(), 0);
        assert!(res.degenerate);
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![((i * 7919) % 97) as f64 / 97.0, ((i * 104729) % 89) as f64 / 89.0])
            .collect();
        let u = DenseMatrix::from_rows(&rows);
        let a = kmeans_rows(&u, 3, &KmeansOptions::default(), 42);
        let b = kmeans_rows(&u, 3, &KmeansOptions::default(), 42);
        assert_eq!(a, b);
    }
}
