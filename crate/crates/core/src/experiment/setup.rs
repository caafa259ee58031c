use rand::Rng;

use crate::model::{Affinity, ModelParams};
use crate::seed::rng_from_seed;
use crate::{Error, Result};

use super::config::ThetaMode;

/// `K` contiguous blocks whose sizes differ by at most one.
pub fn equal_block_labels(n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|i| i * k / n).collect()
}

/// Degree parameters satisfying `Σ_{i∈k} θ_i = n_k`.
pub fn make_theta(mode: ThetaMode, n: usize, k: usize, labels: &[usize], seed: u64) -> Vec<f64> {
    match mode {
        ThetaMode::Uniform => vec![1.0; n],
        ThetaMode::Heterogeneous => {
            let mut rng = rng_from_seed(seed);
            let psi: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=2.0)).collect();
            let mut sums = vec![0.0; k];
            let mut sizes = vec![0usize; k];
            for (&g, &x) in labels.iter().zip(&psi) {
                sums[g] += x;
                sizes[g] += 1;
            }
            psi.iter()
                .zip(labels)
                .map(|(&x, &g)| sizes[g] as f64 * x / sums[g])
                .collect()
        }
    }
}

/// Expected number of size-`m` hyperedges when `α_m = 1`:
/// `q (Σθ)^m + (p - q) Σ_k (Σ_{i∈k} θ_i)^m`.
pub fn unit_alpha_edge_count(m: usize, k: usize, p: f64, q: f64, labels: &[usize], theta: &[f64]) -> f64 {
    let mut sums = vec![0.0; k];
    for (&g, &t) in labels.iter().zip(theta) {
        sums[g] += t;
    }
    let total: f64 = sums.iter().sum();
    q * total.powi(m as i32) + (p - q) * sums.iter().map(|s| s.powi(m as i32)).sum::<f64>()
}

/// `α_2..α_M` giving average expected hyperdegree `scale`. With `balance` every size gets the
/// same expected hyperedge count, otherwise all `α_m` are equal.
#[allow(clippy::too_many_arguments)]
pub fn balance_alphas(
    n: usize,
    k: usize,
    max_size: usize,
    p: f64,
    q: f64,
    labels: &[usize],
    theta: &[f64],
    scale: f64,
    balance: bool,
) -> Result<Vec<f64>> {
    let counts: Vec<f64> = (2..=max_size)
        .map(|m| unit_alpha_edge_count(m, k, p, q, labels, theta))
        .collect();
    let alpha: Vec<f64> = if balance {
        // Σ_m m N_m = n with N_m equal for every m
        let per_size = n as f64 / (2..=max_size).sum::<usize>() as f64;
        counts.iter().map(|c| scale * per_size / c).collect()
    } else {
        let weighted: f64 = counts.iter().zip(2..).map(|(c, m)| m as f64 * c).sum();
        vec![scale * n as f64 / weighted; max_size - 1]
    };
    let params = planted_params(k, max_size, p, q, labels, theta, alpha.clone())?;
    for m in 2..=max_size {
        let top = params.max_edge_probability(m);
        if top > 1.0 {
            return Err(Error::Infeasible(format!(
                "scale {scale}: a size-{m} hyperedge would have probability {top}"
            )));
        }
    }
    Ok(alpha)
}

pub fn planted_params(
    k: usize,
    max_size: usize,
    p: f64,
    q: f64,
    labels: &[usize],
    theta: &[f64],
    alpha: Vec<f64>,
) -> Result<ModelParams> {
    ModelParams::new(
        k,
        max_size,
        labels.to_vec(),
        theta.to_vec(),
        Affinity::Planted { p, q, alpha },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::combinatorics::for_each_multiset;
    use crate::model::params::IDENTIFIABILITY_TOL;

    #[test]
    fn theta_is_identifiable() {
        for k in 1..4 {
            let labels = equal_block_labels(31, k);
            let theta = make_theta(ThetaMode::Heterogeneous, 31, k, &labels, 7);
            let mut sums = vec![0.0; k];
            let mut sizes = vec![0.0; k];
            for (&g, &t) in labels.iter().zip(&theta) {
                sums[g] += t;
                sizes[g] += 1.0;
            }
            for (s, nk) in sums.iter().zip(&sizes) {
                assert!((s - nk).abs() <= IDENTIFIABILITY_TOL * nk);
            }
            // ψ ∈ [1, 2] bounds the within-block spread
            for g in 0..k {
                let block: Vec<f64> = (0..31).filter(|&i| labels[i] == g).map(|i| theta[i]).collect();
                let hi = block.iter().cloned().fold(0.0, f64::max);
                let lo = block.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!(hi / lo <= 2.0 + 1e-12);
            }
        }
        assert_eq!(make_theta(ThetaMode::Uniform, 4, 2, &[0, 0, 1, 1], 0), vec![1.0; 4]);
    }

    #[test]
    fn unit_alpha_count_matches_enumeration() {
        let labels = equal_block_labels(9, 3);
        let theta = make_theta(ThetaMode::Heterogeneous, 9, 3, &labels, 3);
        for m in 2..=4 {
            let mut alpha = vec![0.0; 3];
            alpha[m - 2] = 1.0;
            let params = planted_params(3, 4, 10.0, 1.0, &labels, &theta, alpha).unwrap();
            let mut total = 0.0;
            for_each_multiset(9, m, |e| total += params.probability_of_sorted(e));
            let closed = unit_alpha_edge_count(m, 3, 10.0, 1.0, &labels, &theta);
            assert!((total - closed).abs() <= 1e-9 * closed, "m={m}: {total} vs {closed}");
        }
    }

    #[test]
    fn balanced_counts_are_equal_and_degree_is_scale() {
        let n = 12;
        let labels = equal_block_labels(n, 2);
        let theta = make_theta(ThetaMode::Heterogeneous, n, 2, &labels, 11);
        let alpha = balance_alphas(n, 2, 4, 10.0, 1.0, &labels, &theta, 0.5, true).unwrap();
        let params = planted_params(2, 4, 10.0, 1.0, &labels, &theta, alpha).unwrap();
        let mut counts = Vec::new();
        let mut degree_sum = 0.0;
        for m in 2..=4 {
            let mut c = 0.0;
            for_each_multiset(n, m, |e| c += params.probability_of_sorted(e));
            degree_sum += m as f64 * c;
            counts.push(c);
        }
        for c in &counts {
            assert!((c - counts[0]).abs() < 1e-9 * counts[0]);
        }
        assert!((degree_sum / n as f64 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_size_is_trivially_balanced() {
        let labels = equal_block_labels(10, 2);
        let theta = vec![1.0; 10];
        let a = balance_alphas(10, 2, 2, 10.0, 1.0, &labels, &theta, 1.0, true).unwrap();
        let b = balance_alphas(10, 2, 2, 10.0, 1.0, &labels, &theta, 1.0, false).unwrap();
        assert_eq!(a.len(), 1);
        assert!((a[0] - b[0]).abs() < 1e-15);
    }

    #[test]
    fn infeasible_scale_is_rejected() {
        let labels = equal_block_labels(10, 2);
        let theta = vec![1.0; 10];
        assert!(matches!(
            balance_alphas(10, 2, 3, 10.0, 1.0, &labels, &theta, 1e6, true),
            Err(Error::Infeasible(_))
        ));
    }
}
