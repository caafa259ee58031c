//! Exact Bernoulli samplers.
//!
//! Both samplers draw every candidate hyperedge independently with its model
//! probability. [`sample_exact`] visits every multiset; [`sample_scalable`] walks the
//! lexicographic index space of each size with geometric skips against a per-size
//! probability bound and thins the hits, which yields the same edge distribution.

use rand::Rng;

use super::combinatorics::{for_each_multiset, multiset_count, unrank_multiset};
use super::hypergraph::{Edge, Hypergraph};
use super::params::{validate, ModelParams};
use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Enumeration guard for [`sample_exact`]: `C(n + M - 1, M)` candidates at most.
pub const EXACT_ENUMERATION_LIMIT: u128 = 10_000_000;

/// Acceptance ratios below this make the skip sampler wasteful.
pub const LOW_ACCEPTANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOptions {
    /// Keep hyperedges with repeated nodes (the model allows them).
    pub allow_repeats: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            allow_repeats: true,
        }
    }
}

/// Per-size bookkeeping from [`sample_scalable`].
#[derive(Debug, Clone, PartialEq)]
pub struct SizeStats {
    pub size: usize,
    pub bound: f64,
    pub candidates: u64,
    pub hits: u64,
    pub accepted: u64,
}

impl SizeStats {
    /// Empirical acceptance ratio of bound hits.
    pub fn acceptance(&self) -> f64 {
        if self.hits == 0 {
            1.0
        } else {
            self.accepted as f64 / self.hits as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub hypergraph: Hypergraph,
    pub stats: Vec<SizeStats>,
    pub warnings: Vec<String>,
}

fn enumeration_size(n: usize, max_size: usize) -> u128 {
    (2..=max_size)
        .map(|m| multiset_count(n as u64, m as u64).map_or(u128::MAX, u128::from))
        .fold(0u128, u128::saturating_add)
}

pub fn sample_exact(params: &ModelParams, seed: u64) -> Result<Hypergraph> {
    sample_exact_with(params, seed, SampleOptions::default())
}

pub fn sample_exact_with(
    params: &ModelParams,
    seed: u64,
    options: SampleOptions,
) -> Result<Hypergraph> {
    validate(params).into_result()?;
    let total = enumeration_size(params.n, params.max_size);
    if total > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooLarge(total));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for m in 2..=params.max_size {
        for_each_multiset(params.n, m, |e| {
            let p = params.probability_of_sorted(e);
            // one draw per candidate keeps the stream aligned across parameter changes
            let u: f64 = rng.random();
            if u < p {
                let edge = Edge::from_sorted(e);
                if options.allow_repeats || !edge.has_repeats() {
                    edges.push(edge);
                }
            }
        });
    }
    Ok(Hypergraph::from_unique(params.n, edges))
}

pub fn sample_scalable(params: &ModelParams, seed: u64) -> Result<Hypergraph> {
    Ok(sample_scalable_with(params, seed, SampleOptions::default())?.hypergraph)
}

pub fn sample_scalable_with(
    params: &ModelParams,
    seed: u64,
    options: SampleOptions,
) -> Result<SampleOutcome> {
    let report = validate(params).into_result()?;
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    let mut stats = Vec::new();
    let mut warnings = Vec::new();

    for m in 2..=params.max_size {
        let candidates = multiset_count(params.n as u64, m as u64).ok_or_else(|| {
            Error::InvalidParams(format!("too many size-{m} candidates for a 64-bit index"))
        })?;
        // validation guarantees bound <= 1, so the per-index fallback is bound = 1
        let bound = report.max_probability[m - 2].min(1.0);
        let mut st = SizeStats {
            size: m,
            bound,
            candidates,
            hits: 0,
            accepted: 0,
        };
        if bound <= 0.0 {
            stats.push(st);
            continue;
        }
        let log_miss = (-bound).ln_1p();
        let mut idx = 0u64;
        loop {
            if bound < 1.0 {
                let u: f64 = rng.random();
                // failures before the next success of a Bernoulli(bound) walk
                let skip = ((-u).ln_1p() / log_miss).floor();
                if skip >= (candidates - idx) as f64 {
                    break;
                }
                idx += skip as u64;
            }
            if idx >= candidates {
                break;
            }
            st.hits += 1;
            let nodes = unrank_multiset(idx, params.n, m)?;
            let p = params.probability_of_sorted(&nodes);
            let v: f64 = rng.random();
            if v * bound < p {
                let edge = Edge::from_sorted(&nodes);
                if options.allow_repeats || !edge.has_repeats() {
                    st.accepted += 1;
                    edges.push(edge);
                }
            }
            idx += 1;
        }
        if st.hits >= 100 && st.acceptance() < LOW_ACCEPTANCE {
            warnings.push(format!(
                "size-{m} acceptance ratio {:.2e}: sampler inefficient for these parameters",
                st.acceptance()
            ));
        }
        stats.push(st);
    }
    Ok(SampleOutcome {
        hypergraph: Hypergraph::from_unique(params.n, edges),
        stats,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::Affinity;

    fn planted(n: usize, k: usize, alpha: Vec<f64>) -> ModelParams {
        let labels = (0..n).map(|i| i * k / n).collect();
        ModelParams::new(
            k,
            alpha.len() + 1,
            labels,
            vec![1.0; n],
            Affinity::Planted {
                p: 1.0,
                q: 0.5,
                alpha,
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_affinity_gives_empty_hypergraph() {
        let params = planted(10, 2, vec![0.0, 0.0]);
        assert!(sample_exact(&params, 1).unwrap().edges().is_empty());
        assert!(sample_scalable(&params, 1).unwrap().edges().is_empty());
    }

    #[test]
    fn certain_edges_are_all_present() {
        use crate::model::params::GeneralAffinity;
        let mut phi = GeneralAffinity::new();
        phi.insert(&[0, 0], 0.5).unwrap();
        phi.insert(&[0, 0, 0], 1.0 / 6.0).unwrap();
        // b_e Φ = 1 exactly for distinct-node edges, below 1 for edges with repeats
        let params =
            ModelParams::new(1, 3, vec![0; 3], vec![1.0; 3], Affinity::General(phi)).unwrap();
        let h = sample_exact(&params, 3).unwrap();
        for e in [vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
            assert!(h.edges().contains(&Edge::from_nodes(&e)));
        }
        let s = sample_scalable(&params, 3).unwrap();
        for e in [vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
            assert!(s.edges().contains(&Edge::from_nodes(&e)));
        }
    }

    #[test]
    fn all_candidates_when_probabilities_are_one() {
        // n = 1: the only candidates are (1,1) and (1,1,1), each with b_e = 1
        use crate::model::params::GeneralAffinity;
        let mut phi = GeneralAffinity::new();
        phi.insert(&[0, 0], 1.0).unwrap();
        phi.insert(&[0, 0, 0], 1.0).unwrap();
        let params =
            ModelParams::new(1, 3, vec![0], vec![1.0], Affinity::General(phi)).unwrap();
        for seed in 0..5 {
            assert_eq!(sample_exact(&params, seed).unwrap().edges().len(), 2);
            assert_eq!(sample_scalable(&params, seed).unwrap().edges().len(), 2);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let params = planted(30, 2, vec![0.01, 0.0005]);
        assert_eq!(sample_exact(&params, 9).unwrap(), sample_exact(&params, 9).unwrap());
        assert_eq!(
            sample_scalable(&params, 9).unwrap(),
            sample_scalable(&params, 9).unwrap()
        );
        assert_ne!(
            sample_scalable(&params, 9).unwrap(),
            sample_scalable(&params, 10).unwrap()
        );
    }

    #[test]
    fn exclusion_switch_drops_repeated_nodes() {
        let params = planted(15, 1, vec![0.05, 0.005]);
        let out = sample_scalable_with(&params, 4, SampleOptions { allow_repeats: false })
            .unwrap();
        assert!(out.hypergraph.edges().iter().all(|e| !e.has_repeats()));
        let h = sample_exact_with(&params, 4, SampleOptions { allow_repeats: false }).unwrap();
        assert!(h.edges().iter().all(|e| !e.has_repeats()));
    }

    #[test]
    fn enumeration_guard() {
        let params = planted(400, 2, vec![0.0, 0.0, 0.0]);
        assert!(matches!(sample_exact(&params, 0), Err(Error::TooLarge(_))));
    }

    #[test]
    fn single_community_mean_edge_count() {
        // K = 1, M = 2, Φ = c: E[count] = C(n, 2) 2c + n c
        let (n, c) = (20usize, 0.01);
        let params = ModelParams::new(
            1,
            2,
            vec![0; n],
            vec![1.0; n],
            Affinity::Planted {
                p: c,
                q: c / 2.0,
                alpha: vec![1.0],
            },
        )
        .unwrap();
        let mean_exact = (n * (n - 1) / 2) as f64 * 2.0 * c + n as f64 * c;
        // independently: enumerate the variance as well
        let var: f64 = (n * (n - 1) / 2) as f64 * (2.0 * c) * (1.0 - 2.0 * c)
            + n as f64 * c * (1.0 - c);
        let seeds = 2000u64;
        let total: usize = (0..seeds)
            .map(|s| sample_scalable(&params, s).unwrap().edges().len())
            .sum();
        let mean = total as f64 / seeds as f64;
        let se = (var / seeds as f64).sqrt();
        assert!((mean - mean_exact).abs() < 3.0 * se, "{mean} vs {mean_exact} (se {se})");
    }
}
