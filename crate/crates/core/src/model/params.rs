use std::collections::BTreeMap;

use super::combinatorics::{factorial, for_each_multiset, ordering_count, run_lengths};
use super::hypergraph::Edge;
use crate::{Error, Result};

/// Relative tolerance for the identifiability constraint `Σ_{i∈k} θ_i = n_k`.
pub const IDENTIFIABILITY_TOL: f64 = 1e-9;

/// A symmetric affinity keyed by the sorted label multiset of a hyperedge.
/// Missing keys have affinity zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneralAffinity {
    values: BTreeMap<Vec<usize>, f64>,
}

impl GeneralAffinity {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `Φ(labels)`. Labels may come in any order; assigning two different values
    /// to orderings of the same multiset is rejected as asymmetric.
    pub fn insert(&mut self, labels: &[usize], value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "affinity {value} for {labels:?} must be finite and non-negative"
            )));
        }
        let mut key = labels.to_vec();
        key.sort_unstable();
        match self.values.get(&key) {
            Some(&old) if old != value => Err(Error::InvalidParams(format!(
                "asymmetric affinity: {key:?} given both {old} and {value}"
            ))),
            _ => {
                self.values.insert(key, value);
                Ok(())
            }
        }
    }

    pub fn get(&self, sorted_labels: &[usize]) -> f64 {
        self.values.get(sorted_labels).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.values.iter().map(|(k, &v)| (k.as_slice(), v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Affinity {
    General(GeneralAffinity),
    /// All-or-nothing affinity: `Φ = α_m ((p - q) 1{all labels equal} + q)`.
    /// `alpha[m - 2]` is the scale of size-`m` hyperedges.
    Planted { p: f64, q: f64, alpha: Vec<f64> },
}

impl Affinity {
    /// `Φ` for a sorted label multiset.
    pub fn phi(&self, sorted_labels: &[usize]) -> f64 {
        match self {
            Affinity::General(g) => g.get(sorted_labels),
            Affinity::Planted { p, q, alpha } => {
                let m = sorted_labels.len();
                let scale = alpha.get(m.wrapping_sub(2)).copied().unwrap_or(0.0);
                let same = sorted_labels.first() == sorted_labels.last();
                scale * if same { *p } else { *q }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub k: usize,
    pub max_size: usize,
    /// 0-based community label per node.
    pub labels: Vec<usize>,
    pub theta: Vec<f64>,
    pub affinity: Affinity,
}

impl ModelParams {
    /// Checks the shape of the parameters. Model invariants are checked by [`validate`].
    pub fn new(
        k: usize,
        max_size: usize,
        labels: Vec<usize>,
        theta: Vec<f64>,
        affinity: Affinity,
    ) -> Result<Self> {
        let n = labels.len();
        if theta.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} labels but {} degree weights",
                n,
                theta.len()
            )));
        }
        if k == 0 || n == 0 {
            return Err(Error::InvalidParams("need n >= 1 and K >= 1".into()));
        }
        if !(2..=super::combinatorics::MAX_FACTORIAL).contains(&max_size) {
            return Err(Error::InvalidParams(format!(
                "maximum hyperedge size {max_size} outside [2, 20]"
            )));
        }
        if let Some(&g) = labels.iter().find(|&&g| g >= k) {
            return Err(Error::InvalidParams(format!("label {} exceeds K = {k}", g + 1)));
        }
        if let Affinity::Planted { alpha, .. } = &affinity {
            if alpha.len() != max_size - 1 {
                return Err(Error::InvalidParams(format!(
                    "planted affinity needs {} size scales, got {}",
                    max_size - 1,
                    alpha.len()
                )));
            }
        }
        Ok(ModelParams {
            n,
            k,
            max_size,
            labels,
            theta,
            affinity,
        })
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &g in &self.labels {
            sizes[g] += 1;
        }
        sizes
    }

    /// `Σ_{i: g_i = k} θ_i` per community.
    pub fn theta_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for (&g, &t) in self.labels.iter().zip(&self.theta) {
            sums[g] += t;
        }
        sums
    }

    /// Edge probability for a sorted node tuple, without range or bound checks.
    pub(crate) fn probability_of_sorted(&self, nodes: &[usize]) -> f64 {
        let mut labels: Vec<usize> = nodes.iter().map(|&v| self.labels[v]).collect();
        labels.sort_unstable();
        let phi = self.affinity.phi(&labels);
        if phi == 0.0 {
            return 0.0;
        }
        let b = ordering_count(&run_lengths(nodes)).expect("size checked by caller") as f64;
        let pi: f64 = nodes.iter().map(|&v| self.theta[v]).product();
        b * pi * phi
    }

    /// `P(h_e = 1) = b_e π(θ_e) Φ(g_e)`.
    pub fn edge_probability(&self, edge: &Edge) -> Result<f64> {
        let size = edge.size();
        if !(2..=self.max_size).contains(&size) {
            return Err(Error::EdgeSize {
                size,
                max: self.max_size,
            });
        }
        if let Some(&(v, _)) = edge.runs().iter().find(|&&(v, _)| v >= self.n) {
            return Err(Error::InvalidParams(format!("node {} out of range", v + 1)));
        }
        let prob = self.probability_of_sorted(&edge.nodes());
        if prob > 1.0 {
            return Err(Error::ProbabilityAboveOne(prob));
        }
        Ok(prob)
    }

    /// Exact `max_e P(h_e = 1)` over all multisets of size `m`.
    ///
    /// For a label pattern with `r_c` slots in community `c`, the best multiset only uses
    /// the `r_c` largest weights of `c`, and `b_e` factors over communities, so the
    /// maximum is found without enumerating hyperedges.
    pub fn max_edge_probability(&self, m: usize) -> f64 {
        let per_community = self.best_weight_products();
        let mut best = 0.0f64;
        for_each_multiset(self.k, m, |pattern| {
            let phi = self.affinity.phi(pattern);
            if phi == 0.0 {
                return;
            }
            let mut value = factorial(m) as f64 * phi;
            for (c, r) in label_runs(pattern) {
                value *= per_community[c][r] / factorial(r) as f64;
            }
            best = best.max(value);
        });
        best
    }

    /// `table[c][r] = max over size-r multisets e within c of b_e π(θ_e)`.
    fn best_weight_products(&self) -> Vec<Vec<f64>> {
        let mut members: Vec<Vec<f64>> = vec![Vec::new(); self.k];
        for (&g, &t) in self.labels.iter().zip(&self.theta) {
            members[g].push(t);
        }
        members
            .into_iter()
            .map(|mut ws| {
                ws.sort_by(|a, b| b.total_cmp(a));
                (0..=self.max_size)
                    .map(|r| {
                        if r == 0 {
                            return 1.0;
                        }
                        let top = &ws[..ws.len().min(r)];
                        let mut best = 0.0f64;
                        for_each_multiset(top.len(), r, |e| {
                            let b = multinomial(&run_lengths(e));
                            let pi: f64 = e.iter().map(|&i| top[i]).product();
                            best = best.max(b * pi);
                        });
                        best
                    })
                    .collect()
            })
            .collect()
    }

    /// Relabels communities so that sizes are non-increasing (stable for ties).
    /// Returns the new parameters and `perm` with `new_label = perm[old_label]`.
    pub fn canonicalize(&self) -> (ModelParams, Vec<usize>) {
        let sizes = self.community_sizes();
        let mut order: Vec<usize> = (0..self.k).collect();
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
        let mut perm = vec![0; self.k];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        let mut out = self.clone();
        out.labels = self.labels.iter().map(|&g| perm[g]).collect();
        if let Affinity::General(g) = &self.affinity {
            let mut relabeled = GeneralAffinity::new();
            for (key, v) in g.entries() {
                let mapped: Vec<usize> = key.iter().map(|&l| perm[l]).collect();
                relabeled.insert(&mapped, v).expect("relabeling keeps symmetry");
            }
            out.affinity = Affinity::General(relabeled);
        }
        (out, perm)
    }
}

fn multinomial(runs: &[usize]) -> f64 {
    let total: usize = runs.iter().sum();
    if total < 2 {
        return 1.0;
    }
    ordering_count(runs).expect("bounded size") as f64
}

/// `(label, count)` runs of a sorted label tuple.
fn label_runs(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &l in sorted {
        match out.last_mut() {
            Some((c, r)) if *c == l => *r += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

/// Outcome of [`validate`]. Violations are collected rather than returned as errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub community_sizes: Vec<usize>,
    /// `Some(perm)` when communities are not indexed by non-increasing size;
    /// see [`ModelParams::canonicalize`].
    pub relabeling: Option<Vec<usize>>,
    /// Exact maximum edge probability per size, indexed by `m - 2`.
    pub max_probability: Vec<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(self.violations.join("; ")))
        }
    }
}

pub fn validate(params: &ModelParams) -> ValidationReport {
    let mut violations = Vec::new();
    let sizes = params.community_sizes();

    for (i, &t) in params.theta.iter().enumerate() {
        if !(t.is_finite() && t > 0.0) {
            violations.push(format!("theta[{}] = {t} is not positive", i + 1));
        }
    }
    for (k, (&nk, sum)) in sizes.iter().zip(params.theta_sums()).enumerate() {
        if nk == 0 {
            violations.push(format!("community {} is empty", k + 1));
        } else if (sum - nk as f64).abs() > IDENTIFIABILITY_TOL * nk as f64 {
            violations.push(format!(
                "identifiability: community {} has theta sum {sum} != size {nk}",
                k + 1
            ));
        }
    }
    if let Affinity::Planted { p, q, alpha } = &params.affinity {
        if !(*q > 0.0 && p > q) {
            violations.push(format!("planted affinity needs p > q > 0 (p = {p}, q = {q})"));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            violations.push(format!("size scale alpha = {a} must be non-negative"));
        }
    }

    let max_probability: Vec<f64> = if violations.is_empty() {
        (2..=params.max_size)
            .map(|m| params.max_edge_probability(m))
            .collect()
    } else {
        Vec::new()
    };
    for (i, &pm) in max_probability.iter().enumerate() {
        if pm > 1.0 {
            violations.push(format!(
                "size-{} hyperedges reach probability {pm} > 1",
                i + 2
            ));
        }
    }

    let relabeling = if sizes.windows(2).all(|w| w[0] >= w[1]) {
        None
    } else {
        Some(params.canonicalize().1)
    };

    ValidationReport {
        violations,
        community_sizes: sizes,
        relabeling,
        max_probability,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::combinatorics::for_each_multiset;

    fn planted(labels: Vec<usize>, theta: Vec<f64>, alpha: Vec<f64>) -> ModelParams {
        let k = labels.iter().max().unwrap() + 1;
        let m = alpha.len() + 1;
        ModelParams::new(k, m, labels, theta, Affinity::Planted { p: 0.5, q: 0.1, alpha })
            .unwrap()
    }

    #[test]
    fn validate_identifiability_examples() {
        let ok = planted(vec![0, 0, 1, 1], vec![1.0; 4], vec![0.1]);
        assert!(validate(&ok).is_valid());

        let bad = planted(vec![0, 0, 1, 1], vec![2.0, 0.5, 1.0, 1.0], vec![0.1]);
        let report = validate(&bad);
        assert!(!report.is_valid());
        assert!(report.violations[0].contains("identifiability"));

        let ok = planted(vec![0, 0, 1, 1], vec![1.5, 0.5, 1.0, 1.0], vec![0.1]);
        let report = validate(&ok);
        assert!(report.is_valid());
        assert_eq!(report.community_sizes, vec![2, 2]);
    }

    #[test]
    fn validate_reports_every_violation() {
        let mut params = planted(vec![0, 1, 1], vec![1.0, -1.0, 3.0], vec![0.1]);
        params.affinity = Affinity::Planted {
            p: 0.1,
            q: 0.2,
            alpha: vec![-1.0],
        };
        let report = validate(&params);
        assert_eq!(report.violations.len(), 3, "{:?}", report.violations);
        // sizes (1, 2) are out of order
        assert_eq!(report.relabeling, Some(vec![1, 0]));
    }

    #[test]
    fn validate_rejects_probability_above_one() {
        let params = planted(vec![0, 0, 1, 1], vec![1.0; 4], vec![1.5]);
        let report = validate(&params);
        assert!(report.violations.iter().any(|v| v.contains("> 1")));
    }

    #[test]
    fn edge_probability_examples() {
        // θ ≡ 1, e = (2, 6) across communities: 2 α_2 q
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1];
        let params = planted(labels.clone(), vec![1.0; 8], vec![0.2, 0.05]);
        let p = params.edge_probability(&Edge::from_nodes(&[1, 5])).unwrap();
        assert!((p - 2.0 * 0.2 * 0.1).abs() < 1e-15);

        let mut phi = GeneralAffinity::new();
        phi.insert(&[0, 1], 0.03).unwrap();
        let theta = vec![1.0, 1.2, 1.0, 1.0, 0.8, 0.9, 1.1, 1.0];
        let general =
            ModelParams::new(2, 2, labels, theta.clone(), Affinity::General(phi)).unwrap();
        let p = general.edge_probability(&Edge::from_nodes(&[1, 5])).unwrap();
        assert!((p - 2.0 * theta[1] * theta[5] * 0.03).abs() < 1e-15);
        // affinity missing for (1, 1) means zero
        assert_eq!(general.edge_probability(&Edge::from_nodes(&[0, 1])).unwrap(), 0.0);
        assert!(general.edge_probability(&Edge::from_nodes(&[0, 1, 2])).is_err());
    }

    #[test]
    fn zero_affinity_gives_zero_probability() {
        let params = planted(vec![0, 0, 1], vec![1.0, 1.0, 1.0], vec![0.0, 0.0]);
        for m in 2..=3 {
            for_each_multiset(3, m, |e| {
                assert_eq!(params.edge_probability(&Edge::from_nodes(e)).unwrap(), 0.0);
            });
        }
    }

    #[test]
    fn max_probability_matches_enumeration() {
        let theta = vec![1.8, 0.2, 0.5, 1.5, 0.9, 1.1, 1.0];
        let labels = vec![0, 0, 1, 1, 2, 2, 2];
        let mut phi = GeneralAffinity::new();
        for_each_multiset(3, 2, |l| phi.insert(l, 0.01 * (1 + l[0] + 2 * l[1]) as f64).unwrap());
        for_each_multiset(3, 3, |l| phi.insert(l, 0.002 * (3 + l[0] * l[2]) as f64).unwrap());
        for_each_multiset(3, 4, |l| phi.insert(l, 0.0005 * (1 + l[3]) as f64).unwrap());
        let params = ModelParams::new(3, 4, labels, theta, Affinity::General(phi)).unwrap();
        for m in 2..=4 {
            let mut brute = 0.0f64;
            for_each_multiset(7, m, |e| brute = brute.max(params.probability_of_sorted(e)));
            let fast = params.max_edge_probability(m);
            assert!((fast - brute).abs() <= 1e-15 * brute, "m = {m}: {fast} vs {brute}");
        }
    }

    #[test]
    fn asymmetric_affinity_rejected() {
        let mut phi = GeneralAffinity::new();
        phi.insert(&[0, 1, 1], 0.2).unwrap();
        phi.insert(&[1, 0, 1], 0.2).unwrap();
        assert!(phi.insert(&[1, 1, 0], 0.3).is_err());
    }

    #[test]
    fn canonicalize_orders_sizes() {
        let mut phi = GeneralAffinity::new();
        phi.insert(&[0, 1], 0.1).unwrap();
        phi.insert(&[1, 1], 0.3).unwrap();
        let params =
            ModelParams::new(2, 2, vec![0, 1, 1], vec![1.0; 3], Affinity::General(phi)).unwrap();
        let (canon, perm) = params.canonicalize();
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(canon.labels, vec![1, 0, 0]);
        assert_eq!(canon.community_sizes(), vec![2, 1]);
        match &canon.affinity {
            Affinity::General(g) => assert_eq!(g.get(&[0, 0]), 0.3),
            _ => unreachable!(),
        }
        assert_eq!(validate(&canon).relabeling, None);
    }
}
