use crate::linalg::DenseMatrix;
use crate::model::ModelParams;
use crate::{Error, Result};

/// Largest `n` for which the dense population matrix is materialised.
pub const POPULATION_MAX_N: usize = 5000;

/// `B_rs = Σ_{m=2}^{M} m Σ_{k_3..k_m ∈ [K]} (Π_l n_{k_l}) Φ(r, s, k_3, .., k_m)`.
pub fn block_matrix(params: &ModelParams) -> DenseMatrix {
    let k = params.k;
    let sizes: Vec<f64> = params.community_sizes().iter().map(|&s| s as f64).collect();
    let mut b = DenseMatrix::zeros(k, k);
    let mut labels = Vec::with_capacity(params.max_size);
    for r in 0..k {
        for s in r..k {
            let mut total = 0.0;
            for m in 2..=params.max_size {
                let mut inner = 0.0;
                // odometer over the m - 2 free labels
                let mut free = vec![0usize; m - 2];
                loop {
                    labels.clear();
                    labels.extend([r, s]);
                    labels.extend_from_slice(&free);
                    labels.sort_unstable();
                    let weight: f64 = free.iter().map(|&c| sizes[c]).product();
                    inner += weight * params.affinity.phi(&labels);
                    let Some(pos) = free.iter().rposition(|&c| c + 1 < k) else {
                        break;
                    };
                    free[pos] += 1;
                    free[pos + 1..].iter_mut().for_each(|c| *c = 0);
                }
                total += m as f64 * inner;
            }
            b[(r, s)] = total;
            b[(s, r)] = total;
        }
    }
    b
}

/// The population matrix `P = E[A] = diag(θ) Z B Zᵀ diag(θ)` and its ingredients.
#[derive(Debug, Clone)]
pub struct PopulationModel {
    pub p: DenseMatrix,
    pub b: DenseMatrix,
    /// 0-based labels; `Z_ik = 1{labels[i] = k}`.
    pub labels: Vec<usize>,
    /// `φ_k = sqrt(Σ_j θ_j² 1{g_j = k})`.
    pub phi: Vec<f64>,
    /// `θ̃_i = θ_i / φ_{g_i}`.
    pub theta_tilde: Vec<f64>,
}

impl PopulationModel {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.b.rows()
    }

    pub fn assignment_matrix(&self) -> DenseMatrix {
        let mut z = DenseMatrix::zeros(self.n(), self.k());
        for (i, &g) in self.labels.iter().enumerate() {
            z[(i, g)] = 1.0;
        }
        z
    }

    /// `diag(φ) B diag(φ)`, which shares its nonzero eigenvalues with `P`.
    pub fn reduced_matrix(&self) -> DenseMatrix {
        let k = self.k();
        let mut r = self.b.clone();
        for i in 0..k {
            for j in 0..k {
                r[(i, j)] *= self.phi[i] * self.phi[j];
            }
        }
        r
    }

    /// Expected average hyperdegree `(Σ_ij P_ij) / n`.
    pub fn average_expected_degree(&self) -> f64 {
        self.p.as_slice().iter().sum::<f64>() / self.n() as f64
    }
}

pub fn population_matrix(params: &ModelParams) -> Result<PopulationModel> {
    let n = params.n;
    if n > POPULATION_MAX_N {
        return Err(Error::Dimension(format!(
            "dense population matrix limited to n <= {POPULATION_MAX_N}, got {n}"
        )));
    }
    let b = block_matrix(params);
    let mut p = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let (ti, gi) = (params.theta[i], params.labels[i]);
        let row = p.row_mut(i);
        for (j, pij) in row.iter_mut().enumerate() {
            *pij = ti * params.theta[j] * b[(gi, params.labels[j])];
        }
    }
    let mut phi = vec![0.0; params.k];
    for (&g, &t) in params.labels.iter().zip(&params.theta) {
        phi[g] += t * t;
    }
    phi.iter_mut().for_each(|x| *x = x.sqrt());
    let theta_tilde = params
        .labels
        .iter()
        .zip(&params.theta)
        .map(|(&g, &t)| t / phi[g])
        .collect();
    Ok(PopulationModel {
        p,
        b,
        labels: params.labels.clone(),
        phi,
        theta_tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Affinity, GeneralAffinity};

    fn planted(n: usize, k: usize, alpha: Vec<f64>, p: f64, q: f64) -> ModelParams {
        let labels = (0..n).map(|i| i * k / n).collect();
        ModelParams::new(k, alpha.len() + 1, labels, vec![1.0; n], Affinity::Planted { p, q, alpha })
            .unwrap()
    }

    #[test]
    fn block_matrix_pairwise() {
        let mut phi = GeneralAffinity::new();
        phi.insert(&[0, 0], 0.3).unwrap();
        phi.insert(&[0, 1], 0.1).unwrap();
        phi.insert(&[1, 1], 0.2).unwrap();
        let params =
            ModelParams::new(2, 2, vec![0, 0, 1], vec![1.0; 3], Affinity::General(phi)).unwrap();
        let b = block_matrix(&params);
        assert_eq!(b, DenseMatrix::from_rows(&[vec![0.6, 0.2], vec![0.2, 0.4]]));
    }

    #[test]
    fn planted_pairwise_block() {
        let b = block_matrix(&planted(6, 2, vec![0.05], 0.8, 0.2));
        let expect = DenseMatrix::from_rows(&[vec![0.08, 0.02], vec![0.02, 0.08]]);
        assert!(b.sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn planted_uniform_block_closed_form() {
        // m-uniform: B_rs = m α_m ((p - q) n_r^{m-2} δ_rs + q n^{m-2})
        let (n, k, p, q) = (12usize, 3usize, 0.9, 0.3);
        for m in 2..=4usize {
            let mut alpha = vec![0.0; m - 1];
            alpha[m - 2] = 1e-3;
            let params = planted(n, k, alpha, p, q);
            let b = block_matrix(&params);
            let nr = (n / k) as f64;
            for r in 0..k {
                for s in 0..k {
                    let delta = if r == s { 1.0 } else { 0.0 };
                    let expect = m as f64
                        * 1e-3
                        * ((p - q) * nr.powi(m as i32 - 2) * delta + q * (n as f64).powi(m as i32 - 2));
                    assert!((b[(r, s)] - expect).abs() < 1e-13 * expect, "m={m} {r}{s}");
                }
            }
        }
    }

    #[test]
    fn two_node_single_community() {
        let params = ModelParams::new(
            1,
            2,
            vec![0, 0],
            vec![1.0, 1.0],
            Affinity::Planted { p: 0.1, q: 0.05, alpha: vec![1.0] },
        )
        .unwrap();
        let pop = population_matrix(&params).unwrap();
        for &x in pop.p.as_slice() {
            assert!((x - 0.2).abs() < 1e-15);
        }
        assert_eq!(pop.phi, vec![2f64.sqrt()]);
    }

    #[test]
    fn factored_entries() {
        let theta = vec![1.5, 0.5, 1.2, 0.8];
        let params = ModelParams::new(
            2,
            3,
            vec![0, 0, 1, 1],
            theta.clone(),
            Affinity::Planted { p: 0.4, q: 0.1, alpha: vec![0.05, 0.01] },
        )
        .unwrap();
        let pop = population_matrix(&params).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = theta[i] * theta[j] * pop.b[(params.labels[i], params.labels[j])];
                assert_eq!(pop.p[(i, j)], expect);
            }
        }
        let z = pop.assignment_matrix();
        assert_eq!(z.row(2), &[0.0, 1.0]);
    }
}
