//! Theory-facing quantities: assumption checks on the population model and deviation
//! statistics of a sampled embedding against the population embedding.

use crate::linalg::DenseMatrix;
use crate::model::ModelParams;
use crate::projection::{population_matrix, Difference, PopulationModel, SparseSymMatrix};
use crate::spectral::{
    dense_eigenpairs, eigenpairs, row_normalize, sign_align, EigenOptions, SpectralEmbedding,
    ZERO_ROW_EPS,
};
use crate::Result;

pub const DEFAULT_C0: f64 = 1.0;

/// Population eigenpairs use dense Jacobi up to this size, Lanczos above it.
pub const POPULATION_DENSE_MAX_N: usize = 512;

/// Exact-recovery radius for pair thresholding: `1 / (2√2)`.
pub fn recovery_radius() -> f64 {
    1.0 / (2.0 * std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub max_size: usize,
    /// `n_1 / n_K`.
    pub size_ratio: f64,
    /// `|λ_1| / |λ_K|`.
    pub kappa: f64,
    pub lambda_1: f64,
    pub lambda_k: f64,
    /// `θ̃_max / θ̃_min`.
    pub gamma: f64,
    /// `max{n max_ij P_ij, c0 log n}`.
    pub d: f64,
    /// `γ K^{3/2} √(d log n) / |λ_K|`.
    pub cond1: f64,
    /// `γ √(d log n) / |λ_K|`.
    pub cond2: f64,
    pub full_rank: bool,
}

/// The `K` leading eigenpairs of `P`.
pub fn population_embedding(pop: &PopulationModel, seed: u64) -> Result<SpectralEmbedding> {
    let k = pop.k();
    let pairs = if pop.n() <= POPULATION_DENSE_MAX_N {
        dense_eigenpairs(&pop.p, k)?
    } else {
        let opts = EigenOptions {
            tol: 1e-12,
            ..EigenOptions::default()
        };
        eigenpairs(&pop.p, k, &opts, seed)?
    };
    Ok(SpectralEmbedding::from_pairs(pairs))
}

/// Builds the report from an already computed population model and embedding.
pub fn assumption_report_from(
    pop: &PopulationModel,
    emb_p: &SpectralEmbedding,
    max_size: usize,
    c0: f64,
) -> AssumptionReport {
    let n = pop.n();
    let k = pop.k();
    let mut sizes = vec![0usize; k];
    pop.labels.iter().for_each(|&g| sizes[g] += 1);
    let (nmax, nmin) = (
        *sizes.iter().max().unwrap_or(&0),
        *sizes.iter().min().unwrap_or(&0),
    );
    let lambda_1 = emb_p.eigenvalues[0];
    let lambda_k = emb_p.eigenvalues[k - 1];
    let (tmax, tmin) = pop
        .theta_tilde
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &t| (a.max(t), b.min(t)));
    let gamma = tmax / tmin;
    let logn = (n as f64).ln();
    let d = (n as f64 * pop.p.max_abs()).max(c0 * logn);
    let rate = (d * logn).sqrt() / lambda_k.abs();
    AssumptionReport {
        max_size,
        size_ratio: nmax as f64 / nmin as f64,
        kappa: lambda_1.abs() / lambda_k.abs(),
        lambda_1,
        lambda_k,
        gamma,
        d,
        cond1: gamma * (k as f64).powf(1.5) * rate,
        cond2: gamma * rate,
        full_rank: lambda_k.abs() > 1e-10 * lambda_1.abs(),
    }
}

pub fn assumption_report(params: &ModelParams, c0: f64) -> Result<AssumptionReport> {
    let pop = population_matrix(params)?;
    let emb = population_embedding(&pop, 0)?;
    Ok(assumption_report_from(&pop, &emb, params.max_size, c0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDeviation {
    /// `‖A - P‖`.
    pub spec_dev: f64,
    /// `‖A - P‖ / √d`.
    pub spec_ratio: f64,
}

/// Spectral norm of `A - P` (largest `|λ|` of the symmetric difference).
pub fn spectral_deviation(
    a: &SparseSymMatrix,
    p: &DenseMatrix,
    d: f64,
) -> Result<SpectralDeviation> {
    if a.n() != p.rows() {
        return Err(crate::Error::Dimension(format!(
            "A is {0}x{0} but P is {1}x{1}",
            a.n(),
            p.rows()
        )));
    }
    let diff = Difference { left: a, right: p };
    let opts = EigenOptions {
        tol: 1e-10,
        ..EigenOptions::default()
    };
    let pairs = eigenpairs(&diff, 1, &opts, 0x5eed)?;
    let spec_dev = pairs.values[0].abs();
    Ok(SpectralDeviation {
        spec_dev,
        spec_ratio: spec_dev / d.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoInfDeviation {
    /// `‖Û sgn(H) - U‖_{2,∞}`.
    pub two_inf_dev: f64,
    /// `‖Û sgn(H) - U‖_F`.
    pub frobenius_dev: f64,
    /// `two_inf_dev · |λ_K| / (√(d log n) ‖U‖_{2,∞})`.
    pub two_inf_normalized: f64,
    /// `‖Û* sgn(H) - U*‖_{2,∞}`.
    pub row_norm_two_inf: f64,
    pub alignment_degenerate: bool,
}

pub fn twoinf_deviation(
    emb_a: &SpectralEmbedding,
    emb_p: &SpectralEmbedding,
    report: &AssumptionReport,
) -> Result<TwoInfDeviation> {
    let al = sign_align(&emb_a.u, &emb_p.u)?;
    let diff = emb_a.u.matmul(&al.rotation).sub(&emb_p.u);
    let two_inf_dev = diff.two_to_inf_norm();
    let n = emb_p.n() as f64;
    let rate = (report.d * n.ln()).sqrt() / report.lambda_k.abs() * emb_p.u.two_to_inf_norm();
    let (ustar_a, _) = row_normalize(&emb_a.u, ZERO_ROW_EPS);
    let (ustar_p, _) = row_normalize(&emb_p.u, ZERO_ROW_EPS);
    let row_norm_two_inf = ustar_a.matmul(&al.rotation).sub(&ustar_p).two_to_inf_norm();
    Ok(TwoInfDeviation {
        two_inf_dev,
        frobenius_dev: diff.frobenius_norm(),
        two_inf_normalized: two_inf_dev / rate,
        row_norm_two_inf,
        alignment_degenerate: al.degenerate,
    })
}

/// All per-trial deviation statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationStats {
    pub spectral: SpectralDeviation,
    pub two_inf: TwoInfDeviation,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Affinity;

    fn planted(n: usize, k: usize, theta: Vec<f64>, alpha: Vec<f64>) -> ModelParams {
        let labels = (0..n).map(|i| i * k / n).collect();
        ModelParams::new(k, alpha.len() + 1, labels, theta, Affinity::Planted { p: 0.5, q: 0.1, alpha })
            .unwrap()
    }

    #[test]
    fn hsbm_gamma_is_one() {
        let params = planted(40, 2, vec![1.0; 40], vec![0.01, 0.0005]);
        let r = assumption_report(&params, DEFAULT_C0).unwrap();
        assert!((r.gamma - 1.0).abs() < 1e-12);
        assert_eq!(r.size_ratio, 1.0);
        assert!(r.kappa >= 1.0);
        assert!(r.full_rank);
        assert!(r.d >= (40f64).ln());
    }

    #[test]
    fn uniform_planted_eigengap_lower_bound() {
        // m-uniform: λ_K >= (p - q) m α_m n_K^{m-1}
        for m in 2..=4usize {
            let n = 30;
            let mut alpha = vec![0.0; m - 1];
            alpha[m - 2] = 1e-4;
            let theta: Vec<f64> = (0..n)
                .map(|i| if i % 2 == 0 { 1.2 } else { 0.8 })
                .collect();
            let params = planted(n, 3, theta, alpha);
            let r = assumption_report(&params, DEFAULT_C0).unwrap();
            let bound = 0.4 * m as f64 * 1e-4 * 10f64.powi(m as i32 - 1);
            assert!(r.lambda_k >= bound * (1.0 - 1e-12), "m={m}: {} < {bound}", r.lambda_k);
        }
    }

    #[test]
    fn constant_affinity_is_rank_deficient() {
        use crate::model::GeneralAffinity;
        let mut phi = GeneralAffinity::new();
        for l in [[0, 0], [0, 1], [1, 1]] {
            phi.insert(&l, 0.05).unwrap();
        }
        let params =
            ModelParams::new(2, 2, vec![0, 0, 0, 1, 1, 1], vec![1.0; 6], Affinity::General(phi))
                .unwrap();
        assert!(!assumption_report(&params, DEFAULT_C0).unwrap().full_rank);
    }

    #[test]
    fn deviation_of_population_against_itself_is_zero() {
        let params = planted(20, 2, vec![1.0; 20], vec![0.02, 0.001]);
        let pop = population_matrix(&params).unwrap();
        let a = crate::projection::SparseSymMatrix::from_triplets(
            20,
            (0..20).flat_map(|i| (i..20).map(move |j| (i, j))).map(|(i, j)| (i, j, pop.p[(i, j)])),
        );
        let s = spectral_deviation(&a, &pop.p, 4.0).unwrap();
        assert!(s.spec_dev < 1e-14);

        let emb = population_embedding(&pop, 0).unwrap();
        let r = assumption_report_from(&pop, &emb, 3, DEFAULT_C0);
        let t = twoinf_deviation(&emb, &emb, &r).unwrap();
        assert!(t.two_inf_dev < 1e-14 && t.row_norm_two_inf < 1e-14);
    }

    #[test]
    fn rank_one_difference() {
        let n = 5;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) / 55f64.sqrt()).collect();
        let c = -2.5;
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] = -c * v[i] * v[j];
            }
        }
        let a = crate::projection::SparseSymMatrix::from_triplets(n, []);
        let s = spectral_deviation(&a, &p, 1.0).unwrap();
        assert!((s.spec_dev - c.abs()).abs() < 1e-12);
    }
}
