//! Block Lanczos with full reorthogonalisation and thick restarts.
//!
//! The projected matrix `T = Vᵀ A V` is assembled explicitly from the stored products
//! `A V`, so restarts simply keep the wanted Ritz vectors and continue from the last
//! orthogonalised block. Ritz pairs are ranked by `|θ|`, so both ends of the spectrum
//! compete for the `k` slots. The block size equals `k`, which lets repeated
//! eigenvalues of multiplicity up to `k` be resolved.

use rand::Rng;

use crate::linalg::{dot, jacobi_eigen, norm, ql_eigen, to_dense, DenseMatrix, SymOperator};
use crate::seed::{rng_from_seed, StreamRng};
use crate::{Error, Result};

/// Dimension up to which the dense Jacobi solver is used as a fallback.
pub const DENSE_FALLBACK_MAX_N: usize = 512;

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Relative residual target: `‖A u - λ u‖ <= tol · ‖A‖`.
    pub tol: f64,
    /// Defaults to `50 n` operator applications.
    pub max_matvecs: Option<usize>,
    pub max_basis: Option<usize>,
    /// Allow the dense Jacobi fallback for `n <= 512` when Lanczos stalls.
    pub dense_fallback: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            max_matvecs: None,
            max_basis: None,
            dense_fallback: true,
        }
    }
}

/// Leading eigenpairs ordered by `(|λ| desc, λ desc)`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `n × k`, unit columns, largest-magnitude entry of each column positive.
    pub vectors: DenseMatrix,
    pub residuals: Vec<f64>,
    pub norm_estimate: f64,
    pub matvecs: usize,
    /// `|λ_k|` and the next Ritz value's magnitude coincide to `1e-10 ‖A‖`.
    pub tie_at_k: bool,
    pub dense_fallback: bool,
}

impl EigenPairs {
    /// `|λ_k| <= 1e-10 |λ_1|`: `k` exceeds the numerical rank.
    pub fn rank_deficient(&self) -> bool {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => b.abs() <= 1e-10 * a.abs() || *a == 0.0,
            _ => false,
        }
    }
}

/// Flips each column so that its largest-magnitude entry (lowest index on ties) is positive.
pub fn apply_sign_convention(vectors: &mut DenseMatrix) {
    for j in 0..vectors.cols() {
        let mut best = 0usize;
        for i in 1..vectors.rows() {
            if vectors[(i, j)].abs() > vectors[(best, j)].abs() {
                best = i;
            }
        }
        if vectors.rows() > 0 && vectors[(best, j)] < 0.0 {
            for i in 0..vectors.rows() {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
}

fn random_unit(n: usize, rng: &mut StreamRng) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// Two-pass classical Gram-Schmidt against `basis` then `extra`. Returns the norm ratio.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>], extra: &[Vec<f64>]) -> f64 {
    let before = norm(v);
    for _ in 0..2 {
        for b in basis.iter().chain(extra) {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    if before == 0.0 {
        0.0
    } else {
        norm(v) / before
    }
}

/// Orthonormalises candidates against the basis; dependent ones are replaced by fresh
/// random directions while the space is not exhausted.
fn next_block(
    candidates: Vec<Vec<f64>>,
    basis: &[Vec<f64>],
    n: usize,
    rng: &mut StreamRng,
) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
    for mut c in candidates {
        if basis.len() + out.len() >= n {
            break;
        }
        let mut ratio = orthogonalize(&mut c, basis, &out);
        let mut attempts = 0;
        while ratio < 1e-8 && attempts < 8 {
            c = random_unit(n, rng);
            ratio = orthogonalize(&mut c, basis, &out);
            attempts += 1;
        }
        if ratio < 1e-8 {
            continue;
        }
        let s = norm(&c);
        c.iter_mut().for_each(|x| *x /= s);
        out.push(c);
    }
    out
}

fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        y.abs().total_cmp(&x.abs()).then(y.total_cmp(&x)).then(a.cmp(&b))
    });
    idx
}

fn combine(columns: &[Vec<f64>], coeffs: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (c, &s) in columns.iter().zip(coeffs) {
        if s != 0.0 {
            out.iter_mut().zip(c).for_each(|(o, x)| *o += s * x);
        }
    }
    out
}

/// The `k` eigenpairs of largest `|λ|`.
pub fn lanczos_eigenpairs<O: SymOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &EigenOptions,
    seed: u64,
) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("need 1 <= K <= n, got K = {k}, n = {n}")));
    }
    let block = k;
    let max_basis = opts
        .max_basis
        .unwrap_or((4 * k).max(2 * k + 40))
        .max(k + 2 * block)
        .min(n);
    let keep = (k + 10).min(max_basis.saturating_sub(2 * block)).max(k);
    let max_matvecs = opts.max_matvecs.unwrap_or(50 * n).max(max_basis);

    let mut rng = rng_from_seed(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut t: Vec<Vec<f64>> = Vec::new();
    let start: Vec<Vec<f64>> = (0..block).map(|_| random_unit(n, &mut rng)).collect();
    let mut pending = next_block(start, &basis, n, &mut rng);
    let mut matvecs = 0usize;
    let mut last_residuals;

    loop {
        // extend the basis by the pending block
        let first_new = basis.len();
        for v in pending.drain(..) {
            let mut w = vec![0.0; n];
            op.apply(&v, &mut w);
            matvecs += 1;
            basis.push(v);
            images.push(w);
        }
        let j = basis.len();
        for row in &mut t {
            row.resize(j, 0.0);
        }
        t.resize(j, vec![0.0; j]);
        for b in first_new..j {
            for a in 0..=b {
                // symmetrised estimate of v_aᵀ A v_b
                let x = 0.5 * (dot(&basis[a], &images[b]) + dot(&basis[b], &images[a]));
                t[a][b] = x;
                t[b][a] = x;
            }
        }

        let tmat = DenseMatrix::from_rows(&t);
        let eig = ql_eigen(&tmat);
        let order = magnitude_order(&eig.values);
        let norm_estimate = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let ritz_coeffs = |idx: usize| eig.vectors.column(idx);

        let mut residuals = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let s = ritz_coeffs(idx);
            let theta = eig.values[idx];
            let av = combine(&images, &s, n);
            let v = combine(&basis, &s, n);
            let r: Vec<f64> = av.iter().zip(&v).map(|(a, b)| a - theta * b).collect();
            residuals.push(norm(&r));
        }
        let exhausted = j >= n;
        let converged = exhausted
            || (order.len() >= k && residuals.iter().all(|&r| r <= opts.tol * norm_estimate))
            || norm_estimate == 0.0 && order.len() >= k;
        if converged {
            let mut vectors = DenseMatrix::zeros(n, k);
            let mut values = Vec::with_capacity(k);
            for (col, &idx) in order.iter().take(k).enumerate() {
                let mut v = combine(&basis, &ritz_coeffs(idx), n);
                let s = norm(&v);
                v.iter_mut().for_each(|x| *x /= s);
                for i in 0..n {
                    vectors[(i, col)] = v[i];
                }
                values.push(eig.values[idx]);
            }
            apply_sign_convention(&mut vectors);
            let tie_at_k = order.len() > k
                && (eig.values[order[k]].abs() - eig.values[order[k - 1]].abs()).abs()
                    <= 1e-10 * norm_estimate;
            return Ok(EigenPairs {
                values,
                vectors,
                residuals,
                norm_estimate,
                matvecs,
                tie_at_k,
                dense_fallback: false,
            });
        }
        last_residuals = residuals;
        if matvecs >= max_matvecs {
            break;
        }

        // the next block continues the Krylov sequence from the newest products
        let mut candidates: Vec<Vec<f64>> = images[first_new..].to_vec();
        for c in &mut candidates {
            orthogonalize(c, &basis, &[]);
        }

        if j + block > max_basis {
            // thick restart on the leading `keep` Ritz vectors
            let kept: Vec<usize> = order.iter().take(keep).copied().collect();
            let new_basis: Vec<Vec<f64>> =
                kept.iter().map(|&idx| combine(&basis, &ritz_coeffs(idx), n)).collect();
            let new_images: Vec<Vec<f64>> =
                kept.iter().map(|&idx| combine(&images, &ritz_coeffs(idx), n)).collect();
            basis = new_basis;
            images = new_images;
            t = (0..kept.len())
                .map(|a| {
                    (0..kept.len())
                        .map(|b| if a == b { eig.values[kept[a]] } else { 0.0 })
                        .collect()
                })
                .collect();
        }
        pending = next_block(candidates, &basis, n, &mut rng);
        if pending.is_empty() {
            // invariant subspace smaller than requested rank: pad with random directions
            let fresh: Vec<Vec<f64>> = (0..block).map(|_| random_unit(n, &mut rng)).collect();
            pending = next_block(fresh, &basis, n, &mut rng);
            if pending.is_empty() {
                break;
            }
        }
    }
    Err(Error::NoConvergence {
        matvecs,
        residuals: last_residuals,
    })
}

/// Reference route: dense cyclic Jacobi on the materialised operator.
pub fn dense_eigenpairs(a: &DenseMatrix, k: usize) -> Result<EigenPairs> {
    let n = a.rows();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("need 1 <= K <= n, got K = {k}, n = {n}")));
    }
    let eig = jacobi_eigen(a);
    let order = magnitude_order(&eig.values);
    let mut vectors = DenseMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        for i in 0..n {
            vectors[(i, col)] = eig.vectors[(i, idx)];
        }
        values.push(eig.values[idx]);
    }
    apply_sign_convention(&mut vectors);
    let norm_estimate = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut residuals = Vec::with_capacity(k);
    let av = a.matmul(&vectors);
    for col in 0..k {
        let r: f64 = (0..n)
            .map(|i| (av[(i, col)] - values[col] * vectors[(i, col)]).powi(2))
            .sum();
        residuals.push(r.sqrt());
    }
    let tie_at_k = order.len() > k
        && (eig.values[order[k]].abs() - eig.values[order[k - 1]].abs()).abs()
            <= 1e-10 * norm_estimate;
    Ok(EigenPairs {
        values,
        vectors,
        residuals,
        norm_estimate,
        matvecs: 0,
        tie_at_k,
        dense_fallback: true,
    })
}

/// Lanczos, falling back to dense Jacobi for small operators that fail to converge.
pub fn eigenpairs<O: SymOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &EigenOptions,
    seed: u64,
) -> Result<EigenPairs> {
    match lanczos_eigenpairs(op, k, opts, seed) {
        Err(Error::NoConvergence { .. }) if opts.dense_fallback && op.dim() <= DENSE_FALLBACK_MAX_N => {
            dense_eigenpairs(&to_dense(op), k)
        }
        other => other,
    }
}
