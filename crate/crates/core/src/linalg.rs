//! Small dense linear algebra: row-major matrices, a symmetric operator trait, the
//! cyclic Jacobi eigensolver (reference route), Householder + implicit QL for the
//! projected problems inside Lanczos, and one-sided Jacobi SVD.

use std::fmt;

/// Symmetric linear operator `y = A x`.
pub trait SymOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                r.iter().copied()
            })
            .collect();
        DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other`.
    pub fn t_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "t_matmul shape mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for i in 0..self.rows {
            for (a_idx, &a) in self.row(i).iter().enumerate() {
                let dst = &mut out.data[a_idx * other.cols..(a_idx + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(other.row(i)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `‖X‖_{2,∞}`: the largest Euclidean row norm.
    pub fn two_to_inf_norm(&self) -> f64 {
        (0..self.rows).map(|i| norm(self.row(i))).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl SymOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }
}

/// Materialises an operator column by column.
pub fn to_dense<O: SymOperator + ?Sized>(op: &O) -> DenseMatrix {
    let n = op.dim();
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        for i in 0..n {
            out[(i, j)] = col[i];
        }
        e[j] = 0.0;
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigen-decomposition of a symmetric matrix: `values[k]` pairs with column `k`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    /// Indices ordered by `(|λ| desc, λ desc, index)`.
    pub fn order_by_magnitude(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| {
            let (x, y) = (self.values[a], self.values[b]);
            y.abs()
                .total_cmp(&x.abs())
                .then(y.total_cmp(&x))
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Cyclic Jacobi eigensolver for a dense symmetric matrix. Intended for `n ≲ 500`.
pub fn jacobi_eigen(a: &DenseMatrix) -> SymEigen {
    assert_eq!(a.rows, a.cols, "jacobi_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return SymEigen {
            values: vec![0.0; n],
            vectors: v,
        };
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymEigen {
        values: (0..n).map(|i| m[(i, i)]).collect(),
        vectors: v,
    }
}

/// Householder tridiagonalisation followed by implicit QL (EISPACK tred2/tql2).
/// Eigenvalues come out ascending.
pub fn ql_eigen(a: &DenseMatrix) -> SymEigen {
    assert_eq!(a.rows, a.cols, "ql_eigen needs a square matrix");
    let n = a.rows;
    if n == 0 {
        return SymEigen {
            values: vec![],
            vectors: DenseMatrix::zeros(0, 0),
        };
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    SymEigen {
        values: d,
        vectors: v,
    }
}

fn tred2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.rows;
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.rows;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // ascending order
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                let tmp = v[(j, i)];
                v[(j, i)] = v[(j, k)];
                v[(j, k)] = tmp;
            }
        }
    }
}

/// Thin SVD `A = U diag(σ) Vᵀ` (rows ≥ cols) by one-sided Jacobi rotations.
/// Columns of `U` belonging to zero singular values are completed to an orthonormal set.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

pub fn jacobi_svd(a: &DenseMatrix) -> Svd {
    let (m, n) = (a.rows, a.cols);
    assert!(m >= n, "jacobi_svd expects rows >= cols");
    let mut u = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (u[(i, p)], u[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * x - s * y;
                    u[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| norm(&u.column(j))).collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let mut cols: Vec<Option<Vec<f64>>> = (0..n)
        .map(|j| {
            if sigma[j] > 1e-14 * smax && sigma[j] > 0.0 {
                Some(u.column(j).iter().map(|x| x / sigma[j]).collect())
            } else {
                None
            }
        })
        .collect();
    // complete missing directions with Gram-Schmidt on unit vectors
    let mut basis: Vec<Vec<f64>> = cols.iter().flatten().cloned().collect();
    let mut unit = 0;
    for slot in cols.iter_mut().filter(|c| c.is_none()) {
        loop {
            let mut cand = vec![0.0; m];
            cand[unit] = 1.0;
            unit += 1;
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(&cand, b);
                    cand.iter_mut().zip(b).for_each(|(c, bi)| *c -= proj * bi);
                }
            }
            let nc = norm(&cand);
            if nc > 1e-8 {
                cand.iter_mut().for_each(|c| *c /= nc);
                basis.push(cand.clone());
                *slot = Some(cand);
                break;
            }
        }
    }
    let cols: Vec<Vec<f64>> = cols.into_iter().map(Option::unwrap).collect();
    Svd {
        u: DenseMatrix::from_columns(&cols, m),
        sigma,
        v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = rng_from_seed(seed);
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        a
    }

    fn check_decomposition(a: &DenseMatrix, eig: &SymEigen, tol: f64) {
        let n = a.rows();
        let vt_v = eig.vectors.t_matmul(&eig.vectors);
        assert!(vt_v.sub(&DenseMatrix::identity(n)).frobenius_norm() < tol);
        let av = a.matmul(&eig.vectors);
        for k in 0..n {
            for i in 0..n {
                let r = av[(i, k)] - eig.values[k] * eig.vectors[(i, k)];
                assert!(r.abs() < tol * a.frobenius_norm().max(1.0), "residual {r}");
            }
        }
    }

    #[test]
    fn jacobi_and_ql_agree() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (30, 4), (64, 5)] {
            let a = random_symmetric(n, seed);
            let j = jacobi_eigen(&a);
            let q = ql_eigen(&a);
            check_decomposition(&a, &j, 1e-11);
            check_decomposition(&a, &q, 1e-11);
            let mut jv = j.values.clone();
            jv.sort_by(f64::total_cmp);
            for (x, y) in jv.iter().zip(&q.values) {
                assert!((x - y).abs() < 1e-12 * n as f64);
            }
        }
    }

    #[test]
    fn diagonal_and_zero_matrices() {
        let d = DenseMatrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, -2.0],
        ]);
        let e = jacobi_eigen(&d);
        let order = e.order_by_magnitude();
        assert_eq!(order, vec![0, 2, 1]);
        let z = jacobi_eigen(&DenseMatrix::zeros(3, 3));
        assert_eq!(z.values, vec![0.0; 3]);
        let q = ql_eigen(&d);
        assert_eq!(q.values, vec![-2.0, 1.0, 3.0]);
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = rng_from_seed(11);
        for n in 1..6 {
            let a = DenseMatrix::from_row_major(
                n,
                n,
                (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            );
            let svd = jacobi_svd(&a);
            let mut us = svd.u.clone();
            for i in 0..n {
                for j in 0..n {
                    us[(i, j)] *= svd.sigma[j];
                }
            }
            let rec = us.matmul(&svd.v.transpose());
            assert!(rec.sub(&a).frobenius_norm() < 1e-12);
            assert!(svd.u.t_matmul(&svd.u).sub(&DenseMatrix::identity(n)).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn svd_rank_deficient_completes_basis() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let svd = jacobi_svd(&a);
        assert!(svd.sigma.iter().any(|&s| s < 1e-12));
        let utu = svd.u.t_matmul(&svd.u);
        assert!(utu.sub(&DenseMatrix::identity(2)).frobenius_norm() < 1e-12);
    }
}
