use std::io::Write;

use super::lanczos::{eigenpairs, EigenOptions, EigenPairs};
use crate::linalg::{jacobi_svd, norm, DenseMatrix, SymOperator};
use crate::Result;

/// Rows with norm at or below this are treated as zero rows.
pub const ZERO_ROW_EPS: f64 = 1e-12;

/// Below this smallest singular value of `ÛᵀU` the alignment is reported as degenerate.
pub const ALIGNMENT_DEGENERACY: f64 = 1e-8;

/// `K` leading eigenpairs with the raw and row-normalised eigenvector matrices.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    /// Ordered by `|λ|` descending.
    pub eigenvalues: Vec<f64>,
    pub u: DenseMatrix,
    pub ustar: DenseMatrix,
    pub zero_rows: Vec<usize>,
    pub residuals: Vec<f64>,
    pub norm_estimate: f64,
    /// `|λ_K|` ties the next eigenvalue magnitude; the subspace is not unique.
    pub tie_at_k: bool,
    /// `|λ_K|` is numerically zero.
    pub rank_deficient: bool,
}

impl SpectralEmbedding {
    pub fn from_pairs(pairs: EigenPairs) -> Self {
        let rank_deficient = pairs.rank_deficient();
        let (ustar, zero_rows) = row_normalize(&pairs.vectors, ZERO_ROW_EPS);
        SpectralEmbedding {
            eigenvalues: pairs.values,
            u: pairs.vectors,
            ustar,
            zero_rows,
            residuals: pairs.residuals,
            norm_estimate: pairs.norm_estimate,
            tie_at_k: pairs.tie_at_k,
            rank_deficient,
        }
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn k(&self) -> usize {
        self.u.cols()
    }

    /// CSV: a header row of eigenvalues, a column header, then one row per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "eigenvalue")?;
        for v in &self.eigenvalues {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
        write!(w, "node")?;
        for k in 1..=self.k() {
            write!(w, ",lambda_rank_{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.n() {
            write!(w, "{}", i + 1)?;
            for x in self.u.row(i) {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn leading_eigenpairs<O: SymOperator + ?Sized>(
    a: &O,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<SpectralEmbedding> {
    let opts = EigenOptions {
        tol,
        ..EigenOptions::default()
    };
    Ok(SpectralEmbedding::from_pairs(eigenpairs(a, k, &opts, seed)?))
}

/// Scales each row to unit norm; rows with norm `<= eps` stay zero and are reported.
pub fn row_normalize(u: &DenseMatrix, eps: f64) -> (DenseMatrix, Vec<usize>) {
    let mut out = DenseMatrix::zeros(u.rows(), u.cols());
    let mut zero_rows = Vec::new();
    for i in 0..u.rows() {
        let r = norm(u.row(i));
        if r > eps {
            out.row_mut(i)
                .iter_mut()
                .zip(u.row(i))
                .for_each(|(o, x)| *o = x / r);
        } else {
            zero_rows.push(i);
        }
    }
    (out, zero_rows)
}

/// Orthogonal alignment `sgn(H) = Ū V̄ᵀ` of `H = ÛᵀU = Ū Σ̄ V̄ᵀ`.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub rotation: DenseMatrix,
    pub singular_values: Vec<f64>,
    /// `H` is rank-deficient: the subspaces are nearly orthogonal somewhere.
    pub degenerate: bool,
}

pub fn sign_align(uhat: &DenseMatrix, u: &DenseMatrix) -> Result<Alignment> {
    if uhat.cols() != u.cols() || uhat.rows() != u.rows() {
        return Err(crate::Error::Dimension(format!(
            "cannot align {}x{} with {}x{}",
            uhat.rows(),
            uhat.cols(),
            u.rows(),
            u.cols()
        )));
    }
    let h = uhat.t_matmul(u);
    let svd = jacobi_svd(&h);
    let rotation = svd.u.matmul(&svd.v.transpose());
    let smin = svd.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Alignment {
        rotation,
        degenerate: smin < ALIGNMENT_DEGENERACY,
        singular_values: svd.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn rotation(angle: f64) -> DenseMatrix {
        let (s, c) = angle.sin_cos();
        DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]])
    }

    #[test]
    fn row_normalize_examples() {
        let u = DenseMatrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0], vec![0.0, -2.0]]);
        let (ustar, zero) = row_normalize(&u, ZERO_ROW_EPS);
        assert_eq!(ustar.row(0), &[0.6, 0.8]);
        assert_eq!(ustar.row(1), &[0.0, 0.0]);
        assert_eq!(ustar.row(2), &[0.0, -1.0]);
        assert_eq!(zero, vec![1]);
    }

    #[test]
    fn alignment_of_identical_bases_is_identity() {
        let u = DenseMatrix::from_rows(&[
            vec![0.6, 0.0],
            vec![0.8, 0.0],
            vec![0.0, 1.0],
        ]);
        let al = sign_align(&u, &u).unwrap();
        assert!(al.rotation.sub(&DenseMatrix::identity(2)).max_abs() < 1e-14);
        assert!(!al.degenerate);
    }

    #[test]
    fn alignment_recovers_rotation() {
        let u = DenseMatrix::from_rows(&[
            vec![0.5, 0.5],
            vec![0.5, -0.5],
            vec![0.5, 0.5],
            vec![0.5, -0.5],
        ]);
        for angle in [0.3, 1.7, -2.9] {
            let r = rotation(angle);
            let uhat = u.matmul(&r);
            let al = sign_align(&uhat, &u).unwrap();
            assert!(al.rotation.sub(&r.transpose()).max_abs() < 1e-12);
            assert!(uhat.matmul(&al.rotation).sub(&u).max_abs() < 1e-12);
            let o = al.rotation.t_matmul(&al.rotation);
            assert!(o.sub(&DenseMatrix::identity(2)).frobenius_norm() < 1e-10);
        }
        // reflection
        let f = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let al = sign_align(&u.matmul(&f), &u).unwrap();
        assert!(al.rotation.sub(&f).max_abs() < 1e-12);
    }

    #[test]
    fn orthogonal_subspaces_are_degenerate() {
        let uhat = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]);
        let u = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]);
        assert!(sign_align(&uhat, &u).unwrap().degenerate);
    }

    #[test]
    fn embedding_csv_layout() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let emb = SpectralEmbedding::from_pairs(crate::spectral::dense_eigenpairs(&a, 1).unwrap());
        let mut buf = Vec::new();
        emb.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "eigenvalue,2\nnode,lambda_rank_1\n1,1\n2,0\n"
        );
    }
}
