//! Leading eigenpairs by absolute eigenvalue, row normalisation and basis alignment.

pub mod embedding;
pub mod lanczos;

pub use embedding::{
    leading_eigenpairs, row_normalize, sign_align, Alignment, SpectralEmbedding, ZERO_ROW_EPS,
};
pub use lanczos::{dense_eigenpairs, eigenpairs, lanczos_eigenpairs, EigenOptions, EigenPairs};
