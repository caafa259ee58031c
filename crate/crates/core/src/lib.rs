//! Degree-corrected hypergraph stochastic block models and spectral clustering
//! on the weighted clique-expansion adjacency matrix.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: parameters, exact Bernoulli samplers, hypergraph I/O.
//! - [`projection`]: the weighted adjacency matrix and the population matrix `P = E[A]`.
//! - [`linalg`]: small dense kernels (Jacobi eigensolver, tridiagonal QL, one-sided Jacobi SVD).
//! - [`spectral`]: leading eigenpairs by `|λ|`, row normalisation and eigenbasis alignment.
//! - [`clustering`]: k-means on embedding rows, pair-distance thresholding, misclustering count.
//! - [`diagnostics`]: assumption checks and deviation statistics against the population model.
//! - [`experiment`]: seeded Monte-Carlo sweeps over planted-partition parameters.

pub mod clustering;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod projection;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
