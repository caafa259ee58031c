//! Weighted clique-expansion adjacency and the population model.

pub mod adjacency;
pub mod population;
pub mod sparse;

pub use adjacency::{weighted_adjacency, weighted_adjacency_exact, ExactAdjacency};
pub use population::{block_matrix, population_matrix, PopulationModel};
pub use sparse::{Difference, SparseSymMatrix};
