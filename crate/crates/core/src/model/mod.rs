//! The degree-corrected hypergraph stochastic block model.

pub mod combinatorics;
pub mod hypergraph;
pub mod params;
pub mod sample;

pub use combinatorics::{ordering_count, rank_multiset, unrank_multiset, MAX_FACTORIAL as MAX_EDGE_SIZE};
pub use hypergraph::{Edge, Hypergraph};
pub use params::{validate, Affinity, GeneralAffinity, ModelParams, ValidationReport};
pub use sample::{
    sample_exact, sample_exact_with, sample_scalable, sample_scalable_with, SampleOptions,
    SampleOutcome,
};
