//! Capacity-constrained batch partitioning for training samples that share
//! textual knowledge descriptions.
//!
//! Samples whose description sets overlap are grouped into the same
//! fixed-size batch so every distinct description is encoded once per batch.
//! The pipeline is:
//!
//! 1. [`dataset`]: load or synthesize samples with description-ID sets.
//! 2. [`simgraph`]: build the intersection-weighted similarity graph.
//! 3. [`spectral`]: embed vertices with the row-normalized top eigenvectors of
//!    the normalized affinity `D^-1/2 W D^-1/2`.
//! 4. [`capkmeans`]: run k-means whose assignment step fills centers in global
//!    ascending-distance order without exceeding batch capacities.
//! 5. [`theory`] and [`costmodel`]: evaluate distinct-description counts,
//!    bounds, cut identities and encoding-cost speedups.
//!
//! [`oracle`] provides exhaustive, random and greedy baselines.

#![allow(clippy::needless_range_loop)]

pub mod capkmeans;
pub mod cli;
pub mod costmodel;
pub mod dataset;
mod error;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod simgraph;
pub mod spectral;
pub mod theory;

pub use capkmeans::{balanced_kmeans, make_capacities, KMeansConfig, KMeansTrace, Partition};
pub use dataset::{Dataset, Sample, TriggerLexicon};
pub use error::{Error, Result};
pub use simgraph::{InvertedIndex, SimilarityGraph};
pub use spectral::SpectralEmbedding;
pub use theory::PartitionReport;

/// Seeded generator on a per-purpose ChaCha stream, so equal seeds given to
/// different components do not produce correlated draws.
pub(crate) fn seeded_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) mod streams {
    pub const PLANTED: u64 = 1;
    pub const RANDOM_PARTITION: u64 = 2;
    pub const KMEANS_INIT: u64 = 3;
    pub const LANCZOS: u64 = 4;
}
