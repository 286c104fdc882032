//! Branching-factor inference for contact networks whose edges are observed
//! with false positives (rate α) and false negatives (rate β).
//!
//! The crate covers the full pipeline: random-graph generators, the edge-flip
//! noise model, exact moments of the observed degree sums, the
//! three-replicate method-of-moments estimator of κ with its variance, epidemic
//! quantities derived from κ, edge-list ingestion and Monte Carlo harnesses.

pub mod error;
pub mod estimator;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod ingest;
pub mod moments;
pub mod noise;
pub mod replicates;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{DegreeStats, Graph, Vertex};
pub use noise::NoiseParams;
pub use replicates::ReplicateSet;
pub use rng::Seed;
