//! Single-pass streaming correlation clustering with pairwise-distance
//! predictions.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: signed instances, clusterings, exact cost, exhaustive
//!   optimum, SBM generation, stream materialisation and edge-list loading.
//! * [`predictor`]: distance oracles, rounding functions and predictor
//!   quality metrics.
//! * [`sketch`]: ℓ0-samplers, cut sparsifiers, effective resistance, the
//!   sparsifier-based cost estimator and word-level space accounting.
//! * [`pivot`]: the offline pivot family for complete graphs.
//! * [`streaming`]: the dynamic-stream and insertion-only algorithms for
//!   complete graphs.
//! * [`ballgrow`]: prediction-guided ball growing for general graphs.
//! * [`harness`]: experiment orchestration, replay and summaries.

pub mod ballgrow;
pub mod error;
pub mod graph;
pub mod harness;
pub mod pivot;
pub mod predictor;
pub mod rng;
pub mod sketch;
pub mod streaming;

pub use error::{Error, Result};
pub use graph::{Clustering, EdgeUpdate, RandomPermutation, Sign, SignedGraph, Stream};
pub use predictor::{DistanceOracle, RoundingParams};
pub use sketch::{SparsifierGraph, SpaceMeter};
