//! Streaming substrate: ℓ0-samplers, cut sparsifiers, effective resistance,
//! the sparsifier cost estimate and space accounting.

mod estimate;
mod l0;
mod meter;
mod resistance;
mod sparsifier;

pub use estimate::{estimated_cost, estimated_cost_clamped};
pub use l0::{
    l0_sample, l0_update, num_levels, num_repetitions, L0Outcome, L0Sampler, Recovery, SamplerBank,
};
pub use meter::SpaceMeter;
pub use resistance::{effective_resistance, ResistanceOracle};
pub use sparsifier::{
    build_sparsifier, cut_weight, SparsifierBuilder, SparsifierGraph, SparsifierMode,
    SparsifierParams,
};
