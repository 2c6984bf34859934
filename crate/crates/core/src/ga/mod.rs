//! Binary-coded genetic search over the matching-network parameters.

pub mod chromosome;
pub mod engine;
pub mod fitness;

pub use chromosome::{
    decode, encode, Chromosome, GeneCoding, ParameterBounds, SearchSpace, GENE_BITS, N_GENES,
    PARAM_NAMES,
};
pub use engine::{evolve, optimize, GaParams, GaState, GenerationRecord, OptimizeOutcome};
pub use fitness::{evaluate_config, fitness, Aggregator, FitnessReport, Problem, PENALTY};
