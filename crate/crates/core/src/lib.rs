//! Genetic-algorithm search for convolutional network architectures.
//!
//! A candidate network is a [`Genome`]: a list of skip blocks (two 3x3
//! convolutions with a shortcut) and 2x2 pooling layers. Genomes are
//! evolved with binary-tournament selection, one-point crossover and
//! weighted mutation, and scored by an [`Evaluator`]. Scores are memoised
//! per genome identifier (the SHA-224 of the canonical text).
//!
//! ```
//! use cnnga::{run, EvaluationSettings, EvolutionConfig, SurrogateEvaluator};
//!
//! let config = EvolutionConfig { population_size: 6, max_generations: 3, ..Default::default() };
//! let outcome = run(config, EvaluationSettings::default(), SurrogateEvaluator).unwrap();
//! assert_eq!(outcome.history.len(), 4);
//! ```
//!
//! The modules roughly follow the data flow: [`genome`] and [`arch`] for
//! encoding and decoding, [`evolution`] for the operators, [`evaluators`]
//! for fitness, [`engine`] for the loop, cache and checkpoints, and [`cli`]
//! for the `cnnga` binary.

pub mod arch;
pub mod cli;
pub mod engine;
pub mod error;
pub mod evaluators;
pub mod evolution;
mod fsutil;
pub mod genome;
pub mod rng;

pub use arch::{count_parameters, decode, ArchitectureIR, InputShape};
pub use engine::{
    cache_load, cache_store, checkpoint, evaluate_population, resume, run, Checkpoint, Engine, EvaluationSettings,
    EvaluationStats, FitnessCache, GenerationRecord, RunHistory, RunOutcome,
};
pub use error::{Error, ParseError, Result};
pub use evaluators::{
    EvaluationJob, EvaluationResult, Evaluator, EvaluatorKind, EvaluatorSpec, ExternalEvaluator, SurrogateEvaluator,
    Transport,
};
pub use evolution::{EvolutionConfig, Individual, MutationOp, MutationWeights, Population};
pub use genome::{canonical_serialize, identifier, parse_genome, Genome, Identifier, LayerGene, PoolType};
pub use rng::{OperatorClass, SeedStreams};
