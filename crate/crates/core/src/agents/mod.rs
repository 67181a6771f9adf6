//! Optimizers: masked DQN, a genetic algorithm over fixed-length genomes,
//! and a uniform random policy.

pub mod dqn;
pub mod ga;
pub mod nn;
pub mod random;
pub mod replay;

use thiserror::Error;

pub use dqn::{select_action, td_update, DqnAgent, DqnConfig};
pub use ga::{ga_decode, ga_evolve, Decoded, GaParams, Genome, GENOME_LEN};
pub use nn::{Adam, Arch, CheckpointError, NetInput, QNetwork};
pub use random::random_policy;
pub use replay::{ReplayBuffer, Transition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("no legal action in mask")]
    NoLegalAction,
    #[error("empty training batch")]
    EmptyBatch,
    #[error("population has {population} genomes but {fitness} fitness values")]
    SizeMismatch { population: usize, fitness: usize },
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
}
