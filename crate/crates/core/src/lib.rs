//! Grid-based inductor layout drawing: geometry, a surrogate EM evaluator,
//! reward shaping, a memoizing simulation cache, an episodic environment and
//! three optimizers (masked DQN, genetic algorithm, random search).

pub mod agents;
pub mod cache;
pub mod environment;
pub mod geometry;
pub mod harness;
pub mod layout_file;
pub mod reward;
pub mod simulator;
