//! Experiment orchestration: budgeted training runs, transfer experiments,
//! SVG export and simulation-growth reports.

pub mod config;
pub mod report;
pub mod run;
pub mod svg;
pub mod transfer;

use thiserror::Error;

pub use config::{AgentKind, RunConfig, TransferConfig};
pub use report::{report_sim_growth, GrowthReport, RunTrace};
pub use run::{run_training, EpisodeRow, RunOutcome, RunSummary};
pub use svg::export_svg;
pub use transfer::{fine_tune_and_compare, pretrain, run_transfer, TransferOutcome, TransferSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config has no transfer block")]
    MissingTransferBlock,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no trace rows to report")]
    EmptyTrace,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Env(#[from] crate::environment::EnvError),
    #[error(transparent)]
    Agent(#[from] crate::agents::AgentError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Cache(#[from] crate::cache::CacheError),
    #[error(transparent)]
    Checkpoint(#[from] crate::agents::CheckpointError),
    #[error(transparent)]
    Simulation(#[from] crate::simulator::SimError),
}

impl From<crate::layout_file::LayoutFileError> for HarnessError {
    fn from(e: crate::layout_file::LayoutFileError) -> Self {
        match e {
            crate::layout_file::LayoutFileError::Io(e) => HarnessError::Io(e),
            crate::layout_file::LayoutFileError::Parse(m) => HarnessError::Parse(m),
        }
    }
}

impl HarnessError {
    /// Stable identifier for the machine-readable error line.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "ConfigError",
            HarnessError::MissingTransferBlock => "MissingTransferBlock",
            HarnessError::Parse(_) => "ParseError",
            HarnessError::EmptyTrace => "EmptyTrace",
            HarnessError::Io(_) => "IoFailure",
            HarnessError::Env(_) => "EnvironmentError",
            HarnessError::Agent(_) => "AgentError",
            HarnessError::Geometry(_) => "GeometryError",
            HarnessError::Cache(_) => "CacheError",
            HarnessError::Checkpoint(_) => "CheckpointError",
            HarnessError::Simulation(_) => "SimulationError",
        }
    }
}
