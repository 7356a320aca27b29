//! Experiment runner for the fdefln filters: scenario configs, per-block
//! metrics, the steady-state EMSE sweep and block timing.

pub mod algo;
pub mod config;
pub mod counts;
pub mod metrics;
pub mod runner;
pub mod sweep;
pub mod timing;

pub use algo::{AlgoKind, AlgoSpec, Engine};
pub use config::RunConfig;
pub use metrics::{write_csv, MetricsRecord};
pub use runner::{run_experiment, RunReport};
pub use sweep::{emse_sweep, SweepRow};
pub use timing::{time_per_block, TimingStats};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fdefln::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{algo} diverged in trial {trial} at block {block}")]
    Divergence {
        algo: String,
        trial: usize,
        block: usize,
    },
}

impl BenchError {
    /// Process exit code: 1 for divergence, 2 for usage and input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Divergence { .. } => 1,
            BenchError::Core(fdefln::Error::Divergence { .. }) => 1,
            _ => 2,
        }
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod book_experiments {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod book_cli {}
