//! Seeded Monte-Carlo sweeps over sparsity levels and their CSV output.

mod clusters;
mod config;
mod runner;

pub use clusters::{choose_clusters, partition_indices, prime_divisors};
pub use config::{ExperimentConfig, ExperimentMode, GPolicy, SystemSpec};
pub use runner::{
    emit_csv, lambda_max, run_experiment, write_csv, ExperimentResult, ResultRow, CSV_HEADER,
};
