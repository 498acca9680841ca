//! Configuration, the training loop, multi-seed experiments, sweeps and
//! artifact output.

pub mod config;
pub mod experiment;
pub mod output;
pub mod sweep;
pub mod train;

pub use config::TrainConfig;
pub use experiment::{run_experiment, ExperimentResult};
pub use sweep::{ablate, sweep, SweepGrid, SweepRow, LAMBDA_GRID};
pub use train::{kmeans_seed, time_report, train, train_with, EpochView, Prepared, RunRecord, TrainOptions, TrainOutput};
