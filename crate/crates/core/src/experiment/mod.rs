//! Experiment orchestration: evaluation runs over image datasets and the
//! Swiss-roll solver benchmark.

mod bench;
mod config;
mod pipeline;
mod run;

pub use bench::{bench_swissroll, mean_stress_per_iteration, repeat_seed, write_bench_artifacts, BenchConfig, BenchOutcome};
pub use config::{DatasetConfig, ExperimentConfig, IlmaConfig, Method};
pub use pipeline::{pyramid_dimension, FoldNote, MethodRunner, Scatter, Workspace};
pub use run::{rerun_manifest, run_experiment, run_experiment_on, DatasetSummary, FoldFailure, Manifest, RunOutcome};
