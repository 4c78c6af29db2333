//! Experiment plumbing: configuration, Monte Carlo runs, reports and file output.

pub mod config;
pub mod diagnose;
pub mod emit;
pub mod experiment;
pub mod ks;

pub use config::{ConfigError, ExperimentConfig, MuMode};
pub use experiment::{mu_oracle, run_clt, run_lln, ExperimentKind, ExperimentSummary, ReplicationRow};
pub use ks::{ks_statistic, normal_cdf};
