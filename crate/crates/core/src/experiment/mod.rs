//! Batch simulation of learning and evaluation rounds against a simulated human.

mod config;
mod episode;
pub mod metrics;
mod runner;

pub use config::{ExperimentConfig, ScenarioRef};
pub use episode::{Episode, EpisodeLog, Stage, StepRecord, TurnPhase};
pub use metrics::{MetricsSummary, Record, SummaryRow};
pub use runner::{
    replay, run_experiment, run_round, run_seed, run_single, sweep, sweep_cell, sweep_csv, Carryover,
    ExperimentResult, ReplayReport, RunContext, RunFile, RunLog, SweepAxis, SweepCell,
};
