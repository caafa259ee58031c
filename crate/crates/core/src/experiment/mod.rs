//! Seeded Monte-Carlo sweeps over planted-partition models.

pub mod config;
pub mod runner;
pub mod setup;

pub use config::{ExperimentConfig, ThetaMode};
pub use runner::{
    evaluate, run_experiment, run_trial, summarize, trial_model, trial_seed, AlgorithmOutcome,
    ExperimentOutput, SummaryRow, TrialOutcome, TrialRecord, TrialSettings, SUMMARY_COLUMNS,
    TRIAL_COLUMNS,
};
pub use setup::{balance_alphas, equal_block_labels, make_theta, planted_params};
