//! Recall accuracy against allowed frame error, positioning-error
//! statistics, and the end-to-end experiment runner.

mod experiment;
mod metrics;

pub use experiment::{run_experiment, ExperimentConfig, RunSummary, Stage};
pub use metrics::{
    error_stats, mae_accuracy, quantile, read_error_stats, read_mae_curve, write_error_stats,
    write_mae_curve, ErrorStats, MaeCurve, MAE_HEADER, STATS_HEADER,
};
