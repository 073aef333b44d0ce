//! Aggregation and hypothesis tests for extracted session metrics.

mod aggregate;
mod describe;
mod power_law;
mod report;
mod shapiro;
mod wilcoxon;

use serde::Serialize;
use thiserror::Error;

pub use aggregate::{discomfort_score, error_rate, filter_outliers, median_then_mean, outlier_mask};
pub use describe::{box_stats, mean, median, quantile, sample_sd, BoxStats};
pub use power_law::{fit_power_law, PowerLawFit};
pub use report::{
    build_report, AnalysisReport, CellReport, LearningDecision, Metric, MetricSummary, NormalityCheck, PairwiseTest,
    ReportConfig, Scope, SessionSummary,
};
pub use shapiro::shapiro_wilk;
pub use wilcoxon::{effect_size, wilcoxon_signed_rank, wilcoxon_signed_rank_with, WilcoxonMethod, EXACT_MAX_N};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub z: Option<f64>,
    pub effect_size: Option<f64>,
    pub n: usize,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64, n: usize) -> Self {
        Self { statistic, p_value, z: None, effect_size: None, n }
    }
}
