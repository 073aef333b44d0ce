//! Fitts ring task with typing interludes: plans, trial sequencing and
//! per-target metric extraction.

mod fitts;
mod latin;
mod metrics;
mod plan;
mod ring;
mod trial;

use thiserror::Error;

pub use fitts::{id_width, width_id};
pub use latin::{latin_order, STUDY_DEVICES};
pub use metrics::{extract_metrics, extract_metrics_with, ExtractConfig, Extraction, ExtractionGap, TrialMetrics};
pub use plan::{make_plan, read_plan, word_list, write_plan, Block, IdSet, PlanSpec, TrialPlan};
pub use ring::{ring_layout, ring_radius, ring_step, TargetSpec};
pub use trial::{run_trial, Phase, TargetOutcome, TrialRun};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("plan file: {0}")]
    PlanFormat(String),
    #[error("event {event_index}: {message}")]
    PlanMismatch { event_index: usize, message: String },
    #[error(
        "incomplete trial: block {block}, ID {id}, target {target_index} ({phase}); {completed}/{planned} targets done"
    )]
    IncompleteTrial {
        block: u32,
        id: f64,
        target_index: u32,
        phase: Phase,
        completed: usize,
        planned: usize,
    },
}
