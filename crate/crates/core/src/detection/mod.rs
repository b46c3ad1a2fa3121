//! Residual-based bad-data detection and scoring.

mod metrics;
mod residual;

pub use metrics::{
    confusion, construction_probabilities, metrics, ConfusionCounts, ConstructionProbabilities,
    ConstructionTally, MetricBundle, DEFAULT_ZERO_TOL,
};
pub use residual::{
    attack_error, detect, residuals, run_detection, tau_threshold, DetectionResult, Residuals,
};
