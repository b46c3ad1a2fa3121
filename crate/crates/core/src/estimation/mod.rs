//! State estimation from possibly attacked measurements.

mod delta;
mod estimators;

pub use delta::{delta_state_estimate, DeltaEstimate, DeltaQuery, DELTA_BISECTION_STEPS};
pub use estimators::{
    collaborative_state_estimate, distributed_state_estimate, wls_estimate, EstimationMethod,
    MeasurementSnapshot, StateEstimate,
};
