use serde::{Deserialize, Serialize};

use super::jacobian::MeasurementModel;
use crate::linalg;

/// Default relative singular-value cutoff for [`structure_report`].
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;

/// Dimensions, numerical rank and sparsity of a Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub rank: usize,
    /// Fraction of entries that are exactly zero.
    pub zero_fraction_r: f64,
}

/// Singular values below `rank_tolerance × s_max` count as zero. Zeros for
/// the sparsity ratio are exact structural zeros.
pub fn structure_report(model: &MeasurementModel, rank_tolerance: f64) -> StructureReport {
    let h = model.h();
    let (n, d) = h.shape();
    let zeros = h.iter().filter(|v| **v == 0.0).count();
    StructureReport {
        n,
        d,
        rank: linalg::rank(h, rank_tolerance),
        zero_fraction_r: zeros as f64 / (n * d) as f64,
    }
}
