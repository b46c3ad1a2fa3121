use std::collections::BTreeSet;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitude above which a constructed entry counts as nonzero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Ratios that would be `0/0` are `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricBundle {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_vector: Option<Vec<f64>>,
}

/// Scores a detection mask against the true attacked meters.
pub fn confusion(mask: &[bool], true_support: &BTreeSet<usize>) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (i, &flag) in mask.iter().enumerate() {
        match (flag, true_support.contains(&i)) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(counts: &ConfusionCounts) -> MetricBundle {
    MetricBundle {
        precision: ratio(counts.tp, counts.tp + counts.fp),
        recall: ratio(counts.tp, counts.tp + counts.fn_),
        accuracy: ratio(counts.tp + counts.tn, counts.total()),
        error_vector: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstructionProbabilities {
    /// Fraction of reference nonzeros reproduced as nonzeros.
    pub p_nonzero: Option<f64>,
    /// Fraction of reference zeros reproduced as zeros.
    pub p_zero: Option<f64>,
}

/// Running counts behind [`construction_probabilities`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConstructionTally {
    pub nonzero_hits: usize,
    pub nonzero_total: usize,
    pub zero_hits: usize,
    pub zero_total: usize,
}

impl ConstructionTally {
    pub fn add(&mut self, constructed: &DVector<f64>, reference: &DVector<f64>, zero_tol: f64) -> Result<()> {
        if constructed.len() != reference.len() {
            return Err(Error::Dimension(format!(
                "constructed length {} vs reference {}",
                constructed.len(),
                reference.len()
            )));
        }
        for (c, r) in constructed.iter().zip(reference.iter()) {
            let hit = c.abs() > zero_tol;
            if r.abs() > zero_tol {
                self.nonzero_total += 1;
                self.nonzero_hits += usize::from(hit);
            } else {
                self.zero_total += 1;
                self.zero_hits += usize::from(!hit);
            }
        }
        Ok(())
    }

    pub fn probabilities(&self) -> ConstructionProbabilities {
        ConstructionProbabilities {
            p_nonzero: ratio(self.nonzero_hits, self.nonzero_total),
            p_zero: ratio(self.zero_hits, self.zero_total),
        }
    }
}

/// Pooled support agreement over paired realizations.
pub fn construction_probabilities(
    constructed: &[DVector<f64>],
    reference: &[DVector<f64>],
    zero_tol: f64,
) -> Result<ConstructionProbabilities> {
    if constructed.len() != reference.len() {
        return Err(Error::Dimension("constructed and reference lists differ in length".into()));
    }
    if !(zero_tol > 0.0) {
        return Err(Error::InvalidArgument("zero_tol must be > 0".into()));
    }
    let mut tally = ConstructionTally::default();
    for (c, r) in constructed.iter().zip(reference) {
        tally.add(c, r, zero_tol)?;
    }
    Ok(tally.probabilities())
}
