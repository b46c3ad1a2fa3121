use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::admm::SolveSummary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    #[serde(rename = "TLA")]
    Tla,
    #[serde(rename = "TSA")]
    Tsa,
    #[serde(rename = "SLA")]
    Sla,
    #[serde(rename = "SSA")]
    Ssa,
    Random,
    Distributed,
    Collective,
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttackKind::Tla => "TLA",
            AttackKind::Tsa => "TSA",
            AttackKind::Sla => "SLA",
            AttackKind::Ssa => "SSA",
            AttackKind::Random => "Random",
            AttackKind::Distributed => "Distributed",
            AttackKind::Collective => "Collective",
        };
        f.write_str(s)
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "tla" => AttackKind::Tla,
            "tsa" => AttackKind::Tsa,
            "sla" => AttackKind::Sla,
            "ssa" => AttackKind::Ssa,
            "random" => AttackKind::Random,
            "distributed" => AttackKind::Distributed,
            "collective" => AttackKind::Collective,
            other => return Err(Error::InvalidArgument(format!("unknown attack kind '{other}'"))),
        })
    }
}

/// Who the attacker targets and what it may touch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AttackSpec {
    /// Targeted state indices `I` with their injected values `c_j`.
    pub targeted: BTreeMap<usize, f64>,
    /// Meters `A` the attacker controls.
    pub attacked: BTreeSet<usize>,
    pub sparsity_k: Option<usize>,
    /// Lower bound `ψ` on `‖c‖∞` for strategic attacks.
    pub psi: f64,
}

impl AttackSpec {
    pub fn targeting(values: impl IntoIterator<Item = (usize, f64)>) -> Self {
        AttackSpec {
            targeted: values.into_iter().collect(),
            ..AttackSpec::default()
        }
    }

    pub fn with_sparsity(mut self, k: usize) -> Self {
        self.sparsity_k = Some(k);
        self
    }

    pub fn with_attacked(mut self, meters: impl IntoIterator<Item = usize>) -> Self {
        self.attacked = meters.into_iter().collect();
        self
    }

    pub fn with_psi(mut self, psi: f64) -> Self {
        self.psi = psi;
        self
    }

    /// Off-target states `Ī`, the complement of `I` in `0..d`.
    pub fn off_target(&self, d: usize) -> Vec<usize> {
        (0..d).filter(|j| !self.targeted.contains_key(j)).collect()
    }

    /// Secure meters `S`, the complement of `A` in `0..n`.
    pub fn secure(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.attacked.contains(i)).collect()
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if let Some((&j, _)) = self.targeted.iter().find(|(&j, _)| j >= d) {
            return Err(Error::InvalidArgument(format!("targeted state {j} out of range")));
        }
        if let Some(&i) = self.attacked.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!("attacked meter {i} out of range")));
        }
        if self.targeted.values().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("targeted values"));
        }
        if !(self.psi.is_finite() && self.psi >= 0.0) {
            return Err(Error::InvalidArgument("psi must be >= 0".into()));
        }
        Ok(())
    }
}

/// A constructed false-data vector `a` and, where defined, the state
/// perturbation `c` that realizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackVector {
    pub kind: AttackKind,
    pub a: DVector<f64>,
    pub c: Option<DVector<f64>>,
    pub k: Option<usize>,
    pub solver: SolveSummary,
    /// Relative distance of `a` from the column space of `H`.
    pub residual: f64,
    /// Strategic attacks only: no candidate kept the secure meters clean,
    /// so the returned vector leaks into them.
    pub leak_warning: bool,
}

impl AttackVector {
    /// Recomputes `residual` against `h`.
    pub fn with_residual(mut self, h: &nalgebra::DMatrix<f64>) -> Self {
        self.residual = super::observability::relative_range_residual(h, &self.a);
        self
    }
}

#[derive(Serialize, Deserialize)]
struct AttackJson {
    kind: AttackKind,
    a: Vec<f64>,
    c: Option<Vec<f64>>,
    k: Option<usize>,
    converged: bool,
    residual: Option<f64>,
}

impl Serialize for AttackVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AttackJson {
            kind: self.kind,
            a: self.a.iter().copied().collect(),
            c: self.c.as_ref().map(|c| c.iter().copied().collect()),
            k: self.k,
            converged: self.solver.converged,
            residual: (!self.residual.is_nan()).then_some(self.residual),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AttackVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = AttackJson::deserialize(d)?;
        Ok(AttackVector {
            kind: raw.kind,
            a: DVector::from_vec(raw.a),
            c: raw.c.map(DVector::from_vec),
            k: raw.k,
            solver: SolveSummary {
                converged: raw.converged,
                ..SolveSummary::default()
            },
            residual: raw.residual.unwrap_or(f64::NAN),
            leak_warning: false,
        })
    }
}
