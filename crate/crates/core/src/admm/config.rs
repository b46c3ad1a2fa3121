use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ADMM parameters shared by every solver in this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Augmented-Lagrangian penalty `ρ`.
    pub rho: f64,
    /// Regularization weight `λ`.
    pub lambda: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Iteration cap `t′`.
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 1.0,
            lambda: 0.0,
            eps_abs: 1e-4,
            eps_rel: 1e-2,
            max_iter: 10_000,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_tolerances(mut self, eps_abs: f64, eps_rel: f64) -> Self {
        self.eps_abs = eps_abs;
        self.eps_rel = eps_rel;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Root-finding controls for the group-sparse local subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSolverConfig {
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        InnerSolverConfig {
            tolerance: 1e-8,
            max_iter: 500,
        }
    }
}

/// Outcome of an ADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// The returned iterate: the thresholded `β` for LASSO-type solvers,
    /// the global variable for consensus, the stacked blocks for sharing.
    pub solution: DVector<f64>,
    /// The companion iterate (`a` for LASSO-type solvers, stacked `Ĥᵢxᵢ`
    /// average for sharing).
    pub auxiliary: DVector<f64>,
    /// Per-cluster local iterates (consensus and sharing only).
    pub local: Vec<DVector<f64>>,
    pub iterations: usize,
    pub primal_residuals: Vec<f64>,
    pub dual_residuals: Vec<f64>,
    /// Objective value per iteration, when the solver tracks it.
    pub objective: Vec<f64>,
    pub converged: bool,
}

impl SolveResult {
    /// The all-zero solution, reached without iterating.
    pub(crate) fn zero(d: usize) -> Self {
        SolveResult {
            solution: DVector::zeros(d),
            auxiliary: DVector::zeros(d),
            local: Vec::new(),
            iterations: 0,
            primal_residuals: Vec::new(),
            dual_residuals: Vec::new(),
            objective: Vec::new(),
            converged: true,
        }
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            iterations: self.iterations,
            converged: self.converged,
            final_primal: self.primal_residuals.last().copied().unwrap_or(0.0),
            final_dual: self.dual_residuals.last().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub converged: bool,
    pub final_primal: f64,
    pub final_dual: f64,
}

impl Default for SolveSummary {
    fn default() -> Self {
        SolveSummary {
            iterations: 0,
            converged: true,
            final_primal: 0.0,
            final_dual: 0.0,
        }
    }
}
