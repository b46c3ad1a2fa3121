use nalgebra::{DMatrix, DVector};

use super::config::{SolveResult, SolverConfig};
use super::ridge::RidgeFactor;
use super::stopping::{stopping_check, IterateNorms};
use super::threshold::{hard_threshold_keep_k, soft_threshold};
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite_matrix, ensure_finite_vector};

/// LASSO and regressor-selection ADMM over a fixed design matrix.
///
/// Every iteration solves the ridge step
/// `a ← (AᵀA + ρI)⁻¹(Aᵀy + ρ(β − u))`, shrinks `a + u` into `β`, and
/// accumulates `u ← u + a − β`. The factorization of `AᵀA + ρI` is kept
/// between calls and recomputed only when `ρ` changes.
///
/// With the soft-threshold level `λ/ρ` the fixed point minimizes
/// `½‖y − Aβ‖² + λ‖β‖₁`, whose zero solution starts exactly at
/// `λ = ‖Aᵀy‖∞`.
#[derive(Debug, Clone)]
pub struct LassoSolver {
    a: DMatrix<f64>,
    factor: Option<RidgeFactor>,
    factorizations: usize,
}

impl LassoSolver {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::Dimension("design matrix is empty".into()));
        }
        ensure_finite_matrix(&a, "design matrix")?;
        Ok(LassoSolver {
            a,
            factor: None,
            factorizations: 0,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Number of ridge factorizations performed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// Minimizes `½‖y − Aβ‖² + λ‖β‖₁`. For `λ ≥ ‖Aᵀy‖∞` the minimizer is
    /// zero and is returned without iterating.
    pub fn lasso(&mut self, y: &DVector<f64>, config: &SolverConfig) -> Result<SolveResult> {
        config.validate()?;
        if y.len() == self.a.nrows() && config.lambda >= self.a.tr_mul(y).amax() {
            return Ok(SolveResult::zero(self.a.ncols()));
        }
        let kappa = config.lambda / config.rho;
        self.run(y, config, |v| Ok(soft_threshold(v, kappa)))
    }

    /// Minimizes `‖y − Aβ‖²` subject to `‖β‖₀ ≤ k` (heuristically; the
    /// problem is nonconvex). `config.lambda` is unused.
    pub fn regressor_selection(
        &mut self,
        y: &DVector<f64>,
        k: usize,
        config: &SolverConfig,
    ) -> Result<SolveResult> {
        let d = self.a.ncols();
        if k > d {
            return Err(Error::InvalidArgument(format!("k = {k} exceeds dimension {d}")));
        }
        self.run(y, config, |v| hard_threshold_keep_k(v, k))
    }

    fn ensure_factor(&mut self, rho: f64) {
        if self.factor.as_ref().map(|f| f.rho()) != Some(rho) {
            self.factor = Some(RidgeFactor::new(&self.a, rho));
            self.factorizations += 1;
        }
    }

    fn run<F>(&mut self, y: &DVector<f64>, config: &SolverConfig, prox: F) -> Result<SolveResult>
    where
        F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    {
        config.validate()?;
        if y.len() != self.a.nrows() {
            return Err(Error::Dimension(format!(
                "y has length {} but A has {} rows",
                y.len(),
                self.a.nrows()
            )));
        }
        ensure_finite_vector(y, "observation vector")?;
        self.ensure_factor(config.rho);
        let factor = self.factor.as_ref().expect("factor present");

        let d = self.a.ncols();
        let rho = config.rho;
        let aty = self.a.tr_mul(y);
        let mut a = DVector::zeros(d);
        let mut beta = DVector::zeros(d);
        let mut u = DVector::zeros(d);
        let mut primal = Vec::new();
        let mut dual = Vec::new();
        let mut converged = false;

        for _ in 0..config.max_iter {
            a = factor.solve(&(&aty + (&beta - &u) * rho));
            let previous = beta;
            beta = prox(&(&u + &a))?;
            u += &a - &beta;

            let r = norm(&(&a - &beta));
            let s = rho * norm(&(&beta - &previous));
            primal.push(r);
            dual.push(s);
            let norms = IterateNorms {
                x: norm(&a),
                z: norm(&beta),
                dual: rho * norm(&u),
            };
            if stopping_check(r, s, norms, d, config) {
                converged = true;
                break;
            }
        }

        Ok(SolveResult {
            solution: beta,
            auxiliary: a,
            local: Vec::new(),
            iterations: primal.len(),
            primal_residuals: primal,
            dual_residuals: dual,
            objective: Vec::new(),
            converged,
        })
    }
}

/// Euclidean norm as a plain sum of squares; every solver uses this so that
/// equivalent runs produce bit-identical residual histories.
#[inline]
pub(crate) fn norm(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One-shot LASSO: `½‖y − Aβ‖² + λ‖β‖₁`. Returns the sparse `β` iterate.
pub fn lasso_admm(a: &DMatrix<f64>, y: &DVector<f64>, config: &SolverConfig) -> Result<SolveResult> {
    LassoSolver::new(a.clone())?.lasso(y, config)
}

/// One-shot regressor selection: `‖y − Aβ‖²` subject to `‖β‖₀ ≤ k`.
pub fn regressor_selection_admm(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    config: &SolverConfig,
) -> Result<SolveResult> {
    LassoSolver::new(a.clone())?.regressor_selection(y, k, config)
}
