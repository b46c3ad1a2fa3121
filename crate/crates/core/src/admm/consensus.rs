use nalgebra::{DMatrix, DVector};

use super::config::{SolveResult, SolverConfig};
use super::lasso::norm;
use super::ridge::RidgeFactor;
use super::stopping::{stopping_check, IterateNorms};
use super::threshold::soft_threshold;
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite_matrix, ensure_finite_vector};

/// Row blocks `(Aᵢ, yᵢ)` of a stacked least-squares problem sharing one
/// column dimension.
#[derive(Debug, Clone)]
pub struct RowBlocks {
    blocks: Vec<(DMatrix<f64>, DVector<f64>)>,
    dim: usize,
}

impl RowBlocks {
    pub fn new(blocks: Vec<(DMatrix<f64>, DVector<f64>)>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::Dimension("at least one block is required".into()));
        };
        let dim = first.0.ncols();
        for (i, (a, y)) in blocks.iter().enumerate() {
            if a.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "block {i} has {} columns, expected {dim}",
                    a.ncols()
                )));
            }
            if a.nrows() != y.len() {
                return Err(Error::Dimension(format!(
                    "block {i}: {} rows but {} observations",
                    a.nrows(),
                    y.len()
                )));
            }
            ensure_finite_matrix(a, "block matrix")?;
            ensure_finite_vector(y, "block observations")?;
        }
        if dim == 0 {
            return Err(Error::Dimension("blocks have no columns".into()));
        }
        Ok(RowBlocks { blocks, dim })
    }

    /// Splits a stacked system into consecutive row blocks.
    pub fn split(a: &DMatrix<f64>, y: &DVector<f64>, groups: &[Vec<usize>]) -> Result<Self> {
        let blocks = groups
            .iter()
            .map(|rows| {
                (
                    crate::linalg::select_rows(a, rows),
                    crate::linalg::select_entries(y, rows),
                )
            })
            .collect();
        RowBlocks::new(blocks)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[(DMatrix<f64>, DVector<f64>)] {
        &self.blocks
    }
}

/// Global-consensus LASSO: each block keeps a local copy `xᵢ` of the
/// state, solved by a Tikhonov-regularized least squares step, and the
/// shared `β` is the soft-thresholded average of `xᵢ + uᵢ` at level
/// `λ/(ρG)`. Minimizes `½Σᵢ‖yᵢ − Aᵢβ‖² + λ‖β‖₁`; zero is returned directly
/// once `λ ≥ ‖ΣᵢAᵢᵀyᵢ‖∞`.
///
/// Block updates are independent; aggregation runs in ascending block
/// order, so results do not depend on how local steps are scheduled.
pub fn consensus_lasso_admm(blocks: &RowBlocks, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let g = blocks.len();
    let d = blocks.dim();
    let rho = config.rho;
    let kappa = config.lambda / (rho * g as f64);

    let factors: Vec<RidgeFactor> = blocks
        .blocks()
        .iter()
        .map(|(a, _)| RidgeFactor::new(a, rho))
        .collect();
    let atys: Vec<DVector<f64>> = blocks.blocks().iter().map(|(a, y)| a.tr_mul(y)).collect();
    let total = atys.iter().fold(DVector::zeros(d), |acc, v| acc + v);
    if config.lambda >= total.amax() {
        return Ok(SolveResult {
            auxiliary: DVector::zeros(0),
            local: vec![DVector::zeros(d); g],
            ..SolveResult::zero(d)
        });
    }

    let mut xs = vec![DVector::zeros(d); g];
    let mut us = vec![DVector::zeros(d); g];
    let mut beta = DVector::zeros(d);
    let mut primal = Vec::new();
    let mut dual = Vec::new();
    let mut converged = false;
    let scale = 1.0 / g as f64;

    for _ in 0..config.max_iter {
        for i in 0..g {
            xs[i] = factors[i].solve(&(&atys[i] + (&beta - &us[i]) * rho));
        }
        let mut avg = DVector::zeros(d);
        for i in 0..g {
            avg += &xs[i] + &us[i];
        }
        let previous = beta;
        beta = soft_threshold(&(avg * scale), kappa);
        for i in 0..g {
            us[i] += &xs[i] - &beta;
        }

        let r = xs
            .iter()
            .map(|x| {
                let n = norm(&(x - &beta));
                n * n
            })
            .sum::<f64>()
            .sqrt();
        let s = rho * (g as f64).sqrt() * norm(&(&beta - &previous));
        primal.push(r);
        dual.push(s);
        let norms = IterateNorms {
            x: stacked_norm(&xs),
            z: (g as f64).sqrt() * norm(&beta),
            dual: rho * stacked_norm(&us),
        };
        if stopping_check(r, s, norms, g * d, config) {
            converged = true;
            break;
        }
    }

    Ok(SolveResult {
        auxiliary: DVector::zeros(0),
        solution: beta,
        local: xs,
        iterations: primal.len(),
        primal_residuals: primal,
        dual_residuals: dual,
        objective: Vec::new(),
        converged,
    })
}

fn stacked_norm(vs: &[DVector<f64>]) -> f64 {
    vs.iter()
        .map(|v| {
            let n = norm(v);
            n * n
        })
        .sum::<f64>()
        .sqrt()
}
