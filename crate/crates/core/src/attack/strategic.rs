use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observability::relative_range_residual;
use super::types::{AttackKind, AttackVector};
use crate::admm::{LassoSolver, SolveSummary, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{inf_norm, lstsq, select_columns, select_rows};

/// Threshold below which an entry of `Hc` counts as untouched.
pub const ZERO_ROW_TOL: f64 = 1e-6;

/// Settings for the per-column strategic solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategicConfig {
    /// `ρ`, tolerances and iteration cap; `lambda` is ignored.
    pub solver: SolverConfig,
    /// Column `i` uses `λ_i = lambda_ratio · ‖A_iᵀh^S_i‖∞`.
    pub lambda_ratio: f64,
    /// Largest `‖H^S c‖∞` still treated as leak-free.
    pub leak_tol: f64,
}

impl Default for StrategicConfig {
    fn default() -> Self {
        StrategicConfig {
            solver: SolverConfig::default(),
            lambda_ratio: 0.5,
            leak_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    column: usize,
    c: DVector<f64>,
    attacked_rows: usize,
    leak: f64,
    converged: bool,
    iterations: usize,
}

/// Strategic attack with ℓ1-penalized per-column fits: for every state `i`
/// find `σ` with `H^S_{-i}σ ≈ −h^S_i`, so `c = (σ, 1 at i)` keeps the
/// secure meters `S` clean, then pick the candidate touching the fewest
/// attacked meters.
pub fn strategic_lasso_attack(
    h: &DMatrix<f64>,
    secure: &[usize],
    psi: f64,
    config: &StrategicConfig,
) -> Result<AttackVector> {
    strategic(h, secure, None, psi, config)
}

/// As [`strategic_lasso_attack`] with `‖σ‖₀ ≤ k` instead of the ℓ1
/// penalty, so `‖c‖₀ ≤ k + 1`.
pub fn strategic_selective_attack(
    h: &DMatrix<f64>,
    secure: &[usize],
    k: usize,
    psi: f64,
    config: &StrategicConfig,
) -> Result<AttackVector> {
    if h.ncols() == 0 || k > h.ncols() - 1 {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be at most D - 1 = {}",
            h.ncols().saturating_sub(1)
        )));
    }
    strategic(h, secure, Some(k), psi, config)
}

fn strategic(
    h: &DMatrix<f64>,
    secure: &[usize],
    k: Option<usize>,
    psi: f64,
    config: &StrategicConfig,
) -> Result<AttackVector> {
    config.solver.validate()?;
    if !(psi.is_finite() && psi >= 0.0) {
        return Err(Error::InvalidArgument("psi must be >= 0".into()));
    }
    let (n, d) = h.shape();
    if n == 0 || d == 0 {
        return Err(Error::Dimension("empty Jacobian".into()));
    }
    let mut secure = secure.to_vec();
    secure.sort_unstable();
    secure.dedup();
    if let Some(&i) = secure.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!("secure meter {i} out of range")));
    }
    let attacked: Vec<usize> = (0..n).filter(|i| secure.binary_search(i).is_err()).collect();
    let h_s = select_rows(h, &secure);

    let candidates: Vec<Candidate> = (0..d)
        .into_par_iter()
        .map(|i| column_candidate(h, &h_s, &attacked, i, k, config))
        .collect::<Result<_>>()?;

    let chosen = select_candidate(&candidates, config.leak_tol).ok_or_else(|| {
        Error::Infeasible("every candidate leaves the attacked meters untouched".into())
    })?;
    let leak_warning = chosen.leak > config.leak_tol;
    if leak_warning {
        log::warn!(
            "no leak-free strategic candidate; using column {} with leak {:.3e}",
            chosen.column,
            chosen.leak
        );
    }

    let peak = inf_norm(&chosen.c);
    let c = &chosen.c * (psi.max(peak) / peak);
    let a = h * &c;
    Ok(AttackVector {
        kind: if k.is_some() { AttackKind::Ssa } else { AttackKind::Sla },
        residual: relative_range_residual(h, &a),
        a,
        c: Some(c),
        k,
        solver: SolveSummary {
            iterations: candidates.iter().map(|c| c.iterations).max().unwrap_or(0),
            converged: candidates.iter().all(|c| c.converged),
            final_primal: 0.0,
            final_dual: 0.0,
        },
        leak_warning,
    })
}

fn column_candidate(
    h: &DMatrix<f64>,
    h_s: &DMatrix<f64>,
    attacked: &[usize],
    i: usize,
    k: Option<usize>,
    config: &StrategicConfig,
) -> Result<Candidate> {
    let d = h.ncols();
    let others: Vec<usize> = (0..d).filter(|&j| j != i).collect();
    let mut sigma = DVector::zeros(others.len());
    let mut converged = true;
    let mut iterations = 0;

    if h_s.nrows() > 0 && !others.is_empty() {
        let a_i = select_columns(h_s, &others);
        let target = -h_s.column(i).into_owned();
        if target.amax() > 0.0 && a_i.amax() > 0.0 {
            let mut solver = LassoSolver::new(a_i.clone())?;
            let result = match k {
                None => {
                    let lambda = config.lambda_ratio * a_i.tr_mul(&target).amax();
                    solver.lasso(&target, &config.solver.with_lambda(lambda))?
                }
                Some(k) => solver.regressor_selection(&target, k, &config.solver)?,
            };
            converged = result.converged;
            iterations = result.iterations;
            sigma = polish(&a_i, &target, &result.solution);
        }
    }

    let mut c = DVector::zeros(d);
    c[i] = 1.0;
    for (pos, &j) in others.iter().enumerate() {
        c[j] = sigma[pos];
    }
    let hc = h * &c;
    let attacked_rows = attacked.iter().filter(|&&r| hc[r].abs() > ZERO_ROW_TOL).count();
    let leak = (0..h_s.nrows())
        .map(|r| (h_s.row(r) * &c)[0].abs())
        .fold(0.0, f64::max);
    Ok(Candidate {
        column: i,
        c,
        attacked_rows,
        leak,
        converged,
        iterations,
    })
}

/// Least-squares refit restricted to the support the solver picked.
fn polish(a: &DMatrix<f64>, target: &DVector<f64>, sigma: &DVector<f64>) -> DVector<f64> {
    let support: Vec<usize> = (0..sigma.len()).filter(|&j| sigma[j] != 0.0).collect();
    let mut out = DVector::zeros(sigma.len());
    if support.is_empty() {
        return out;
    }
    let fit = lstsq(&select_columns(a, &support), target);
    for (pos, &j) in support.iter().enumerate() {
        out[j] = fit[pos];
    }
    out
}

/// Fewest touched attacked meters among leak-free candidates, then the
/// smaller leak, then the lower column. Candidates touching no attacked
/// meter (`c ∝ 𝟙`) are discarded. Without a leak-free candidate the
/// smallest leak wins.
fn select_candidate(candidates: &[Candidate], leak_tol: f64) -> Option<&Candidate> {
    let useful = || candidates.iter().filter(|c| c.attacked_rows > 0);
    let clean = useful()
        .filter(|c| c.leak <= leak_tol)
        .min_by(|x, y| {
            x.attacked_rows
                .cmp(&y.attacked_rows)
                .then(x.leak.total_cmp(&y.leak))
                .then(x.column.cmp(&y.column))
        });
    clean.or_else(|| {
        useful().min_by(|x, y| {
            x.leak
                .total_cmp(&y.leak)
                .then(x.attacked_rows.cmp(&y.attacked_rows))
                .then(x.column.cmp(&y.column))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_secure_meters_picks_sparsest_column() {
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0]);
        let atk = strategic_lasso_attack(&h, &[], 2.0, &StrategicConfig::default()).unwrap();
        assert_eq!(atk.c.unwrap(), DVector::from_column_slice(&[2.0, 0.0, 0.0]));
        assert_eq!(atk.a, DVector::from_column_slice(&[2.0, 0.0, 0.0]));
    }

    #[test]
    fn identity_with_one_open_meter() {
        let n = 4;
        let h = DMatrix::identity(n, n);
        let secure = [0, 1, 3];
        let atk = strategic_lasso_attack(&h, &secure, 1.5, &StrategicConfig::default()).unwrap();
        assert!(!atk.leak_warning);
        assert_eq!(atk.a, DVector::from_column_slice(&[0.0, 0.0, 1.5, 0.0]));
    }

    #[test]
    fn selective_k_zero_and_range() {
        let h = DMatrix::identity(3, 3);
        let atk = strategic_selective_attack(&h, &[0, 2], 0, 1.0, &StrategicConfig::default()).unwrap();
        assert_eq!(atk.c.unwrap(), DVector::from_column_slice(&[0.0, 1.0, 0.0]));
        assert!(strategic_selective_attack(&h, &[0], 3, 1.0, &StrategicConfig::default()).is_err());
    }
}
