use nalgebra::{DMatrix, DVector};

use super::config::{SolveResult, SolverConfig};
use super::lasso::norm;
use super::stopping::{stopping_check, IterateNorms};
use super::threshold::soft_threshold;
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite_matrix, ensure_finite_vector, pinv, PINV_CUTOFF};

/// Relative residual above which `y` is declared outside the range of `B`.
pub const INFEASIBILITY_TOLERANCE: f64 = 1e-6;

/// Minimizes `‖a‖₁` subject to `Ba = y`.
///
/// The `a`-step projects `β − u` onto the affine set `{a : Ba = y}` using a
/// pseudoinverse computed once; the `β`-step soft-thresholds at `1/ρ`.
/// `config.lambda` is unused.
pub fn basis_pursuit_admm(
    b: &DMatrix<f64>,
    y: &DVector<f64>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    if b.nrows() == 0 || b.ncols() == 0 {
        return Err(Error::Dimension("constraint matrix is empty".into()));
    }
    if y.len() != b.nrows() {
        return Err(Error::Dimension(format!(
            "y has length {} but B has {} rows",
            y.len(),
            b.nrows()
        )));
    }
    ensure_finite_matrix(b, "constraint matrix")?;
    ensure_finite_vector(y, "observation vector")?;

    let b_pinv = pinv(b, PINV_CUTOFF);
    let offset = &b_pinv * y;
    let miss = norm(&(b * &offset - y));
    if miss > INFEASIBILITY_TOLERANCE * norm(y) {
        return Err(Error::Infeasible(format!(
            "y is outside the range of B (residual {miss:.3e})"
        )));
    }

    let d = b.ncols();
    let null_proj = DMatrix::identity(d, d) - &b_pinv * b;
    let rho = config.rho;
    let kappa = 1.0 / rho;

    let mut a = DVector::zeros(d);
    let mut beta = DVector::zeros(d);
    let mut u = DVector::zeros(d);
    let mut primal = Vec::new();
    let mut dual = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iter {
        a = &null_proj * (&beta - &u) + &offset;
        let previous = beta;
        beta = soft_threshold(&(&a + &u), kappa);
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

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> SolverConfig {
        SolverConfig::default()
            .with_tolerances(1e-10, 1e-10)
            .with_max_iter(50_000)
    }

    #[test]
    fn identity_constraint() {
        let b = DMatrix::identity(3, 3);
        let y = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let res = basis_pursuit_admm(&b, &y, &tight()).unwrap();
        assert!((res.solution - &y).amax() < 1e-6);
    }

    #[test]
    fn zero_rhs() {
        let b = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, -1.0]);
        let res = basis_pursuit_admm(&b, &DVector::zeros(2), &tight()).unwrap();
        assert_eq!(res.solution, DVector::zeros(3));
    }

    #[test]
    fn single_row_line() {
        // min |a1| + |a2| on a1 + a2 = 1: every point of the segment [0,1]
        // attains 1; a grid over the feasible line confirms no point beats it.
        let grid_min = (-200..=400)
            .map(|i| {
                let a1 = i as f64 / 200.0;
                a1.abs() + (1.0 - a1).abs()
            })
            .fold(f64::INFINITY, f64::min);
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let y = DVector::from_column_slice(&[1.0]);
        let res = basis_pursuit_admm(&b, &y, &tight()).unwrap();
        let l1 = res.solution.iter().map(|v| v.abs()).sum::<f64>();
        assert!((l1 - grid_min).abs() < 1e-6);
        assert!((res.solution.sum() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn out_of_range_is_infeasible() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let y = DVector::from_column_slice(&[1.0, -1.0]);
        assert!(matches!(
            basis_pursuit_admm(&b, &y, &tight()),
            Err(Error::Infeasible(_))
        ));
    }
}
