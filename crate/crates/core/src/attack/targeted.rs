use nalgebra::DMatrix;

use super::observability::relative_range_residual;
use super::projection::{build_projection, ProjectionPair};
use super::types::{AttackKind, AttackSpec, AttackVector};
use crate::admm::{LassoSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::lstsq;

/// Targeted attack with an ℓ1 penalty: `a` minimizes
/// `½‖y − Ba‖² + λ‖a‖₁` and `c` is the least-squares solution of `Hc = a`.
pub fn targeted_lasso_attack(
    h: &DMatrix<f64>,
    spec: &AttackSpec,
    config: &SolverConfig,
) -> Result<AttackVector> {
    let pair = projection_for(h, spec)?;
    attack_from_projection(h, &pair, None, config)
}

/// Targeted attack with an explicit ℓ0 budget `spec.sparsity_k`.
pub fn targeted_selective_attack(
    h: &DMatrix<f64>,
    spec: &AttackSpec,
    config: &SolverConfig,
) -> Result<AttackVector> {
    let k = spec
        .sparsity_k
        .ok_or_else(|| Error::InvalidArgument("selective attack needs sparsity_k".into()))?;
    if k > h.nrows() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} meters",
            h.nrows()
        )));
    }
    let pair = projection_for(h, spec)?;
    attack_from_projection(h, &pair, Some(k), config)
}

fn projection_for(h: &DMatrix<f64>, spec: &AttackSpec) -> Result<ProjectionPair> {
    spec.validate(h.nrows(), h.ncols())?;
    if spec.targeted.is_empty() {
        return Err(Error::InvalidArgument("no targeted states".into()));
    }
    build_projection(h, &spec.off_target(h.ncols()), &spec.targeted)
}

/// Runs the targeted solve on a prepared projection; `k = None` selects
/// the ℓ1 form, `Some(k)` the ℓ0-constrained form.
pub fn attack_from_projection(
    h: &DMatrix<f64>,
    pair: &ProjectionPair,
    k: Option<usize>,
    config: &SolverConfig,
) -> Result<AttackVector> {
    if pair.b.nrows() != h.nrows() {
        return Err(Error::Dimension("projection does not match H".into()));
    }
    let mut solver = LassoSolver::new(pair.b.clone())?;
    let (kind, result) = match k {
        None => (AttackKind::Tla, solver.lasso(&pair.y, config)?),
        Some(k) => (AttackKind::Tsa, solver.regressor_selection(&pair.y, k, config)?),
    };
    let a = result.solution.clone();
    let c = lstsq(h, &a);
    Ok(AttackVector {
        kind,
        residual: relative_range_residual(h, &a),
        a,
        c: Some(c),
        k,
        solver: result.summary(),
        leak_warning: false,
    })
}
