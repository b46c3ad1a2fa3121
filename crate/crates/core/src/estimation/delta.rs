use std::collections::BTreeSet;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::admm::{norm, LassoSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::MeasurementModel;
use crate::linalg::{ensure_finite_vector, lstsq};

/// Upper bound on the penalty bisection.
pub const DELTA_BISECTION_STEPS: usize = 20;

/// Recover the sparse change `δ` between two snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaQuery {
    pub previous_estimate: DVector<f64>,
    /// Observable measurement difference between the two instants.
    pub measurement_difference: DVector<f64>,
    /// Allowed squared residual `γ`.
    pub gamma: f64,
    /// Changes with `|δ_i| ≥ ε` count as significant.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: DVector<f64>,
    pub changed_set: BTreeSet<usize>,
    /// Penalty whose solution was returned (0 for the least-squares fit).
    pub lambda: f64,
    pub residual: f64,
}

/// Approximates `min ‖δ‖₁ s.t. ‖Δz − Hδ‖² ≤ γ` through the penalized form:
/// bisects on `λ` for the largest penalty whose LASSO solution still meets
/// the residual bound.
pub fn delta_state_estimate(
    model: &MeasurementModel,
    query: &DeltaQuery,
    config: &SolverConfig,
) -> Result<DeltaEstimate> {
    if !(query.gamma > 0.0 && query.epsilon > 0.0) {
        return Err(Error::InvalidArgument("gamma and epsilon must be > 0".into()));
    }
    let h = model.h();
    let dz = &query.measurement_difference;
    if dz.len() != h.nrows() || query.previous_estimate.len() != h.ncols() {
        return Err(Error::Dimension("delta query does not match the model".into()));
    }
    ensure_finite_vector(dz, "measurement difference")?;

    let residual = |delta: &DVector<f64>| {
        let r = norm(&(dz - h * delta));
        r * r
    };
    let finish = |delta: DVector<f64>, lambda: f64| {
        let changed_set = (0..delta.len()).filter(|&i| delta[i].abs() >= query.epsilon).collect();
        DeltaEstimate {
            residual: residual(&delta),
            delta,
            changed_set,
            lambda,
        }
    };

    let zero = DVector::zeros(h.ncols());
    if residual(&zero) <= query.gamma {
        return Ok(finish(zero, f64::INFINITY));
    }
    let ls = lstsq(h, dz);
    let floor = residual(&ls);
    if floor > query.gamma {
        return Err(Error::Infeasible(format!(
            "gamma {:.3e} is below the least-squares residual {floor:.3e}",
            query.gamma
        )));
    }

    let mut solver = LassoSolver::new(h.clone())?;
    let mut best = (ls, 0.0);
    let mut lo = 0.0;
    let mut hi = h.tr_mul(dz).amax();
    for _ in 0..DELTA_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let candidate = solver.lasso(dz, &config.with_lambda(mid))?.solution;
        if residual(&candidate) <= query.gamma {
            lo = mid;
            best = (candidate, mid);
        } else {
            hi = mid;
        }
    }
    Ok(finish(best.0, best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_dc_jacobian, IeeeSystem, MeasurementScheme};

    fn model() -> MeasurementModel {
        build_dc_jacobian(&IeeeSystem::Ieee14.load(), &MeasurementScheme::Default).unwrap()
    }

    fn query(dz: DVector<f64>, gamma: f64) -> DeltaQuery {
        DeltaQuery {
            previous_estimate: DVector::zeros(14),
            measurement_difference: dz,
            gamma,
            epsilon: 0.1,
        }
    }

    #[test]
    fn no_change() {
        let est = delta_state_estimate(&model(), &query(DVector::zeros(34), 1e-3), &SolverConfig::default())
            .unwrap();
        assert_eq!(est.delta, DVector::zeros(14));
        assert!(est.changed_set.is_empty());
    }

    #[test]
    fn planted_two_sparse_change() {
        let m = model();
        let mut d0 = DVector::zeros(14);
        d0[3] = 2.0;
        d0[9] = -1.5;
        let dz = m.h() * &d0;
        let cfg = SolverConfig::default().with_tolerances(1e-8, 1e-8).with_max_iter(50_000);
        let est = delta_state_estimate(&m, &query(dz, 1e-2), &cfg).unwrap();
        assert!(est.residual <= 1e-2);
        assert_eq!(est.changed_set, BTreeSet::from([3, 9]));
    }

    #[test]
    fn loose_gamma_gives_zero_and_tight_is_infeasible() {
        let m = model();
        let dz = DVector::from_fn(34, |i, _| (i as f64).sin());
        let total = dz.norm_squared();
        let est = delta_state_estimate(&m, &query(dz.clone(), total * 1.01), &SolverConfig::default()).unwrap();
        assert_eq!(est.delta, DVector::zeros(14));
        assert!(matches!(
            delta_state_estimate(&m, &query(dz, 1e-12), &SolverConfig::default()),
            Err(Error::Infeasible(_))
        ));
    }
}
