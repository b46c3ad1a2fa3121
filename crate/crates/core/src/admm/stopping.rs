use super::config::SolverConfig;

/// Norms entering the relative part of the stopping thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IterateNorms {
    /// Norm of the primal iterate (`‖Ax‖` in the generic splitting).
    pub x: f64,
    /// Norm of the split variable (`‖β‖`).
    pub z: f64,
    /// Norm of the unscaled dual (`‖ρu‖`).
    pub dual: f64,
}

/// Primal/dual residual test with absolute and relative tolerances over a
/// `dim`-dimensional constraint. Equality counts as converged.
pub fn stopping_check(
    primal_norm: f64,
    dual_norm: f64,
    norms: IterateNorms,
    dim: usize,
    config: &SolverConfig,
) -> bool {
    let root = (dim as f64).sqrt();
    let eps_pri = root * config.eps_abs + config.eps_rel * norms.x.max(norms.z);
    let eps_dual = root * config.eps_abs + config.eps_rel * norms.dual;
    primal_norm <= eps_pri && dual_norm <= eps_dual
}
