use nalgebra::DVector;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::types::{AttackKind, AttackVector};
use crate::admm::SolveSummary;
use crate::error::{Error, Result};

/// `k`-sparse vector of length `n` with uniformly chosen support and
/// Gaussian amplitudes `N(mean, var)`.
pub fn random_sparse_vector<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    mean: f64,
    var: f64,
) -> Result<DVector<f64>> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds length {n}")));
    }
    if !(var.is_finite() && var >= 0.0) || !mean.is_finite() {
        return Err(Error::InvalidArgument("amplitude mean/variance invalid".into()));
    }
    let normal = Normal::new(mean, var.sqrt())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut a = DVector::zeros(n);
    let mut support = sample(rng, n, k).into_vec();
    support.sort_unstable();
    for i in support {
        a[i] = normal.sample(rng);
    }
    Ok(a)
}

/// Random `k`-sparse false data, deterministic in `seed`. No `c` exists in
/// general, so the vector is usually visible to a residual test.
pub fn random_sparse_attack(n: usize, k: usize, mean: f64, var: f64, seed: u64) -> Result<AttackVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_sparse_vector(&mut rng, n, k, mean, var)?;
    Ok(AttackVector {
        kind: AttackKind::Random,
        a,
        c: None,
        k: Some(k),
        solver: SolveSummary::default(),
        residual: f64::NAN,
        leak_warning: false,
    })
}
