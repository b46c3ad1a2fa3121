//! Independent reference solvers and random-instance helpers shared by the
//! integration tests. Nothing here calls into the library's solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut *rng))
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(&mut *rng))
}

/// Cyclic coordinate descent for `½‖y − Aβ‖² + λ‖β‖₁`, run until no
/// coordinate moves by more than `1e-13`.
pub fn lasso_coordinate_descent(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let d = a.ncols();
    let col_sq: Vec<f64> = (0..d).map(|j| a.column(j).norm_squared()).collect();
    let mut beta = DVector::zeros(d);
    let mut resid = y.clone();
    for _ in 0..1_000_000 {
        let mut moved: f64 = 0.0;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let rho_j = a.column(j).dot(&resid) + col_sq[j] * beta[j];
            let new = if rho_j > lambda {
                (rho_j - lambda) / col_sq[j]
            } else if rho_j < -lambda {
                (rho_j + lambda) / col_sq[j]
            } else {
                0.0
            };
            let step = new - beta[j];
            if step != 0.0 {
                resid -= a.column(j) * step;
                beta[j] = new;
                moved = moved.max(step.abs());
            }
        }
        if moved < 1e-13 {
            break;
        }
    }
    beta
}

/// Least-squares objective `‖y − A_S x‖²` on a support, via QR-free normal
/// equations with an SVD solve.
pub fn support_objective(a: &DMatrix<f64>, y: &DVector<f64>, support: &[usize]) -> f64 {
    if support.is_empty() {
        return y.norm_squared();
    }
    let sub = DMatrix::from_fn(a.nrows(), support.len(), |r, c| a[(r, support[c])]);
    let gram = sub.transpose() * &sub;
    let rhs = sub.transpose() * y;
    let x = gram.svd(true, true).solve(&rhs, 1e-14).expect("svd solve");
    (y - sub * x).norm_squared()
}

/// Smallest least-squares objective over every support of size ≤ `k`.
pub fn best_subset_objective(a: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> f64 {
    let d = a.ncols();
    let mut best = y.norm_squared();
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let support: Vec<usize> = (0..d).filter(|j| mask & (1 << j) != 0).collect();
        best = best.min(support_objective(a, y, &support));
    }
    best
}

/// Normal-equations least squares for full-column-rank `A`.
pub fn normal_equations(a: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    (a.transpose() * a).cholesky().expect("full rank").solve(&(a.transpose() * y))
}
