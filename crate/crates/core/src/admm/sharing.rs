use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::config::{InnerSolverConfig, SolveResult, SolverConfig};
use super::lasso::norm;
use super::stopping::{stopping_check, IterateNorms};
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite_matrix, ensure_finite_vector, select_columns};

/// A design matrix whose columns are split into disjoint groups.
///
/// Groups are stored sorted internally and ordered by their smallest
/// column, so two descriptions of the same split compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnGroups {
    a: DMatrix<f64>,
    groups: Vec<Vec<usize>>,
}

impl ColumnGroups {
    pub fn new(a: DMatrix<f64>, groups: Vec<Vec<usize>>) -> Result<Self> {
        let d = a.ncols();
        if a.nrows() == 0 || d == 0 {
            return Err(Error::Dimension("design matrix is empty".into()));
        }
        ensure_finite_matrix(&a, "design matrix")?;
        let groups = canonical_groups(groups, d)?;
        Ok(ColumnGroups { a, groups })
    }

    /// Every column in its own group.
    pub fn singletons(a: DMatrix<f64>) -> Result<Self> {
        let groups = (0..a.ncols()).map(|j| vec![j]).collect();
        ColumnGroups::new(a, groups)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Sorts each group and orders groups by first index; rejects empty,
/// overlapping or non-covering splits of `0..dim`.
pub(crate) fn canonical_groups(mut groups: Vec<Vec<usize>>, dim: usize) -> Result<Vec<Vec<usize>>> {
    if groups.is_empty() {
        return Err(Error::InvalidArgument("at least one group is required".into()));
    }
    let mut seen = vec![false; dim];
    for g in groups.iter_mut() {
        if g.is_empty() {
            return Err(Error::InvalidArgument("empty group".into()));
        }
        g.sort_unstable();
        for &j in g.iter() {
            if j >= dim {
                return Err(Error::InvalidArgument(format!(
                    "index {j} out of range for dimension {dim}"
                )));
            }
            if seen[j] {
                return Err(Error::InvalidArgument(format!("index {j} appears twice")));
            }
            seen[j] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidArgument(format!("index {missing} is not covered")));
    }
    groups.sort_by_key(|g| g[0]);
    Ok(groups)
}

/// Exact minimizer of `ρ‖Ĥx − w‖² + λ‖x‖₂` for a fixed block `Ĥ`.
///
/// Away from zero the optimum solves `(2ρĤᵀĤ + μI)x = 2ρĤᵀw` with
/// `μ‖x‖ = λ`; `μ` is found by bisection in the eigenbasis of `ĤᵀĤ`.
#[derive(Debug, Clone)]
struct GroupProx {
    block: DMatrix<f64>,
    eigvecs: DMatrix<f64>,
    eigvals: DVector<f64>,
}

impl GroupProx {
    fn new(block: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(block.tr_mul(&block));
        GroupProx {
            block,
            eigvecs: eig.eigenvectors,
            eigvals: eig.eigenvalues.map(|v| v.max(0.0)),
        }
    }

    fn solve(&self, w: &DVector<f64>, rho: f64, lambda: f64, inner: &InnerSolverConfig) -> DVector<f64> {
        let g = self.block.tr_mul(w) * (2.0 * rho);
        let g_norm = norm(&g);
        let d = g.len();
        if g_norm <= lambda {
            return DVector::zeros(d);
        }
        let gt = self.eigvecs.tr_mul(&g);
        let curv = self.eigvals.map(|v| 2.0 * rho * v);
        if lambda == 0.0 {
            // plain least squares on the range of Ĥ
            let scaled = DVector::from_fn(d, |j, _| {
                if curv[j] > 1e-12 * curv.max() {
                    gt[j] / curv[j]
                } else {
                    0.0
                }
            });
            return &self.eigvecs * scaled;
        }
        // h(μ) = μ‖x(μ)‖ increases from ~0 to ‖g‖ > λ
        let h = |mu: f64| {
            gt.iter()
                .zip(curv.iter())
                .map(|(gj, cj)| {
                    let t = gj * mu / (cj + mu);
                    t * t
                })
                .sum::<f64>()
                .sqrt()
        };
        let mut lo = 0.0;
        let mut hi = (lambda * curv.max() / (g_norm - lambda)).max(lambda);
        while h(hi) < lambda {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..inner.max_iter {
            let mid = 0.5 * (lo + hi);
            if h(mid) < lambda {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= inner.tolerance * hi {
                break;
            }
        }
        let mu = 0.5 * (lo + hi);
        let scaled = DVector::from_fn(d, |j, _| gt[j] / (curv[j] + mu));
        &self.eigvecs * scaled
    }
}

/// Sharing ADMM for `‖Ax − y‖² + λΣᵢ‖xᵢ‖₂` where `xᵢ` are the column
/// groups of `x`.
///
/// Each group keeps its own block `xᵢ` and only exchanges `Ĥᵢxᵢ` through
/// the average `Hx̄`; the auxiliary `v̄` and scaled dual `u` live in
/// measurement space:
///
/// ```text
/// xᵢ ← argmin ρ‖Ĥᵢx − (Ĥᵢxᵢ + v̄ − Hx̄ − u)‖² + λ‖x‖₂
/// v̄  ← (y + ρHx̄ + ρu) / (G + ρ)
/// u  ← u + Hx̄ − v̄
/// ```
///
/// `solution` is `x` in original column order, `local` the per-group
/// blocks, `auxiliary` the fit `Ax`, and `objective` the cost per
/// iteration. Setting every column as its own group gives the LASSO
/// `½‖Ax − y‖² + (λ/2)‖x‖₁`.
pub fn sharing_group_lasso_admm(
    problem: &ColumnGroups,
    y: &DVector<f64>,
    config: &SolverConfig,
    inner: &InnerSolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    if !(inner.tolerance > 0.0) || inner.max_iter == 0 {
        return Err(Error::InvalidArgument("inner solver settings must be positive".into()));
    }
    let a = problem.matrix();
    let (n, d) = a.shape();
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "y has length {} but A has {n} rows",
            y.len()
        )));
    }
    ensure_finite_vector(y, "observation vector")?;

    let g = problem.len();
    let gf = g as f64;
    let rho = config.rho;
    let lambda = config.lambda;
    let proxes: Vec<GroupProx> = problem
        .groups()
        .iter()
        .map(|cols| GroupProx::new(select_columns(a, cols)))
        .collect();

    let mut xs: Vec<DVector<f64>> = problem.groups().iter().map(|c| DVector::zeros(c.len())).collect();
    let mut fits: Vec<DVector<f64>> = vec![DVector::zeros(n); g];
    let mut hx_bar = DVector::zeros(n);
    let mut v_bar = DVector::zeros(n);
    let mut u = DVector::zeros(n);
    let mut primal = Vec::new();
    let mut dual = Vec::new();
    let mut objective = Vec::new();
    let mut converged = false;
    let root_g = gf.sqrt();

    for _ in 0..config.max_iter {
        let shift = &v_bar - &hx_bar - &u;
        let updated: Vec<(DVector<f64>, DVector<f64>)> = proxes
            .par_iter()
            .zip(fits.par_iter())
            .map(|(prox, fit)| {
                let w = fit + &shift;
                let x = prox.solve(&w, rho, lambda, inner);
                let f = &prox.block * &x;
                (x, f)
            })
            .collect();
        for (i, (x, f)) in updated.into_iter().enumerate() {
            xs[i] = x;
            fits[i] = f;
        }
        let mut total = DVector::zeros(n);
        for f in &fits {
            total += f;
        }
        hx_bar = &total / gf;

        let previous = v_bar;
        v_bar = (y + &hx_bar * rho + &u * rho) / (gf + rho);
        u += &hx_bar - &v_bar;

        let misfit = norm(&(&total - y));
        objective.push(misfit * misfit + lambda * xs.iter().map(norm).sum::<f64>());
        let r = root_g * norm(&(&hx_bar - &v_bar));
        let s = rho * root_g * norm(&(&v_bar - &previous));
        primal.push(r);
        dual.push(s);
        let norms = IterateNorms {
            x: root_g * norm(&hx_bar),
            z: root_g * norm(&v_bar),
            dual: rho * root_g * norm(&u),
        };
        if stopping_check(r, s, norms, n, config) {
            converged = true;
            break;
        }
    }

    let mut solution = DVector::zeros(d);
    for (cols, x) in problem.groups().iter().zip(&xs) {
        for (k, &j) in cols.iter().enumerate() {
            solution[j] = x[k];
        }
    }
    let fit = &hx_bar * gf;
    Ok(SolveResult {
        solution,
        auxiliary: fit,
        local: xs,
        iterations: primal.len(),
        primal_residuals: primal,
        dual_residuals: dual,
        objective,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admm::lasso::lasso_admm;
    use crate::admm::threshold::block_soft_threshold;

    fn tight() -> SolverConfig {
        SolverConfig::default()
            .with_tolerances(1e-9, 1e-9)
            .with_max_iter(200_000)
    }

    #[test]
    fn groups_are_canonicalized() {
        let a = DMatrix::identity(4, 4);
        let p = ColumnGroups::new(a.clone(), vec![vec![3, 1], vec![2, 0]]).unwrap();
        assert_eq!(p.groups(), &[vec![0, 2], vec![1, 3]]);
        assert!(ColumnGroups::new(a.clone(), vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(ColumnGroups::new(a.clone(), vec![vec![0, 1], vec![2]]).is_err());
        assert!(ColumnGroups::new(a, vec![vec![0, 1, 2, 3, 4]]).is_err());
    }

    #[test]
    fn prox_zero_region_and_stationarity() {
        let block = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 2.0, 0.7, 0.1]);
        let prox = GroupProx::new(block.clone());
        let w = DVector::from_column_slice(&[1.0, -2.0, 0.5]);
        let (rho, lambda) = (1.0, 0.8);
        let x = prox.solve(&w, rho, lambda, &InnerSolverConfig::default());
        let grad = block.tr_mul(&(&block * &x - &w)) * (2.0 * rho) + &x * (lambda / norm(&x));
        assert!(grad.amax() < 1e-6);
        let big = prox.solve(&w, rho, 1e3, &InnerSolverConfig::default());
        assert_eq!(big, DVector::zeros(2));
    }

    #[test]
    fn singletons_match_lasso_at_half_lambda() {
        let a = DMatrix::from_fn(15, 5, |i, j| ((i * 5 + j) as f64 * 0.61).sin());
        let y = DVector::from_fn(15, |i, _| (i as f64 * 0.3).cos());
        let lambda = 0.2 * a.tr_mul(&y).amax();
        let oracle = lasso_admm(&a, &y, &tight().with_lambda(lambda / 2.0)).unwrap();
        let res = sharing_group_lasso_admm(
            &ColumnGroups::singletons(a).unwrap(),
            &y,
            &tight().with_lambda(lambda),
            &InnerSolverConfig::default(),
        )
        .unwrap();
        assert!(res.converged);
        assert!((res.solution - oracle.solution).amax() < 1e-3);
    }

    #[test]
    fn orthonormal_groups_block_soft_threshold() {
        // A = I: ‖x − y‖² + λΣ‖xᵢ‖₂ gives xᵢ = block_soft(yᵢ, λ/2)
        let a = DMatrix::identity(4, 4);
        let y = DVector::from_column_slice(&[3.0, 4.0, 0.2, -0.1]);
        let lambda = 2.0;
        let res = sharing_group_lasso_admm(
            &ColumnGroups::new(a, vec![vec![0, 1], vec![2, 3]]).unwrap(),
            &y,
            &tight().with_lambda(lambda),
            &InnerSolverConfig::default(),
        )
        .unwrap();
        let first = block_soft_threshold(&y.rows(0, 2).into_owned(), lambda / 2.0);
        assert!((res.solution[0] - first[0]).abs() < 1e-4);
        assert!((res.solution[1] - first[1]).abs() < 1e-4);
        assert_eq!(res.local[1], DVector::zeros(2));
    }

    #[test]
    fn zero_observation() {
        let a = DMatrix::from_fn(6, 4, |i, j| ((i + 3 * j) as f64).cos());
        let res = sharing_group_lasso_admm(
            &ColumnGroups::new(a, vec![vec![0, 1], vec![2, 3]]).unwrap(),
            &DVector::zeros(6),
            &SolverConfig::default().with_lambda(0.5),
            &InnerSolverConfig::default(),
        )
        .unwrap();
        assert_eq!(res.solution, DVector::zeros(4));
    }
}
