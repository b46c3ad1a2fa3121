use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Factorization of `AᵀA + ρI` for repeated ridge solves. Tall matrices
/// factor the `D×D` Gram matrix; wide ones factor `AAᵀ + ρI` (`N×N`) and
/// apply `(AᵀA + ρI)⁻¹ = (I − Aᵀ(AAᵀ + ρI)⁻¹A)/ρ`.
#[derive(Debug, Clone)]
pub(crate) struct RidgeFactor {
    rho: f64,
    kind: FactorKind,
}

#[derive(Debug, Clone)]
enum FactorKind {
    Tall(Cholesky<f64, Dyn>),
    Wide {
        a: DMatrix<f64>,
        chol: Cholesky<f64, Dyn>,
    },
}

impl RidgeFactor {
    pub(crate) fn new(a: &DMatrix<f64>, rho: f64) -> Self {
        let (n, d) = a.shape();
        let kind = if n >= d {
            let mut gram = a.tr_mul(a);
            for i in 0..d {
                gram[(i, i)] += rho;
            }
            FactorKind::Tall(Cholesky::new(gram).expect("AᵀA + ρI is positive definite"))
        } else {
            let mut gram = a * a.transpose();
            for i in 0..n {
                gram[(i, i)] += rho;
            }
            FactorKind::Wide {
                a: a.clone(),
                chol: Cholesky::new(gram).expect("AAᵀ + ρI is positive definite"),
            }
        };
        RidgeFactor { rho, kind }
    }

    pub(crate) fn rho(&self) -> f64 {
        self.rho
    }

    /// Solves `(AᵀA + ρI) x = rhs`.
    pub(crate) fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            FactorKind::Tall(chol) => chol.solve(rhs),
            FactorKind::Wide { a, chol } => {
                let inner = chol.solve(&(a * rhs));
                (rhs - a.tr_mul(&inner)) / self.rho
            }
        }
    }
}
