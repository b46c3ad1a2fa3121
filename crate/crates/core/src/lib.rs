//! Sparse false-data-injection attacks and distributed state estimation on
//! DC power-flow models.
//!
//! The crate is organised around the measurement model `z = Hx + n`:
//!
//! - [`grid`] loads test systems and builds the DC Jacobian `H`.
//! - [`admm`] holds the LASSO, regressor-selection, consensus, sharing and
//!   basis-pursuit solvers.
//! - [`attack`] constructs targeted, strategic, random and cooperative attacks.
//! - [`estimation`] runs WLS, distributed, collaborative and sparse-change estimators.
//! - [`detection`] applies the residual test and scores it.
//! - [`experiment`] sweeps sparsity ratios over seeded realizations and writes CSV.
//!
//! ```
//! use gridsparse::grid::{build_dc_jacobian, IeeeSystem, MeasurementScheme};
//!
//! let model = build_dc_jacobian(&IeeeSystem::Ieee30.load(), &MeasurementScheme::Default).unwrap();
//! assert_eq!(model.n_states(), 30);
//! ```

pub mod admm;
pub mod attack;
pub mod detection;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod grid;
pub mod linalg;
pub mod partition;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid-model.md")]
    mod grid_model {}
    #[doc = include_str!("../../../book/src/admm.md")]
    mod admm {}
    #[doc = include_str!("../../../book/src/attacks.md")]
    mod attacks {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
