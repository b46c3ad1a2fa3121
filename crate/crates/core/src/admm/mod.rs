//! ADMM solvers: LASSO, regressor selection, basis pursuit, global
//! consensus over row blocks and sharing over column groups.

mod basis_pursuit;
mod config;
mod consensus;
mod lasso;
mod ridge;
mod sharing;
mod stopping;
mod threshold;

pub use basis_pursuit::{basis_pursuit_admm, INFEASIBILITY_TOLERANCE};
pub use config::{InnerSolverConfig, SolveResult, SolveSummary, SolverConfig};
pub use consensus::{consensus_lasso_admm, RowBlocks};
pub use lasso::{lasso_admm, regressor_selection_admm, LassoSolver};
pub use sharing::{sharing_group_lasso_admm, ColumnGroups};
pub use stopping::{stopping_check, IterateNorms};
pub use threshold::{block_soft_threshold, hard_threshold_keep_k, soft_threshold};

pub(crate) use lasso::norm;
pub(crate) use sharing::canonical_groups;
