//! False-data-injection attack construction.

mod cooperative;
mod observability;
mod projection;
mod random;
mod strategic;
mod targeted;
mod types;

pub use cooperative::{collective_sparse_attack, distributed_sparse_attack};
pub use observability::{unobservability_check, Unobservability};
pub use projection::{build_projection, ProjectionPair};
pub use random::{random_sparse_attack, random_sparse_vector};
pub use strategic::{
    strategic_lasso_attack, strategic_selective_attack, StrategicConfig, ZERO_ROW_TOL,
};
pub use targeted::{attack_from_projection, targeted_lasso_attack, targeted_selective_attack};
pub use types::{AttackKind, AttackSpec, AttackVector};
