//! Rademacher averages, R-bounds and averaged `R[L²]`-bounds.

mod averaged;
mod family;
mod rademacher;

pub use family::{FamilyStorage, Measure, OperatorFamily};
pub use rademacher::{
    operator_norm_upper, r_bound, rademacher_moment, rademacher_norm, square_sum_norm, RBoundEstimate, RMethod,
    RSearchConfig, RademacherBudget, RademacherValue, SpaceSpec,
};
pub use averaged::{
    averaged_operator, family_l2_norm, r_l1_vs_rbound, r_l2_bound, sample_unit_ball, transform_family, FamilyTarget,
    L1Comparison, L2BasisConfig,
};
