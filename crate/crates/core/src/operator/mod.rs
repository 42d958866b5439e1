//! Functional calculus for finite-dimensional 0-sectorial operators.

mod contour;
mod extended;
mod families;
mod mellin;
pub mod linalg;
mod sectorial;

pub use contour::{holomorphic_calculus, ContourSpec};
pub use sectorial::{
    check_sectoriality, sectoriality_of, EigenData, RayBound, SectorialOperator, SectorialityReport,
    MAX_EIGEN_COND,
};
pub use families::{
    family_on, family_samples, imaginary_powers, power_it, regularized_imaginary_power, taylor_remainder, FamilyGrid,
    FamilyKind, RegularizedPower,
};
pub use mellin::{
    mellin_transform, random_unit_pairs, resolvent_bip_identity, w_alpha_mellin_identity, wave_mellin_identity,
    IdentityCheck, MellinNormalization, MellinTransform,
};
pub use extended::{calculus_core_projection, core_window_for, extended_hoermander_apply, CalculusCoreProjection, CoreWindow};
pub(crate) use sectorial::eigen_apply;
