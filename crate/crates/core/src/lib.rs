//! Finite-dimensional Hörmander functional calculus.
//!
//! The crate works with 0-sectorial matrices `A` and the function classes
//! that drive spectral multiplier theorems: exp-Sobolev (`S^α`), Mihlin
//! (`M^α`) and Hörmander (`H^α`) classes in logarithmic coordinates. On top of
//! these it computes
//!
//! * the special functions tying wave operators to imaginary powers
//!   ([`special`]),
//! * multiplier norms and partitions of unity ([`spaces`]),
//! * contour / eigen / Schur–Parlett functional calculus, operator families
//!   and the Mellin transform ([`operator`]),
//! * Rademacher averages, R-bounds and averaged `R[L²]`-bounds ([`rbound`]),
//! * the equivalence experiments for the characterization of `R`-bounded
//!   `S^α` calculus ([`suite`]),
//! * config-driven runs with CSV/JSON reports ([`run`]).

pub mod error;
pub mod operator;
pub mod quad;
pub mod rbound;
pub mod run;
pub mod spaces;
pub mod special;
pub mod suite;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type Mat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type Vector = nalgebra::DVector<C64>;

/// `⟨t⟩ = (1 + t²)^{1/2}`.
#[inline]
pub fn bracket(t: f64) -> f64 {
    t.hypot(1.0)
}
