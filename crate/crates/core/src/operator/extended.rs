//! The extended Hörmander calculus `f(A) = Σ_n (fψ_n)(A)` and the dyadic
//! projections onto the calculus core.

use serde::{Deserialize, Serialize};

use super::sectorial::{eigen_apply, EigenData, SectorialOperator};
use crate::spaces::{Coordinate, PartitionKind, PartitionOfUnity, SampledFunction};
use crate::{Error, Mat, Result, C64};

fn positive_eigen(op: &SectorialOperator) -> Result<(&EigenData, Vec<f64>)> {
    let e = op.eigen.as_ref().ok_or_else(|| {
        Error::input(format!("{} has no usable eigendecomposition for a sampled multiplier", op.name))
    })?;
    let values = e
        .values
        .iter()
        .map(|l| {
            if l.re > 0.0 && l.im.abs() <= 1e-10 * l.norm() {
                Ok(l.re)
            } else {
                Err(Error::input(format!("sampled multipliers need a positive spectrum, got {l}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((e, values))
}

fn check_dyadic(partition: &PartitionOfUnity) -> Result<()> {
    if partition.kind == PartitionKind::Dyadic {
        Ok(())
    } else {
        Err(Error::input("extended calculus needs a dyadic partition"))
    }
}

/// `Σ_n (fψ_n)(A)` over the dyadic members meeting the spectrum, for `f`
/// sampled in log coordinates.
pub fn extended_hoermander_apply(
    op: &SectorialOperator,
    f: &SampledFunction,
    partition: &PartitionOfUnity,
) -> Result<Mat> {
    check_dyadic(partition)?;
    if f.coordinate != Coordinate::Log {
        return Err(Error::input("multiplier must be sampled in log coordinates"));
    }
    let (e, values) = positive_eigen(op)?;
    let (u_lo, u_hi) = (f.grid.u_min, f.grid.u_max - f.du());
    for &l in &values {
        let u = l.ln();
        if u < u_lo || u > u_hi {
            return Err(Error::Coverage(format!(
                "eigenvalue {l} outside the multiplier grid [e^{u_lo}, e^{u_hi}]"
            )));
        }
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let mut total = Mat::zeros(op.dim(), op.dim());
    for n in partition.indices_meeting(lo, hi) {
        let piece = |l: C64| {
            let u = l.re.ln();
            f.eval(u) * partition.member_log(n, u)
        };
        total += eigen_apply(e, &piece);
    }
    Ok(total)
}

/// `P = Σ_{|n| ≤ N} ψ_n(A)`.
#[derive(Clone, Debug)]
pub struct CalculusCoreProjection {
    pub window: (i64, i64),
    pub projector: Mat,
    /// The spectrum lies in `[2^{-N+1}, 2^{N-1}]`, so `P = I`.
    pub covers_spectrum: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreWindow {
    pub n: i64,
}

pub fn calculus_core_projection(
    op: &SectorialOperator,
    partition: &PartitionOfUnity,
    window: CoreWindow,
) -> Result<CalculusCoreProjection> {
    check_dyadic(partition)?;
    if window.n < 0 {
        return Err(Error::input("window size must be non-negative"));
    }
    let (e, values) = positive_eigen(op)?;
    let n = window.n;
    let psi_sum = |l: C64| {
        let u = l.re.ln();
        C64::new((-n..=n).map(|k| partition.member_log(k, u)).sum(), 0.0)
    };
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let covers = lo >= 2f64.powi(-(n as i32) + 1) && hi <= 2f64.powi(n as i32 - 1);
    Ok(CalculusCoreProjection { window: (-n, n), projector: eigen_apply(e, &psi_sum), covers_spectrum: covers })
}

/// Smallest `N` whose window covers the spectrum.
pub fn core_window_for(op: &SectorialOperator) -> CoreWindow {
    let (lo, hi) = op.spectral_range();
    let need = (1.0 - lo.log2()).max(hi.log2() + 1.0).ceil().max(0.0);
    CoreWindow { n: need as i64 }
}
