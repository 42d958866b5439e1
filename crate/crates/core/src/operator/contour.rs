//! Cauchy-integral functional calculus on the boundary of a sector.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{identity, norm_fro, zeros};
use super::sectorial::SectorialOperator;
use crate::{Error, Mat, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    /// Half-angle `σ` of the sector whose boundary is integrated over.
    pub sigma: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Initial trapezoid step in `log r`.
    pub step: f64,
    /// Step halvings allowed before giving up.
    pub max_refinements: u32,
    pub rel_tol: f64,
}

impl ContourSpec {
    /// Defaults adapted to the spectrum of `a`: `σ = max(π/4, (ω + π)/2)`
    /// capped below `π`, radii ten decades beyond the spectrum.
    pub fn for_operator(a: &SectorialOperator) -> Self {
        let (lo, hi) = a.spectral_range();
        let sigma = if a.omega < PI / 4.0 { PI / 4.0 } else { 0.5 * (a.omega + PI) };
        ContourSpec {
            sigma,
            r_min: lo * 1e-10,
            r_max: hi * 1e10,
            step: 0.15,
            max_refinements: 6,
            rel_tol: 1e-12,
        }
    }

    pub fn validate(&self, a: &SectorialOperator) -> Result<()> {
        let (lo, hi) = a.spectral_range();
        if !(self.sigma > a.omega && self.sigma < PI) {
            return Err(Error::Contour(format!(
                "contour angle {} must lie in (ω, π) with ω = {}",
                self.sigma, a.omega
            )));
        }
        if a.spectrum().iter().any(|l| (l.arg().abs() - self.sigma).abs() < 1e-8) {
            return Err(Error::Contour("eigenvalue on the contour".into()));
        }
        if !(self.r_min < lo / 10.0 && self.r_max > hi * 10.0) {
            return Err(Error::Contour(format!(
                "radii [{}, {}] do not enclose the spectrum [{lo}, {hi}] by a decade",
                self.r_min, self.r_max
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::Contour("step must be positive".into()));
        }
        Ok(())
    }
}

/// Trapezoid sum of the Cauchy integral over the nodes `u_k = log r_min + k h`,
/// with the sum of the term norms (the roundoff scale).
fn cauchy_sum(a: &SectorialOperator, f: &(dyn Fn(C64) -> C64 + Sync), c: &ContourSpec, h: f64) -> Result<(Mat, f64)> {
    let n = a.dim();
    let (u0, u1) = (c.r_min.ln(), c.r_max.ln());
    let count = ((u1 - u0) / h).ceil() as usize + 1;
    let h = (u1 - u0) / (count - 1) as f64;
    let terms: Vec<Result<(Mat, f64)>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let r = (u0 + k as f64 * h).exp();
            let w = if k == 0 || k == count - 1 { 0.5 * h } else { h };
            let mut acc = zeros(n);
            let mut mass = 0.0;
            // lower ray outward (+), upper ray inward (−): counterclockwise
            for (sign, orient) in [(-1.0, 1.0), (1.0, -1.0)] {
                let dir = C64::from_polar(1.0, sign * c.sigma);
                let lambda = dir * r;
                let res = (identity(n) * lambda - &a.matrix)
                    .try_inverse()
                    .ok_or_else(|| Error::Contour(format!("singular resolvent at {lambda}")))?;
                let term = res * (f(lambda) * dir * r * (orient * w));
                mass += norm_fro(&term);
                acc += term;
            }
            Ok((acc, mass))
        })
        .collect();
    let mut total = zeros(n);
    let mut mass = 0.0;
    for t in terms {
        let (m, s) = t?;
        total += m;
        mass += s;
    }
    Ok((total / C64::new(0.0, 2.0 * PI), mass / (2.0 * PI)))
}

/// `f(A) = (2πi)⁻¹ ∫_{∂Σ_σ} f(λ)(λ - A)⁻¹ dλ` by the trapezoid rule in
/// `log |λ|`, halving the step until successive values agree.
pub fn holomorphic_calculus(
    a: &SectorialOperator,
    f: &(dyn Fn(C64) -> C64 + Sync),
    contour: &ContourSpec,
) -> Result<Mat> {
    contour.validate(a)?;
    let mut h = contour.step;
    let (mut prev, _) = cauchy_sum(a, f, contour, h)?;
    for _ in 0..contour.max_refinements {
        h *= 0.5;
        let (next, mass) = cauchy_sum(a, f, contour, h)?;
        let diff = norm_fro(&(&next - &prev));
        // cancellation in the sum puts a floor under the attainable accuracy
        let floor = 64.0 * f64::EPSILON * mass;
        if diff <= contour.rel_tol * norm_fro(&next) + floor {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::resolution("contour quadrature did not stabilize"))
}
