//! The `S^α` calculus through the imaginary powers, and condition (1).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::operator::{eigen_apply, SectorialOperator};
use crate::rbound::{r_bound, RBoundEstimate, RSearchConfig, SpaceSpec};
use crate::spaces::{frequencies, ifft, Coordinate, GridSpec, SampledFunction, SobolevNorm};
use crate::{bracket, Error, Mat, Result, C64};

/// Largest admissible relative spectral mass near the Nyquist frequency.
const SPECTRAL_TAIL_TOL: f64 = 1e-6;

/// `f(A) = (2π)⁻¹ ∫ f̂_e(t) A^{it} dt`, with `f̂_e` the FFT of the log
/// samples and the integral summed over the DFT frequencies.
pub fn sobolev_calculus_apply(op: &SectorialOperator, f: &SampledFunction) -> Result<Mat> {
    if f.coordinate != Coordinate::Log {
        return Err(Error::input("the S^α calculus needs samples in log coordinates"));
    }
    let (t, fhat) = f.fourier();
    let n = f.len();
    let du = f.du();
    let nyq = PI / du;
    let total: f64 = fhat.iter().map(|c| c.norm_sqr()).sum();
    let high: f64 = fhat.iter().zip(&t).filter(|(_, tk)| tk.abs() > 0.9 * nyq).map(|(c, _)| c.norm_sqr()).sum();
    if total > 0.0 && high / total > SPECTRAL_TAIL_TOL {
        return Err(Error::resolution(format!(
            "spectral mass {:.2e} near the Nyquist frequency {nyq:.1}; refine the grid",
            high / total
        )));
    }
    let (u_lo, u_hi) = (f.grid.u_min, f.grid.u_max - du);
    for l in op.spectrum() {
        let u = l.norm().ln();
        if u < u_lo || u > u_hi {
            return Err(Error::Coverage(format!("|λ| = {} outside [e^{u_lo}, e^{u_hi}]", l.norm())));
        }
    }
    let dt = 2.0 * PI / (n as f64 * du);
    // coefficients at the rounding floor are dropped: off the positive axis
    // λ^{it} grows like e^{|t arg λ|} and would amplify them
    let floor = 1e-15 * fhat.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut coef: Vec<(f64, C64)> = Vec::with_capacity(n + 1);
    for (k, (&tk, &c)) in t.iter().zip(&fhat).enumerate() {
        if c.norm() <= floor {
            continue;
        }
        let c = c * dt / (2.0 * PI);
        if n % 2 == 0 && k == n / 2 {
            // split the Nyquist bin evenly between ±π/du
            coef.push((tk, 0.5 * c));
            coef.push((-tk, 0.5 * c * C64::new(0.0, -2.0 * nyq * f.grid.u_min).exp()));
        } else {
            coef.push((tk, c));
        }
    }
    let g = |l: C64| {
        let ll = l.ln();
        coef.iter().map(|&(tk, c)| c * (C64::new(0.0, tk) * ll).exp()).sum::<C64>()
    };
    match &op.eigen {
        Some(e) => Ok(eigen_apply(e, &g)),
        None => op.funm(&g),
    }
}

/// Shape of the generated `S^α` unit-ball corpus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSpec {
    pub size: usize,
    pub points: usize,
    /// Extra log-range on each side of the spectrum for the centers.
    pub center_margin: f64,
    /// Grid extent beyond the centers.
    pub grid_margin: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { size: 200, points: 4096, center_margin: 1.0, grid_margin: 24.0 }
    }
}

/// Unit vectors of `‖⟨t⟩^α f̂_e‖_{L²(dt)}` adapted to the spectrum of `op`.
///
/// Four fifths are the point-evaluation extremals `f̂_e(t) = ⟨t⟩^{-2α}
/// e^{-itc}` with centers `c` spread over the log-spectrum, the rest are
/// Gaussians in `log λ` of widths ¼ … 2.
pub fn sobolev_unit_corpus(op: &SectorialOperator, alpha: f64, spec: &CorpusSpec) -> Result<Vec<SampledFunction>> {
    if !(alpha >= 0.0) {
        return Err(Error::domain(format!("Sobolev order {alpha} must be >= 0")));
    }
    if spec.size == 0 || spec.points < 64 {
        return Err(Error::input("corpus needs at least one function and 64 points"));
    }
    let (lo, hi) = op.spectral_range();
    let (c_lo, c_hi) = (lo.ln() - spec.center_margin, hi.ln() + spec.center_margin);
    let grid = GridSpec::new(c_lo - spec.grid_margin, c_hi + spec.grid_margin, spec.points)?;
    let du = grid.du();
    let t = frequencies(spec.points, du);
    let norm = SobolevNorm::fourier_side_bracket();
    let center = |k: usize, count: usize| {
        if count == 1 {
            0.5 * (c_lo + c_hi)
        } else {
            c_lo + (c_hi - c_lo) * k as f64 / (count - 1) as f64
        }
    };
    let n_ext = (spec.size * 4 / 5).max(1);
    let n_gauss = spec.size - n_ext;
    let mut out = Vec::with_capacity(spec.size);
    for k in 0..n_ext {
        let c = center(k, n_ext);
        let spectrum: Vec<C64> = t
            .iter()
            .enumerate()
            .map(|(j, &tk)| {
                if spec.points % 2 == 0 && j == spec.points / 2 {
                    return C64::new(0.0, 0.0);
                }
                C64::from_polar(bracket(tk).powf(-2.0 * alpha) / du, tk * (grid.u_min - c))
            })
            .collect();
        let values = ifft(&spectrum);
        out.push(SampledFunction::from_samples(Coordinate::Log, grid, values)?);
    }
    const WIDTHS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
    for k in 0..n_gauss {
        let (c, w) = (center(k, n_gauss), WIDTHS[k % WIDTHS.len()]);
        out.push(SampledFunction::log(grid, |l| {
            C64::new((-(l.ln() - c).powi(2) / (2.0 * w * w)).exp(), 0.0)
        })?);
    }
    out.into_iter()
        .map(|f| {
            let (v, _) = norm.of_samples(&f.values, du, alpha);
            Ok(f.map(|_, z| z / v))
        })
        .collect()
}

/// `R({f(A) : f ∈ corpus})`; the corpus is used as given (callers pass
/// normalized functions).
pub fn condition_c1(
    op: &SectorialOperator,
    space: &SpaceSpec,
    corpus: &[SampledFunction],
    search: &RSearchConfig,
) -> Result<RBoundEstimate> {
    if corpus.is_empty() {
        return Err(Error::input("empty corpus"));
    }
    let ops: Vec<Mat> = corpus.par_iter().map(|f| sobolev_calculus_apply(op, f)).collect::<Result<_>>()?;
    r_bound(&ops, space, search)
}
