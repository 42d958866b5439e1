//! Multiplier norms: Sobolev `W^α₂`, Besov `B^α_{∞,1}`, Mihlin `M^α`,
//! exp-Sobolev `S^α`, Hörmander `H^α`, and the classical and modern forms of
//! the Hörmander condition.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{fft, frequencies, ifft, Coordinate, SampledFunction};
use super::partition::{PartitionKind, PartitionOfUnity};
use crate::quad::gauss_legendre;
use crate::{bracket, Error, Result, C64};

/// Relative tail mass above which a warning is attached.
pub const TAIL_WARNING: f64 = 1e-6;
/// Relative tail mass above which an `L²`-type norm is declared divergent.
pub const TAIL_DIVERGENT: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Sobolev,
    Besov,
    Mihlin,
    SobExp,
    Hoermander,
    ClassicalHoermander,
    ModernHoermander,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormDiagnostics {
    /// Relative `L²` mass near the grid ends.
    pub tail_mass: f64,
    /// Relative weighted spectral energy above 90% of the Nyquist frequency.
    pub spectral_tail: f64,
    /// Index window of partition members or dyadic blocks that was summed.
    pub window: Option<(i64, i64)>,
    /// Size of the outermost included term (tail bound for sums and sups).
    pub last_term: f64,
    /// Value before a divergence flag replaced it by `+∞`.
    pub truncated_value: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub kind: NormKind,
    pub alpha: f64,
    pub divergent: bool,
    pub diagnostics: NormDiagnostics,
}

impl NormResult {
    fn finite(kind: NormKind, alpha: f64, value: f64, diagnostics: NormDiagnostics) -> Self {
        let mut diagnostics = diagnostics;
        diagnostics.truncated_value = value;
        NormResult { value, kind, alpha, divergent: false, diagnostics }
    }

    fn mark_divergent(mut self, why: String) -> Self {
        self.divergent = true;
        self.value = f64::INFINITY;
        self.diagnostics.warnings.push(why);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SobolevWeight {
    /// `(1 + |t|)^α`.
    OnePlusAbs,
    /// `⟨t⟩^α = (1 + t²)^{α/2}`.
    Bracket,
}

/// A Sobolev-type norm `c ‖w(t)^α f̂(t)‖_{L²(dt)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SobolevNorm {
    pub weight: SobolevWeight,
    /// `c = (2π)^{-1/2}` (so that `α = 0` gives the `L²` norm) when set,
    /// else `c = 1`.
    pub plancherel: bool,
}

impl SobolevNorm {
    /// `(2π)^{-1/2} ‖(1+|t|)^α f̂‖₂`.
    pub const STANDARD: SobolevNorm =
        SobolevNorm { weight: SobolevWeight::OnePlusAbs, plancherel: true };

    /// `‖⟨t⟩^α f̂‖_{L²(dt)}`, the normalization under which the imaginary
    /// power family and the `S^α` calculus have matching averaged bounds.
    pub const fn fourier_side_bracket() -> SobolevNorm {
        SobolevNorm { weight: SobolevWeight::Bracket, plancherel: false }
    }

    pub fn weight_at(&self, t: f64, alpha: f64) -> f64 {
        match self.weight {
            SobolevWeight::OnePlusAbs => (1.0 + t.abs()).powf(alpha),
            SobolevWeight::Bracket => bracket(t).powf(alpha),
        }
    }

    /// Norm of raw samples with step `du`; returns `(value, spectral_tail)`.
    pub fn of_samples(&self, values: &[C64], du: f64, alpha: f64) -> (f64, f64) {
        let n = values.len();
        let t = frequencies(n, du);
        let raw = fft(values);
        let nyq = PI / du;
        let dt = 2.0 * PI / (n as f64 * du);
        let mut total = 0.0;
        let mut high = 0.0;
        for (v, &tk) in raw.iter().zip(&t) {
            let e = (v * du).norm_sqr() * self.weight_at(tk, alpha).powi(2);
            total += e;
            if tk.abs() > 0.9 * nyq {
                high += e;
            }
        }
        let mut integral = total * dt;
        if self.weight == SobolevWeight::OnePlusAbs {
            // trapezoid correction for the derivative jump of (1+|t|)^{2α} at t = 0
            integral += dt * dt / 12.0 * 4.0 * alpha * (raw[0] * du).norm_sqr();
        }
        let c2 = if self.plancherel { 1.0 / (2.0 * PI) } else { 1.0 };
        let tail = if total > 0.0 { high / total } else { 0.0 };
        ((c2 * integral).sqrt(), tail)
    }

    pub fn eval(&self, f: &SampledFunction, alpha: f64) -> Result<NormResult> {
        if !(alpha >= 0.0) {
            return Err(Error::domain(format!("Sobolev order {alpha} must be >= 0")));
        }
        let (value, spectral_tail) = self.of_samples(&f.values, f.du(), alpha);
        let mut diag = NormDiagnostics {
            tail_mass: f.tail_mass(),
            spectral_tail,
            ..Default::default()
        };
        if diag.tail_mass > TAIL_WARNING {
            diag.warnings.push(format!("tail mass {:.2e} at grid ends", diag.tail_mass));
        }
        if spectral_tail > TAIL_WARNING {
            diag.warnings.push(format!("spectral tail {spectral_tail:.2e} near Nyquist"));
        }
        Ok(NormResult::finite(NormKind::Sobolev, alpha, value, diag))
    }
}

fn require(f: &SampledFunction, coordinate: Coordinate) -> Result<()> {
    if f.coordinate != coordinate {
        return Err(Error::input(format!(
            "expected {coordinate:?} coordinates, got {:?}",
            f.coordinate
        )));
    }
    Ok(())
}

/// `‖f‖_{W^α₂} = (2π)^{-1/2} ‖(1+|t|)^α f̂‖₂`.
pub fn sobolev_norm(f: &SampledFunction, alpha: f64) -> Result<NormResult> {
    require(f, Coordinate::Linear)?;
    SobolevNorm::STANDARD.eval(f, alpha)
}

/// `‖f‖_{B^α_{∞,1}} = Σ_n 2^{|n|α} ‖f ∗ φ̃̌_n‖_∞`, with the Fourier-dyadic
/// partition `fourier` (truncated at the Nyquist frequency).
pub fn besov_norm(
    f: &SampledFunction,
    alpha: f64,
    fourier: &PartitionOfUnity,
) -> Result<NormResult> {
    require(f, Coordinate::Linear)?;
    besov_of(f, alpha, fourier, NormKind::Besov)
}

fn besov_of(
    f: &SampledFunction,
    alpha: f64,
    fourier: &PartitionOfUnity,
    kind: NormKind,
) -> Result<NormResult> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("Besov order {alpha} must be > 0")));
    }
    if fourier.kind != PartitionKind::FourierDyadic {
        return Err(Error::input("Besov norm needs a Fourier-dyadic partition"));
    }
    let n = f.len();
    let du = f.du();
    let t = frequencies(n, du);
    let spec = fft(&f.values);
    let nyq = PI / du;
    let n_max = nyq.log2().ceil() as i64 + 2;
    let indices: Vec<i64> = (-n_max..=n_max).collect();
    let terms: Vec<(i64, f64)> = indices
        .par_iter()
        .map(|&k| {
            let block: Vec<C64> = spec
                .iter()
                .zip(&t)
                .map(|(v, &tk)| v * fourier.member(k, tk))
                .collect();
            if block.iter().all(|v| v.norm() == 0.0) {
                return (k, 0.0);
            }
            let sup = ifft(&block).iter().map(|v| v.norm()).fold(0.0, f64::max);
            (k, 2f64.powf(k.abs() as f64 * alpha) * sup)
        })
        .collect();
    let value: f64 = terms.iter().map(|x| x.1).sum();
    let last_term = terms
        .iter()
        .filter(|x| x.1 > 0.0)
        .max_by_key(|x| x.0.abs())
        .map(|x| x.1)
        .unwrap_or(0.0);
    let diag = NormDiagnostics {
        tail_mass: f.tail_mass(),
        window: Some((-n_max, n_max)),
        last_term,
        ..Default::default()
    };
    let result = NormResult::finite(kind, alpha, value, diag);
    if !value.is_finite() || value > 1e300 {
        return Ok(result.mark_divergent("partial sums overflow".into()));
    }
    Ok(result)
}

/// `‖f‖_{M^α} = ‖f_e‖_{B^α_{∞,1}}`.
pub fn mihlin_norm(
    f: &SampledFunction,
    alpha: f64,
    fourier: &PartitionOfUnity,
) -> Result<NormResult> {
    require(f, Coordinate::Log)?;
    besov_of(&f.as_linear(), alpha, fourier, NormKind::Mihlin)
}

/// `‖f‖_{S^α} = ‖f_e‖_{W^α₂}`; flagged divergent when `f_e` does not decay
/// on the grid.
pub fn sobexp_norm(f: &SampledFunction, alpha: f64) -> Result<NormResult> {
    require(f, Coordinate::Log)?;
    let mut r = SobolevNorm::STANDARD.eval(&f.as_linear(), alpha)?;
    r.kind = NormKind::SobExp;
    if r.diagnostics.tail_mass > TAIL_DIVERGENT {
        let why = format!("f_e not in L²: tail mass {:.2e}", r.diagnostics.tail_mass);
        return Ok(r.mark_divergent(why));
    }
    Ok(r)
}

/// `sup_n ‖φ_n f_e‖_{W^α₂}` over the equidistant members fully inside the
/// grid.
pub fn hoermander_norm(
    f: &SampledFunction,
    alpha: f64,
    partition: &PartitionOfUnity,
) -> Result<NormResult> {
    require(f, Coordinate::Log)?;
    if !(alpha > 0.5) {
        return Err(Error::domain(format!("Hörmander order {alpha} must exceed 1/2")));
    }
    if partition.kind != PartitionKind::Equidistant {
        return Err(Error::input("Hörmander norm needs an equidistant partition"));
    }
    let r = 0.5 * (1.0 + partition.bump.params.width);
    let lo = f.grid.u_min;
    let hi = f.grid.u_max - f.du();
    let first = (lo + r).ceil() as i64;
    let last = (hi - r).floor() as i64;
    if first > last {
        return Err(Error::resolution("grid shorter than one partition window"));
    }
    let indices: Vec<i64> = (first..=last).collect();
    let linear = f.as_linear();
    let values: Vec<(i64, f64)> = indices
        .par_iter()
        .map(|&n| {
            let windowed = linear.map(|u, v| v * partition.member(n, u));
            (n, SobolevNorm::STANDARD.of_samples(&windowed.values, f.du(), alpha).0)
        })
        .collect();
    let value = values.iter().map(|x| x.1).fold(0.0, f64::max);
    let last_term = values[0].1.max(values[values.len() - 1].1);
    let diag = NormDiagnostics {
        tail_mass: f.tail_mass(),
        window: Some((first, last)),
        last_term,
        ..Default::default()
    };
    Ok(NormResult::finite(NormKind::Hoermander, alpha, value, diag))
}

/// Ratio `‖f‖_{H^α}(p) / ‖f‖_{H^α}(q)` for two equidistant partitions.
pub fn partition_equivalence(
    f: &SampledFunction,
    alpha: f64,
    p: &PartitionOfUnity,
    q: &PartitionOfUnity,
) -> Result<f64> {
    Ok(hoermander_norm(f, alpha, p)?.value / hoermander_norm(f, alpha, q)?.value)
}

/// `g_k = t^k f^{(k)}(t)` in log coordinates, `k = 0..=order`, via
/// `g_{k+1} = (d/du - k) g_k` with spectral differentiation.
pub fn log_derivatives(f: &SampledFunction, order: u32) -> Result<Vec<SampledFunction>> {
    require(f, Coordinate::Log)?;
    let mut out = vec![f.clone()];
    for k in 0..order {
        let g = &out[k as usize];
        let d = g.derivative();
        let next = d.values.iter().zip(&g.values).map(|(a, b)| a - b * k as f64).collect();
        out.push(SampledFunction { values: next, ..g.clone() });
    }
    Ok(out)
}

/// `Σ_{k≤α₁} sup_R ∫_{R/2}^{2R} |R^k f^{(k)}(t)|² dt/R` from the samples
/// `derivs[k] = t^k f^{(k)}(t)` (log coordinates), with `R` on the grid.
pub fn classical_hoermander(derivs: &[SampledFunction], alpha1: u32) -> Result<NormResult> {
    if derivs.len() < alpha1 as usize + 1 {
        return Err(Error::input(format!(
            "{} derivative arrays supplied, {} needed",
            derivs.len(),
            alpha1 + 1
        )));
    }
    for g in derivs {
        require(g, Coordinate::Log)?;
        derivs[0].check_same_grid(g)?;
    }
    let grid = derivs[0].grid;
    let du = grid.du();
    let lo = grid.u_min + LN_2;
    let hi = grid.u_max - du - LN_2;
    if lo > hi {
        return Err(Error::resolution("grid shorter than one dyadic annulus"));
    }
    let count = (((hi - lo) / du) as usize + 1).min(2048);
    let (gx, gw) = gauss_legendre(48);
    let mut total = 0.0;
    let mut last_term: f64 = 0.0;
    for (k, g) in derivs.iter().enumerate().take(alpha1 as usize + 1) {
        let sup = (0..count)
            .into_par_iter()
            .map(|i| {
                let r = lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64;
                // R^k f^{(k)}(t) = e^{k(r-u)} g_k(u),  dt/R = e^{u-r} du
                gx.iter()
                    .zip(&gw)
                    .map(|(x, w)| {
                        let u = r + LN_2 * x;
                        let e = (1.0 - 2.0 * k as f64) * (u - r);
                        w * LN_2 * g.eval(u).norm_sqr() * e.exp()
                    })
                    .sum::<f64>()
            })
            .reduce(|| 0.0, f64::max);
        total += sup;
        last_term = sup;
    }
    let diag = NormDiagnostics { last_term, ..Default::default() };
    Ok(NormResult::finite(NormKind::ClassicalHoermander, alpha1 as f64, total, diag))
}

/// `sup_τ ‖ψ_e(· - τ) f_e‖_{W^α₂}`, i.e. `sup_{t>0} ‖ψ f(t·)‖_{S^α}`, with
/// `ψ` the zeroth member of an equidistant or dyadic partition.
pub fn modern_hoermander(
    f: &SampledFunction,
    alpha: f64,
    psi: &PartitionOfUnity,
) -> Result<NormResult> {
    require(f, Coordinate::Log)?;
    let scale = match psi.kind {
        PartitionKind::Equidistant => 1.0,
        PartitionKind::Dyadic => LN_2,
        PartitionKind::FourierDyadic => {
            return Err(Error::input("modern Hörmander condition needs a bump on ℝ₊"))
        }
    };
    let r = 0.5 * (1.0 + psi.bump.params.width) * scale;
    let du = f.du();
    let lo = f.grid.u_min + r;
    let hi = f.grid.u_max - du - r;
    if lo > hi {
        return Err(Error::resolution("grid shorter than the cutoff support"));
    }
    let count = (((hi - lo) / du) as usize + 1).min(256);
    let linear = f.as_linear();
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let tau = lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64;
            let w = linear.map(|u, v| v * psi.member_log(0, u - tau));
            SobolevNorm::STANDARD.of_samples(&w.values, du, alpha).0
        })
        .collect();
    let value = values.iter().cloned().fold(0.0, f64::max);
    let diag = NormDiagnostics {
        tail_mass: f.tail_mass(),
        last_term: values[0].max(values[values.len() - 1]),
        ..Default::default()
    };
    Ok(NormResult::finite(NormKind::ModernHoermander, alpha, value, diag))
}
