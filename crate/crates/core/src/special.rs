//! Complex Gamma function and the scalar kernels linking wave operators,
//! imaginary powers and the Mellin transform.
//!
//! The central identities are
//!
//! ```text
//! ∫_0^∞ s^z (e^{-s} - 1)^m ds/s = Γ(z) f_m(z),          Re z ∈ (-m, 0)
//! ∫_0^∞ s^z (e^{-λs} - 1)^m ds/s = λ^{-z} Γ(z) f_m(z),  Re λ ≥ 0
//! ```
//!
//! with `f_m(z) = Σ_{k=1}^m C(m,k) (-1)^{m-k} k^{-z}`. The integrals are
//! computed here by quadrature that never touches `Γ`, so each side can serve
//! as an oracle for the other.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quad::{self, AdaptiveConfig};
use crate::{bracket, Error, Result, C64};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A point `z = β + it` of a vertical strip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripPoint {
    pub beta: f64,
    pub t: f64,
}

impl StripPoint {
    pub fn new(beta: f64, t: f64) -> Result<Self> {
        if !beta.is_finite() || !t.is_finite() {
            return Err(Error::domain("strip point must have finite components"));
        }
        Ok(StripPoint { beta, t })
    }

    pub fn z(&self) -> C64 {
        C64::new(self.beta, self.t)
    }
}

/// Selects the wave group `e^{-isA}` (`Minus`, kernel `h₋`) or `e^{+isA}`
/// (`Plus`, kernel `h₊`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveSign {
    Minus,
    Plus,
}

impl WaveSign {
    /// `-1` for `e^{-isA}`, `+1` for `e^{+isA}`.
    pub fn as_f64(self) -> f64 {
        match self {
            WaveSign::Minus => -1.0,
            WaveSign::Plus => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveKernelParams {
    pub alpha: f64,
    pub m: u32,
    pub sign: WaveSign,
}

impl WaveKernelParams {
    /// Parameters for the `(e^{∓isA} - 1)^m` kernel; requires `α > ½` and
    /// `m > α - ½`.
    pub fn new(alpha: f64, m: u32, sign: WaveSign) -> Result<Self> {
        if !(alpha > 0.5) {
            return Err(Error::domain(format!("alpha = {alpha} must exceed 1/2")));
        }
        if (m as f64) <= alpha - 0.5 {
            return Err(Error::domain(format!(
                "m = {m} must exceed alpha - 1/2 = {}",
                alpha - 0.5
            )));
        }
        Ok(WaveKernelParams { alpha, m, sign })
    }
}

fn pole_index(z: C64) -> Option<i64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        Some(z.re as i64)
    } else {
        None
    }
}

/// `log sin(πz)`, stable for large `|Im z|`.
fn ln_sin_pi(z: C64) -> C64 {
    let w = z * PI;
    let i = C64::i();
    let ln_2i = C64::new(2f64.ln(), PI / 2.0);
    if w.im.abs() < 20.0 {
        w.sin().ln()
    } else if w.im > 0.0 {
        // sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        -i * w + ((i * w * 2.0).exp() - 1.0).ln() - ln_2i
    } else {
        // sin w = e^{iw} (1 - e^{-2iw}) / (2i)
        i * w + (1.0 - (-i * w * 2.0).exp()).ln() - ln_2i
    }
}

/// A logarithm of `Γ(z)` (not necessarily the principal branch on the left
/// half-plane, but `exp` of it is `Γ(z)`).
pub fn ln_gamma(z: C64) -> Result<C64> {
    if let Some(k) = pole_index(z) {
        return Err(Error::Pole(k));
    }
    if z.re < 0.5 {
        let reflected = ln_gamma(C64::new(1.0, 0.0) - z)?;
        return Ok(C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - reflected);
    }
    let z = z - 1.0;
    let mut series = C64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln())
}

/// Complex Gamma function (Lanczos approximation with reflection for
/// `Re z < ½`).
pub fn gamma(z: C64) -> Result<C64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain("gamma argument must be finite"));
    }
    if z.im == 0.0 && z.re > 0.0 && z.re <= 170.0 {
        // keep real arguments exactly real
        return Ok(C64::new(ln_gamma(z)?.exp().re, 0.0));
    }
    Ok(ln_gamma(z)?.exp())
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `f_m(z) = Σ_{k=1}^m C(m,k) (-1)^{m-k} k^{-z}`.
pub fn f_m(z: C64, m: u32) -> Result<C64> {
    f_m_derivative(z, m, 0)
}

/// `n`-th derivative of `f_m` in `z`.
pub fn f_m_derivative(z: C64, m: u32, n: u32) -> Result<C64> {
    if m == 0 {
        return Err(Error::domain("f_m requires m >= 1"));
    }
    let mut acc = C64::new(0.0, 0.0);
    for k in 1..=m {
        let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
        let lk = (k as f64).ln();
        let pow = (-z * lk).exp();
        acc += pow * (sign * binomial(m, k) * (-lk).powi(n as i32));
    }
    Ok(acc)
}

fn harmonic(k: u32) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// `Γ(z) f_m(z)`, continued through the removable singularities at
/// `z = -1, …, -(m-1)` where `f_m` vanishes.
pub fn gamma_fm(z: C64, m: u32) -> Result<C64> {
    let k = -z.re.round();
    let delta = z + k;
    if k >= 0.0 && delta.norm() < 1e-6 {
        let k = k as u32;
        if k >= 1 && k < m {
            let kfact: f64 = (1..=k).map(|j| j as f64).product();
            let residue = if k % 2 == 0 { 1.0 } else { -1.0 } / kfact;
            let d1 = f_m_derivative(-C64::new(k as f64, 0.0), m, 1)?;
            let d2 = f_m_derivative(-C64::new(k as f64, 0.0), m, 2)?;
            let psi = harmonic(k) - EULER_GAMMA;
            return Ok((d1 + delta * (d2 * 0.5 + d1 * psi)) * residue);
        }
        if delta.norm() == 0.0 {
            return Err(Error::Pole(-(k as i64)));
        }
    }
    Ok(gamma(z)? * f_m(z, m)?)
}

/// `h∓(t) = e^{∓iπ(½-α)/2} e^{±πt/2} Γ(½-α+it) f_m(½-α+it)`.
pub fn h_kernel(t: f64, params: &WaveKernelParams) -> Result<C64> {
    let z = StripPoint::new(0.5 - params.alpha, t)?.z();
    // upper sign of ∓ belongs to e^{-isA}
    let s = -params.sign.as_f64();
    let phase = C64::new(0.0, -s * 0.5 * PI * (0.5 - params.alpha)).exp();
    let log_mag = ln_gamma(z)? + s * 0.5 * PI * t;
    Ok(phase * log_mag.exp() * f_m(z, params.m)?)
}

/// `sup_t |h∓(t)| ⟨t⟩^α` over `n` equispaced points of `[-t_max, t_max]`.
pub fn h_kernel_constant(params: &WaveKernelParams, t_max: f64, n: usize) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for i in 0..n {
        let t = -t_max + 2.0 * t_max * i as f64 / (n - 1).max(1) as f64;
        sup = sup.max(h_kernel(t, params)?.norm() * bracket(t).powf(params.alpha));
    }
    Ok(sup)
}

/// Range `(min, max)` of `|Γ(σ+it)| e^{π|t|/2} |t|^α` over `|t| ∈ [t_lo, t_hi]`.
pub fn gamma_asymptotic_band(
    sigma: f64,
    alpha: f64,
    t_lo: f64,
    t_hi: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..n {
        let t = t_lo * (t_hi / t_lo).powf(i as f64 / (n - 1).max(1) as f64);
        for tt in [t, -t] {
            let g = ln_gamma(C64::new(sigma, tt))?.re;
            let v = (g + 0.5 * PI * tt.abs() + alpha * tt.abs().ln()).exp();
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

/// `∫_S^∞ u^{z-1} e^{-c u} du` for `Re c ≥ 0`, `|c| S` large, by the
/// asymptotic expansion of the upper incomplete Gamma function.
pub fn power_exp_tail(z: C64, c: C64, s: f64) -> Result<C64> {
    if c.norm() == 0.0 {
        if z.re >= 0.0 {
            return Err(Error::domain("non-decaying tail integral"));
        }
        return Ok(-(z * s.ln()).exp() / z);
    }
    let cs = c * s;
    if cs.norm() < 25.0 || c.re < 0.0 {
        return Err(Error::domain(format!(
            "tail expansion needs |c S| >= 25 and Re c >= 0 (c S = {cs})"
        )));
    }
    let lead = ((z - 1.0) * s.ln() - cs).exp() / c;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for n in 1..200 {
        term = term * (z - n as f64) / cs;
        let size = term.norm();
        if size > last {
            break;
        }
        sum += term;
        last = size;
        if size < 1e-17 * sum.norm() {
            break;
        }
    }
    Ok(lead * sum)
}

/// Power-series coefficients `b_j` of `(e^{-w} - 1)^m = Σ_j b_j w^j`,
/// `j = 0..len`.
fn wave_series(m: u32, len: usize) -> Vec<f64> {
    let mut base = vec![0.0; len];
    let mut fact = 1.0;
    for (j, b) in base.iter_mut().enumerate().skip(1) {
        fact *= j as f64;
        *b = if j % 2 == 0 { 1.0 } else { -1.0 } / fact;
    }
    let mut out = vec![0.0; len];
    out[0] = 1.0;
    for _ in 0..m {
        let mut next = vec![0.0; len];
        for (i, &a) in out.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in base.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                next[i + j] += a * b;
            }
        }
        out = next;
    }
    out
}

/// Quadrature settings for the Gamma-type integrals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralConfig {
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Damping levels `ε` for `Re λ = 0`; Richardson-extrapolated to `ε → 0`.
    pub damping: Vec<f64>,
}

impl Default for IntegralConfig {
    fn default() -> Self {
        IntegralConfig {
            rel_tol: 1e-13,
            max_intervals: 50_000,
            damping: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

fn check_strip(z: C64, m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("m must be >= 1"));
    }
    if !(z.re > -(m as f64) && z.re < 0.0) {
        return Err(Error::domain(format!(
            "Re z = {} outside (-{m}, 0): the integral diverges",
            z.re
        )));
    }
    Ok(())
}

/// `∫_0^∞ s^{z-1} (e^{-λs} - 1)^m ds` for `Re λ > 0` (or `Re λ = 0` with the
/// integral taken as absolutely convergent): power series on `[0, s₀]`,
/// adaptive Gauss–Kronrod on `[s₀, S]`, incomplete-Gamma expansion beyond.
fn damped_power_integral(z: C64, m: u32, lambda: C64, cfg: &IntegralConfig) -> Result<C64> {
    let scale = lambda.norm();
    let s0 = 0.5 / scale;
    let big = (40.0 + 3.0 * (z.norm() + m as f64)) / scale;

    let coeffs = wave_series(m, m as usize + 60);
    let mut head = C64::new(0.0, 0.0);
    for (j, &b) in coeffs.iter().enumerate().skip(m as usize) {
        if b == 0.0 {
            continue;
        }
        let p = z + j as f64;
        head += lambda.powu(j as u32) * b * (p * s0.ln()).exp() / p;
    }

    let integrand = |s: f64| {
        let w = (-lambda * s).exp() - 1.0;
        ((z - 1.0) * s.ln()).exp() * w.powu(m)
    };
    let period = 2.0 * PI / scale;
    let mut breaks = vec![s0];
    let mut x = s0.max(1.0 / scale);
    while x < big {
        breaks.push(x);
        x += period;
    }
    breaks.push(big);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let acfg = AdaptiveConfig {
        abs_tol: 1e-16,
        rel_tol: cfg.rel_tol,
        max_intervals: cfg.max_intervals,
    };
    let body = quad::adaptive_with_breaks(integrand, &breaks, acfg)?;

    let mut tail = C64::new(0.0, 0.0);
    for k in 0..=m {
        let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
        tail += power_exp_tail(z, lambda * k as f64, big)? * (sign * binomial(m, k));
    }
    Ok(head + body + tail)
}

/// `∫_0^∞ s^z (e^{-s} - 1)^m ds/s`, computed by quadrature (no Gamma
/// evaluation), for `Re z ∈ (-m, 0)`.
pub fn wave_kernel_integral(z: C64, m: u32, cfg: &IntegralConfig) -> Result<C64> {
    check_strip(z, m)?;
    damped_power_integral(z, m, C64::new(1.0, 0.0), cfg)
}

/// `∫_0^∞ s^z (e^{-λs} - 1)^m ds/s` for `Re λ ≥ 0`, `λ ≠ 0`. On the imaginary
/// axis the value is the limit of the damped integrals at `λ_ε = ε + i Im λ`,
/// Richardson-extrapolated over the configured `ε` ladder.
pub fn contour_shifted_integral(
    z: C64,
    m: u32,
    lambda: C64,
    cfg: &IntegralConfig,
) -> Result<C64> {
    check_strip(z, m)?;
    if lambda.norm() == 0.0 || lambda.re < 0.0 {
        return Err(Error::domain(format!("lambda = {lambda} needs Re λ >= 0, λ != 0")));
    }
    if lambda.re > 0.0 {
        return damped_power_integral(z, m, lambda, cfg);
    }
    if cfg.damping.is_empty() {
        return Err(Error::input("damping ladder is empty"));
    }
    let ratio = if cfg.damping.len() > 1 {
        cfg.damping[0] / cfg.damping[1]
    } else {
        10.0
    };
    let values = cfg
        .damping
        .iter()
        .map(|&eps| damped_power_integral(z, m, C64::new(eps, lambda.im), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(quad::richardson(&values, ratio))
}

/// Constants certifying that `|f_m(β + it)|` is bounded below on a fixed
/// fraction of every long interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConstants {
    /// Every interval of length `c` contains a subinterval of length `delta`
    /// on which `|f| >= epsilon`.
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// `Σ_{k=-n}^{n} |f(t + kδ)| >= ε` for all verified `t`.
    pub n: u32,
    pub window: (f64, f64),
    /// Minimum of the shifted sum over the verification grid.
    pub min_sum: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundSearch {
    /// Certification window; defaults to two periods for `m = 2` and to
    /// `[-100, 100]` otherwise.
    pub window: Option<(f64, f64)>,
    pub grid_points: usize,
    pub verify_points: usize,
    pub epsilon_levels: u32,
    pub delta_levels: u32,
}

impl Default for LowerBoundSearch {
    fn default() -> Self {
        LowerBoundSearch {
            window: None,
            grid_points: 200_000,
            verify_points: 10_000,
            epsilon_levels: 24,
            delta_levels: 16,
        }
    }
}

/// Grid search for the constants `(C, ε, δ, N)` with `N > C/δ`.
pub fn find_lower_bound_constants(
    m: u32,
    beta: f64,
    search: &LowerBoundSearch,
) -> Result<LowerBoundConstants> {
    if m == 0 {
        return Err(Error::domain("m must be >= 1"));
    }
    let f = |t: f64| f_m(C64::new(beta, t), m).map(|v| v.norm());
    if m == 1 {
        return Ok(LowerBoundConstants {
            c: 1.0,
            epsilon: 1.0,
            delta: 1.0,
            n: 0,
            window: (0.0, 1.0),
            min_sum: 1.0,
        });
    }
    let (a, b) = search.window.unwrap_or(if m == 2 {
        (0.0, 4.0 * PI / 2f64.ln())
    } else {
        (-100.0, 100.0)
    });
    let npts = search.grid_points.max(100);
    let h = (b - a) / (npts - 1) as f64;
    let values = (0..npts)
        .map(|i| f(a + i as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    let sup = values.iter().cloned().fold(0.0, f64::max);

    let mut best: Option<LowerBoundConstants> = None;
    for level in 1..=search.epsilon_levels {
        let eps = sup * 0.5f64.powi(level as i32);
        let mut runs: Vec<(f64, f64)> = Vec::new();
        let mut start: Option<usize> = None;
        for (i, &v) in values.iter().enumerate() {
            match (v >= eps, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((a + s as f64 * h, a + (i - 1) as f64 * h));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((a + s as f64 * h, b));
        }
        let longest = runs.iter().map(|r| r.1 - r.0).fold(0.0, f64::max);
        for j in 0..search.delta_levels {
            let delta = longest * 0.5f64.powi(j as i32);
            if delta < 10.0 * h {
                break;
            }
            let good: Vec<&(f64, f64)> = runs.iter().filter(|r| r.1 - r.0 >= delta).collect();
            let Some(first) = good.first() else { continue };
            let last = good[good.len() - 1];
            let mut gap = (first.0 - a).max(b - last.1);
            for pair in good.windows(2) {
                gap = gap.max(pair[1].0 - pair[0].1);
            }
            let c = gap + 2.0 * delta;
            let n = (c / delta).floor() as u32 + 1;
            let mut min_sum = f64::INFINITY;
            let nv = search.verify_points.max(2);
            for i in 0..nv {
                let t = a + (b - a) * i as f64 / (nv - 1) as f64;
                let mut sum = 0.0;
                for k in -(n as i64)..=(n as i64) {
                    sum += f(t + k as f64 * delta)?;
                }
                min_sum = min_sum.min(sum);
            }
            let candidate = LowerBoundConstants {
                c,
                epsilon: eps,
                delta,
                n,
                window: (a, b),
                min_sum,
            };
            if min_sum >= eps {
                return Ok(candidate);
            }
            if best.as_ref().is_none_or(|bst| candidate.min_sum > bst.min_sum) {
                best = Some(candidate);
            }
        }
    }
    Err(Error::Search(format!(
        "no certified constants for m = {m}, beta = {beta}; best found: {best:?}"
    )))
}

/// `w(s) = |s|^{-α} (e^{is} - Σ_{j<n_terms} (is)^j / j!)` for `s ≠ 0`.
pub fn w_alpha_kernel(s: f64, alpha: f64, n_terms: u32) -> Result<C64> {
    if s == 0.0 {
        return Err(Error::domain("w_alpha is singular at s = 0"));
    }
    let is = C64::new(0.0, s);
    let remainder = if s.abs() < 1.0 {
        // Taylor tail avoids cancellation
        let mut term = C64::new(1.0, 0.0);
        for j in 1..=n_terms {
            term = term * is / j as f64;
        }
        let mut sum = C64::new(0.0, 0.0);
        let mut j = n_terms;
        loop {
            sum += term;
            j += 1;
            term = term * is / j as f64;
            if term.norm() < 1e-18 * sum.norm() || j > n_terms + 60 {
                break;
            }
        }
        sum
    } else {
        let mut partial = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for j in 0..n_terms {
            partial += term;
            term = term * is / (j + 1) as f64;
        }
        is.exp() - partial
    };
    Ok(remainder * s.abs().powf(-alpha))
}

/// `i^{z} Γ(z)` at `z = ½ - α + it`, the Mellin transform of `s^{1/2} w(s)`.
pub fn w_alpha_mellin(t: f64, alpha: f64) -> Result<C64> {
    let z = C64::new(0.5 - alpha, t);
    let ln_i = C64::new(0.0, PI / 2.0);
    Ok((z * ln_i + ln_gamma(z)?).exp())
}
