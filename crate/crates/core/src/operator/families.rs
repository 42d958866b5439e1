//! Imaginary powers and the operator families whose averaged R-bounds
//! characterize an R-bounded Sobolev calculus.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::{holomorphic_calculus, ContourSpec};
use super::sectorial::{eigen_apply, SectorialOperator};
use crate::quad::Rule;
use crate::rbound::{FamilyStorage, Measure, OperatorFamily};
use crate::{bracket, Error, Mat, Result, C64};

/// `λ^{it}` on the principal branch.
pub fn power_it(lambda: C64, t: f64) -> C64 {
    (C64::new(0.0, t) * lambda.ln()).exp()
}

/// `A^{it}`: eigendecomposition when available, otherwise the regularized
/// contour path.
pub fn imaginary_powers(op: &SectorialOperator, t: f64) -> Result<Mat> {
    match &op.eigen {
        Some(e) => Ok(eigen_apply(e, &|l| power_it(l, t))),
        None => Ok(regularized_imaginary_power(op, t, &ContourSpec::for_operator(op))?.matrix),
    }
}

/// `A^{it}` computed as `ρ(A)^{-n} (ρ^n λ^{it})(A)` with `ρ(λ) = λ/(1+λ)²`.
#[derive(Clone, Debug)]
pub struct RegularizedPower {
    pub matrix: Mat,
    /// Power `n` of the regularizer.
    pub order: u32,
}

pub fn regularized_imaginary_power(
    op: &SectorialOperator,
    t: f64,
    contour: &ContourSpec,
) -> Result<RegularizedPower> {
    let f = move |l: C64| power_it(l, t) * l / ((1.0 + l) * (1.0 + l));
    let reg = holomorphic_calculus(op, &f, contour)?;
    let n = op.dim();
    let a = &op.matrix;
    let one_plus = Mat::identity(n, n) + a;
    // ρ(A)⁻¹ = A⁻¹(I + A)²
    let lu = a.clone().lu();
    let inv = lu
        .solve(&(&one_plus * &one_plus))
        .ok_or_else(|| Error::Singular("A is not invertible".into()))?;
    Ok(RegularizedPower { matrix: inv * reg, order: 1 })
}

/// The seven families of the characterization, in the order of the
/// theorem's conditions (2)–(8).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum FamilyKind {
    /// `⟨t⟩^{-α} A^{it}`, `t ∈ ℝ`, `dt`.
    ImaginaryPowers { alpha: f64 },
    /// `t^β A^{1-β} R(e^{iθ}t, A)`, `t > 0`, `dt/t`.
    ResolventRay { beta: f64, theta: f64 },
    /// `|θ|^{α-½} t^β A^{1-β} R(e^{iθ}t, A)` on `(0,∞) × [-θ₀, θ₀]`.
    ResolventSector { alpha: f64, beta: f64, theta0: f64 },
    /// `A^{1/2} e^{-e^{iθ}tA}`, `t > 0`, `dt`.
    SemigroupRay { theta: f64 },
    /// `⟨y/x⟩^{-α} |x|^{-1/2} A^{1/2} e^{-(x+iy)A}` on the right half-plane.
    SemigroupHalfPlane { alpha: f64 },
    /// `|s|^{-α} A^{½-α} (e^{isA} - 1)^m`, `s ∈ ℝ`.
    Wave { alpha: f64, m: u32 },
    /// `|s|^{-α} A^{½-α} (e^{isA} - Σ_{j<n} (isA)^j/j!)`, `n = ⌈α - ½⌉`.
    WaveTaylor { alpha: f64 },
}

impl FamilyKind {
    /// Short label `c2` … `c8`.
    pub fn label(&self) -> &'static str {
        match self {
            FamilyKind::ImaginaryPowers { .. } => "c2",
            FamilyKind::ResolventRay { .. } => "c3",
            FamilyKind::ResolventSector { .. } => "c4",
            FamilyKind::SemigroupRay { .. } => "c5",
            FamilyKind::SemigroupHalfPlane { .. } => "c6",
            FamilyKind::Wave { .. } => "c7",
            FamilyKind::WaveTaylor { .. } => "c8",
        }
    }

    pub(crate) fn validate(&self, op: &SectorialOperator) -> Result<()> {
        let alpha_ok = |a: f64| {
            if a > 0.5 && a.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("alpha must exceed 1/2, got {a}")))
            }
        };
        let beta_ok = |b: f64| {
            if b > 0.0 && b < 1.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("beta must lie in (0, 1), got {b}")))
            }
        };
        match *self {
            FamilyKind::ImaginaryPowers { alpha } => alpha_ok(alpha),
            FamilyKind::ResolventRay { beta, theta } => {
                beta_ok(beta)?;
                if !(theta.abs() > op.omega && theta.abs() <= PI) {
                    return Err(Error::domain(format!(
                        "ray angle {theta} must satisfy ω < |θ| ≤ π (ω = {})",
                        op.omega
                    )));
                }
                Ok(())
            }
            FamilyKind::ResolventSector { alpha, beta, theta0 } => {
                alpha_ok(alpha)?;
                beta_ok(beta)?;
                if !(theta0 > 0.0 && theta0 <= PI) {
                    return Err(Error::domain(format!("θ₀ must lie in (0, π], got {theta0}")));
                }
                Ok(())
            }
            FamilyKind::SemigroupRay { theta } => {
                if theta.abs() + op.omega < PI / 2.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "semigroup ray needs |θ| < π/2 - ω, got θ = {theta}, ω = {}",
                        op.omega
                    )))
                }
            }
            FamilyKind::SemigroupHalfPlane { alpha } => {
                alpha_ok(alpha)?;
                if op.omega < PI / 2.0 {
                    Ok(())
                } else {
                    Err(Error::domain("half-plane semigroup needs ω < π/2"))
                }
            }
            FamilyKind::Wave { alpha, m } => {
                alpha_ok(alpha)?;
                if (m as f64) > alpha - 0.5 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("wave family needs m > α - 1/2, got m = {m}")))
                }
            }
            FamilyKind::WaveTaylor { alpha } => {
                alpha_ok(alpha)?;
                let k = alpha - 0.5;
                if (k - k.round()).abs() < 1e-12 {
                    return Err(Error::domain("α - 1/2 must not be an integer"));
                }
                Ok(())
            }
        }
    }
}

/// Discretization of the parameter domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyGrid {
    /// `t ∈ [-t_max, t_max]` for the imaginary-power family.
    pub t_max: f64,
    /// `s ∈ [-s_max, s_max]` for the wave families.
    pub s_max: f64,
    /// Step of the linear grids.
    pub step: f64,
    /// Points of one-dimensional logarithmic grids.
    pub log_points: usize,
    /// Points of the radial grid in the two-dimensional families.
    pub log_points_2d: usize,
    /// Decades beyond the spectrum covered by logarithmic grids.
    pub log_margin: f64,
    /// Geometric Gauss panels towards a critical angle.
    pub angle_panels: usize,
    pub angle_order: usize,
}

impl Default for FamilyGrid {
    fn default() -> Self {
        FamilyGrid {
            t_max: 50.0,
            s_max: 200.0,
            step: 1.0 / 32.0,
            log_points: 4096,
            log_points_2d: 1024,
            log_margin: 4.0,
            angle_panels: 8,
            angle_order: 6,
        }
    }
}

impl FamilyGrid {
    fn validate(&self) -> Result<()> {
        let ok = self.t_max > 0.0
            && self.s_max > 0.0
            && self.step > 0.0
            && self.log_points >= 16
            && self.log_points_2d >= 16
            && self.log_margin > 0.0
            && self.angle_panels >= 1
            && self.angle_order >= 2;
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid family grid {self:?}")))
        }
    }

    /// Same grid with every resolution parameter doubled.
    pub fn refined(&self) -> FamilyGrid {
        FamilyGrid {
            step: self.step / 2.0,
            log_points: self.log_points * 2,
            log_points_2d: self.log_points_2d * 2,
            angle_panels: self.angle_panels + 2,
            ..self.clone()
        }
    }
}

/// Trapezoid nodes and weights on `[a, b]`.
fn trapezoid(a: f64, b: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = ((b - a) / step).round().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let nodes = (0..=n).map(|k| a + k as f64 * h).collect();
    let weights = (0..=n).map(|k| if k == 0 || k == n { 0.5 * h } else { h }).collect();
    (nodes, weights)
}

/// Midpoint nodes on `[-s, s]` (never hits 0 for an even count).
fn midpoints(s: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = 2 * ((s / step).round().max(1.0) as usize);
    let h = 2.0 * s / n as f64;
    ((0..n).map(|k| -s + (k as f64 + 0.5) * h).collect(), vec![h; n])
}

/// Log-uniform nodes `t_k` on `[a, b]` with trapezoid weights in `log t`.
fn log_nodes(a: f64, b: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / (points - 1) as f64;
    let nodes = (0..points).map(|k| (la + k as f64 * h).exp()).collect();
    let weights = (0..points)
        .map(|k| if k == 0 || k == points - 1 { 0.5 * h } else { h })
        .collect();
    (nodes, weights)
}

/// Gauss nodes on `(0, c]` refined geometrically towards 0 (the segment
/// `(0, c 2^{-panels}]` is dropped).
fn angle_rule(c: f64, panels: usize, order: usize) -> Rule {
    let breaks: Vec<f64> = (0..=panels).rev().map(|k| c * 2f64.powi(-(k as i32))).collect();
    Rule::composite(&breaks, order)
}

/// `e^z - Σ_{j<n} z^j/j!` without cancellation for small `|z|`.
pub fn taylor_remainder(z: C64, n: u32) -> C64 {
    if z.norm() < 1.0 {
        let mut term = C64::new(1.0, 0.0);
        for j in 1..=n {
            term *= z / j as f64;
        }
        let mut sum = C64::new(0.0, 0.0);
        let mut j = n;
        while term.norm() > 1e-18 * sum.norm() && j < n + 60 {
            sum += term;
            j += 1;
            term *= z / j as f64;
        }
        sum
    } else {
        let mut partial = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for j in 0..n {
            partial += term;
            term *= z / (j + 1) as f64;
        }
        z.exp() - partial
    }
}

/// `λ^p` on the principal branch.
fn cpow(lambda: C64, p: f64) -> C64 {
    (lambda.ln() * p).exp()
}

/// Sampled family `N(t_k)` on the grid chosen for `kind`.
pub fn family_samples(op: &SectorialOperator, kind: FamilyKind, grid: &FamilyGrid) -> Result<OperatorFamily> {
    kind.validate(op)?;
    grid.validate()?;
    let (lo, hi) = op.spectral_range();
    let margin = 10f64.powf(grid.log_margin);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let measure;
    let domain;
    match kind {
        FamilyKind::ImaginaryPowers { .. } => {
            let (t, w) = trapezoid(-grid.t_max, grid.t_max, grid.step);
            points = t.into_iter().map(|x| vec![x]).collect();
            weights = w;
            measure = Measure::Dt;
            domain = format!("t in [-{0}, {0}], step {1}", grid.t_max, grid.step);
        }
        FamilyKind::Wave { .. } | FamilyKind::WaveTaylor { .. } => {
            let (s, w) = midpoints(grid.s_max, grid.step);
            points = s.into_iter().map(|x| vec![x]).collect();
            weights = w;
            measure = Measure::Dt;
            domain = format!("s in [-{0}, {0}], midpoint step {1}", grid.s_max, grid.step);
        }
        FamilyKind::ResolventRay { .. } => {
            let (t, w) = log_nodes(lo / margin, hi * margin, grid.log_points);
            points = t.into_iter().map(|x| vec![x]).collect();
            weights = w;
            measure = Measure::DtOverT;
            domain = format!("t in [{:.3e}, {:.3e}], {} log points", lo / margin, hi * margin, grid.log_points);
        }
        FamilyKind::SemigroupRay { theta } => {
            let (a, b) = (1e-8 / hi, 40.0 / (lo * theta.cos()));
            let (t, w) = log_nodes(a, b, grid.log_points);
            for (ti, wi) in t.into_iter().zip(w) {
                points.push(vec![ti]);
                weights.push(wi * ti);
            }
            measure = Measure::Dt;
            domain = format!("t in [{a:.3e}, {b:.3e}], {} log points", grid.log_points);
        }
        FamilyKind::ResolventSector { theta0, .. } => {
            let (t, wt) = log_nodes(lo / margin, hi * margin, grid.log_points_2d);
            let half = angle_rule(theta0, grid.angle_panels, grid.angle_order);
            for (th, wth) in half.nodes.iter().zip(&half.weights) {
                for sign in [-1.0, 1.0] {
                    for (ti, wi) in t.iter().zip(&wt) {
                        points.push(vec![*ti, sign * th]);
                        weights.push(wi * wth);
                    }
                }
            }
            measure = Measure::Product;
            domain = format!(
                "(t, θ) in [{:.3e}, {:.3e}] × ±[{:.3e}, {theta0}]",
                lo / margin,
                hi * margin,
                theta0 * 2f64.powi(-(grid.angle_panels as i32))
            );
        }
        FamilyKind::SemigroupHalfPlane { .. } => {
            // polar nodes (t, θ); stored as (x, y) with dx dy = t dt dθ
            let half = angle_rule(PI / 2.0, grid.angle_panels + 4, grid.angle_order);
            for (g, wg) in half.nodes.iter().zip(&half.weights) {
                let theta_abs = PI / 2.0 - g;
                let (a, b) = (1e-8 / hi, 40.0 / (lo * theta_abs.cos()));
                let (t, wt) = log_nodes(a, b, grid.log_points_2d);
                for sign in [-1.0, 1.0] {
                    let th = sign * theta_abs;
                    for (ti, wi) in t.iter().zip(&wt) {
                        points.push(vec![ti * th.cos(), ti * th.sin()]);
                        weights.push(wi * ti * ti * wg);
                    }
                }
            }
            measure = Measure::Product;
            domain = format!(
                "x + iy = t e^{{iθ}}, |θ| ≤ π/2 - {:.3e}, {} radial points",
                (PI / 2.0) * 2f64.powi(-((grid.angle_panels + 4) as i32)),
                grid.log_points_2d
            );
        }
    }
    family_on(op, kind, points, weights, measure, domain)
}

/// The family of `kind` at caller-chosen parameter points and weights.
pub fn family_on(
    op: &SectorialOperator,
    kind: FamilyKind,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    measure: Measure,
    domain: String,
) -> Result<OperatorFamily> {
    kind.validate(op)?;
    let storage = match &op.eigen {
        Some(e) => {
            let diags: Vec<Vec<C64>> = points
                .par_iter()
                .map(|p| e.values.iter().map(|&l| scalar_member(kind, p, l)).collect())
                .collect();
            FamilyStorage::Spectral { v: e.v.clone(), v_inv: e.v_inv.clone(), unitary: e.unitary, diags }
        }
        None => FamilyStorage::Dense(dense_members(op, kind, &points)?),
    };
    OperatorFamily::new(points, weights, measure, domain, storage)
}

/// The family member at parameter `p` evaluated at the eigenvalue `l`.
fn scalar_member(kind: FamilyKind, p: &[f64], l: C64) -> C64 {
    match kind {
        FamilyKind::ImaginaryPowers { alpha } => power_it(l, p[0]) * bracket(p[0]).powf(-alpha),
        FamilyKind::ResolventRay { beta, theta } => {
            let t = p[0];
            cpow(l, 1.0 - beta) * t.powf(beta) / (C64::from_polar(t, theta) - l)
        }
        FamilyKind::ResolventSector { alpha, beta, .. } => {
            let (t, th) = (p[0], p[1]);
            th.abs().powf(alpha - 0.5) * cpow(l, 1.0 - beta) * t.powf(beta) / (C64::from_polar(t, th) - l)
        }
        FamilyKind::SemigroupRay { theta } => l.sqrt() * (-C64::from_polar(p[0], theta) * l).exp(),
        FamilyKind::SemigroupHalfPlane { alpha } => {
            let (x, y) = (p[0], p[1]);
            let weight = bracket(y / x).powf(-alpha) * x.powf(-0.5);
            weight * l.sqrt() * (-C64::new(x, y) * l).exp()
        }
        FamilyKind::Wave { alpha, m } => {
            let s = p[0];
            let half = C64::new(0.0, 0.5 * s) * l;
            let d = C64::new(0.0, 2.0) * half.exp() * (half / C64::new(0.0, 1.0)).sin();
            s.abs().powf(-alpha) * cpow(l, 0.5 - alpha) * d.powu(m)
        }
        FamilyKind::WaveTaylor { alpha } => {
            let s = p[0];
            let n = (alpha - 0.5).ceil() as u32;
            s.abs().powf(-alpha) * cpow(l, 0.5 - alpha) * taylor_remainder(C64::new(0.0, s) * l, n)
        }
    }
}

fn dense_members(op: &SectorialOperator, kind: FamilyKind, points: &[Vec<f64>]) -> Result<Vec<Mat>> {
    match kind {
        FamilyKind::ResolventRay { beta, .. } | FamilyKind::ResolventSector { beta, .. } => {
            let frac = op.funm(&|l| cpow(l, 1.0 - beta))?;
            points
                .par_iter()
                .map(|p| {
                    let (t, th, w) = match kind {
                        FamilyKind::ResolventRay { theta, .. } => (p[0], theta, 1.0),
                        FamilyKind::ResolventSector { alpha, .. } => {
                            (p[0], p[1], p[1].abs().powf(alpha - 0.5))
                        }
                        _ => unreachable!(),
                    };
                    let r = op.resolvent(C64::from_polar(t, th))?;
                    Ok(&frac * r * C64::new(w * t.powf(beta), 0.0))
                })
                .collect()
        }
        _ => points
            .par_iter()
            .map(|p| op.funm(&|l| scalar_member(kind, p, l)))
            .collect(),
    }
}
