//! Averaged bounds of dilation families, the Paley–Littlewood frame, the
//! sectorial-to-Hörmander decomposition and the wave/imaginary-power round
//! trip.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::operator::{
    eigen_apply, family_on, family_samples, mellin_transform, EigenData, FamilyGrid, FamilyKind,
    MellinNormalization, SectorialOperator,
};
use crate::quad::Rule;
use crate::rbound::{
    r_l2_bound, rademacher_moment, transform_family, FamilyStorage, FamilyTarget, L2BasisConfig, Measure,
    OperatorFamily, RademacherBudget, SpaceSpec,
};
use crate::spaces::{make_partition, Coordinate, GridSpec, PartitionKind, PartitionParams, SampledFunction};
use crate::special::{h_kernel, WaveKernelParams, WaveSign};
use crate::{bracket, Error, Mat, Result, Vector, C64};

fn positive_spectrum(op: &SectorialOperator) -> Result<(&EigenData, Vec<f64>)> {
    let e = op
        .eigen
        .as_ref()
        .ok_or_else(|| Error::input(format!("{} has no usable eigendecomposition", op.name)))?;
    let values = e
        .values
        .iter()
        .map(|l| {
            if l.re > 0.0 && l.im.abs() <= 1e-10 * l.norm() {
                Ok(l.re)
            } else {
                Err(Error::input(format!("expected a positive spectrum, got {l}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((e, values))
}

/// Both sides of the averaged bound for a dilation family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedCheck {
    /// `R[L²(ℝ₊, dt/t)]` of `(φ(tA))_{t>0}`.
    pub bound: f64,
    /// `sup_t |Mφ(t)| ⟨t⟩^α` over the Mellin grid.
    pub kernel_sup: f64,
    /// `bound / kernel_sup` (0 when both vanish).
    pub constant: f64,
    pub grid: String,
}

/// `R[L²(dt/t)]`-bound of `(φ(tA))_{t>0}` on `ℓ²` against
/// `‖Mφ(t)⟨t⟩^α‖_∞`, with `Mφ` on `t ∈ [-50, 50]`.
pub fn general_averaged_check(op: &SectorialOperator, phi: &SampledFunction, alpha: f64) -> Result<AveragedCheck> {
    if phi.coordinate != Coordinate::Log {
        return Err(Error::input("φ must be sampled in log coordinates"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} must be >= 0")));
    }
    let (e, values) = positive_spectrum(op)?;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    // φ(t a) = φ_e(v + ln a) with t = e^v; v covers every shifted copy
    let du = phi.du();
    let (v0, v1) = (phi.grid.u_min - hi.ln(), phi.grid.u_max - lo.ln());
    let count = ((v1 - v0) / du).ceil() as usize + 1;
    let mut points = Vec::with_capacity(count);
    let mut diags = Vec::with_capacity(count);
    for k in 0..count {
        let v = v0 + k as f64 * du;
        points.push(vec![v.exp()]);
        diags.push(values.iter().map(|a| phi.eval(v + a.ln())).collect());
    }
    let weights = vec![du; count];
    let domain = format!("t in [e^{v0:.2}, e^{v1:.2}], log step {du:.3e}");
    let storage = FamilyStorage::Spectral { v: e.v.clone(), v_inv: e.v_inv.clone(), unitary: e.unitary, diags };
    let family = OperatorFamily::new(points, weights, Measure::DtOverT, domain.clone(), storage)?;
    let bound = r_l2_bound(&family, &SpaceSpec::hilbert(op.dim()), &L2BasisConfig::default())?.value();
    let t_grid = GridSpec::new(-50.0, 50.0, 4096)?;
    let m = mellin_transform(phi, t_grid, MellinNormalization::Plain)?;
    let kernel_sup = m
        .transform
        .values
        .iter()
        .zip(t_grid.points())
        .map(|(v, t)| v.norm() * bracket(t).powf(alpha))
        .fold(0.0, f64::max);
    let constant = if kernel_sup > 0.0 { bound / kernel_sup } else { 0.0 };
    Ok(AveragedCheck { bound, kernel_sup, constant, grid: domain })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PaleyLittlewoodConfig {
    pub trials: usize,
    pub seed: u64,
    /// `q` in `(E‖Σ ε_n ψ_n(A)x‖^q)^{1/q}`.
    pub moment: f64,
    /// Blocks averaged by full sign enumeration; Monte Carlo beyond.
    pub exact_max: usize,
    pub samples: usize,
}

impl Default for PaleyLittlewoodConfig {
    fn default() -> Self {
        PaleyLittlewoodConfig { trials: 100, seed: 0, moment: 1.0, exact_max: 12, samples: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaleyLittlewood {
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    /// Dyadic indices `n` with `ψ_n(A) ≠ 0`.
    pub blocks: Vec<i64>,
    pub exact: bool,
    /// Trials with `x = 0`.
    pub skipped: usize,
}

/// Extremes over random `x` of `E‖Σ_n ε_n ψ_n(A)x‖ / ‖x‖` on `ℓ^p_n`.
pub fn paley_littlewood_check(
    op: &SectorialOperator,
    space: &SpaceSpec,
    cfg: &PaleyLittlewoodConfig,
) -> Result<PaleyLittlewood> {
    if space.n != op.dim() {
        return Err(Error::input("space dimension differs from the operator dimension"));
    }
    let (e, values) = positive_spectrum(op)?;
    let partition = make_partition(PartitionKind::Dyadic, &PartitionParams::default())?;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let blocks: Vec<i64> = partition
        .indices_meeting(lo, hi)
        .into_iter()
        .filter(|&n| values.iter().any(|&l| partition.member(n, l) != 0.0))
        .collect();
    for &l in &values {
        let cover: f64 = blocks.iter().map(|&n| partition.member(n, l)).sum();
        if (cover - 1.0).abs() > 1e-9 {
            return Err(Error::Coverage(format!("dyadic blocks sum to {cover} at eigenvalue {l}")));
        }
    }
    let projections: Vec<Mat> = blocks
        .iter()
        .map(|&n| eigen_apply(e, &|l: C64| C64::new(partition.member(n, l.re), 0.0)))
        .collect();
    let budget = RademacherBudget { exact_max: cfg.exact_max, samples: cfg.samples, seed: cfg.seed };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut lower, mut upper, mut skipped) = (f64::INFINITY, 0.0f64, 0);
    for _ in 0..cfg.trials {
        let x = Vector::from_fn(space.n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let norm = space.norm(x.as_slice());
        if norm == 0.0 {
            skipped += 1;
            continue;
        }
        let pieces: Vec<Vector> = projections.iter().map(|p| p * &x).collect();
        let avg = rademacher_moment(&pieces, space, cfg.moment, &budget)?.value;
        lower = lower.min(avg / norm);
        upper = upper.max(avg / norm);
    }
    if skipped == cfg.trials {
        return Err(Error::input("no trial with x ≠ 0"));
    }
    Ok(PaleyLittlewood { lower_ratio: lower, upper_ratio: upper, exact: blocks.len() <= cfg.exact_max, blocks, skipped })
}

/// Norms of the pieces of `e^{-zλ} = e^{-(z+1)λ} + e^{-zλ}(1 - e^{-λ})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeaHaDecomposition {
    pub z: C64,
    /// `sup |g_z|` on the closed sector of half-angle `theta`.
    pub g_sup: f64,
    pub theta: f64,
    /// `(∫ |h_z|² + |t h_z'|² dt/t)^{1/2}`.
    pub h_norm: f64,
}

/// The decomposition of `e^{-zλ}` for `|z| = 1`, `Re z > 0`.
pub fn sea_to_ha_decomposition(z: C64) -> Result<SeaHaDecomposition> {
    if !(z.re > 0.0) {
        return Err(Error::domain(format!("Re z must be positive, got z = {z}")));
    }
    if (z.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("|z| must be 1, got {}", z.norm())));
    }
    let one = C64::new(1.0, 0.0);
    let integrand = |u: f64| {
        let t = u.exp();
        let e = (-z * t).exp();
        let q = one - (-t as f64).exp();
        let h = e * q;
        let dh = -z * e * q + e * (-t).exp();
        C64::new(h.norm_sqr() + (dh * t).norm_sqr(), 0.0)
    };
    let (a, b) = ((1e-12f64).ln(), (80.0 / z.re).ln());
    let panels = ((b - a) / 0.25).ceil() as usize;
    let h_norm = Rule::uniform(a, b, panels, 16).integrate(integrand).re.sqrt();
    let theta = PI / 8.0;
    let mut g_sup: f64 = 0.0;
    for sign in [-1.0, 1.0] {
        let dir = C64::from_polar(1.0, sign * theta);
        for k in 0..=4000 {
            let r = 100.0 * k as f64 / 4000.0;
            g_sup = g_sup.max((-(z + 1.0) * dir * r).exp().norm());
        }
    }
    Ok(SeaHaDecomposition { z, g_sup, theta, h_norm })
}

/// Largest entrywise deviation between the Mellin image of the wave family
/// and the modulated imaginary powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub max_error: f64,
    pub max_value: f64,
    pub points: usize,
}

/// `∫₀^∞ N(s) s^{-½+it} ds` for the wave family `N(s) = s^{-α}A^{½-α}(e^{isA}-1)^m`
/// compared with `h₊(t) A^{-it}`, i.e. the imaginary-power family at `-t`
/// modulated by `h₊(t)⟨t⟩^α`.
pub fn wave_bip_round_trip(op: &SectorialOperator, alpha: f64, m: u32, t_max: f64, t_step: f64) -> Result<RoundTrip> {
    let params = WaveKernelParams::new(alpha, m, WaveSign::Plus)?;
    let (_, values) = positive_spectrum(op)?;
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = 200.0 / lo;
    let mut rule = Rule::geometric(1e-10 / hi, 1.0 / hi, 48, 16);
    let panel = 0.25 / hi;
    rule.extend(Rule::uniform(1.0 / hi, s_max, ((s_max - 1.0 / hi) / panel).ceil() as usize, 16));
    let points: Vec<Vec<f64>> = rule.nodes.iter().map(|&s| vec![s]).collect();
    let wave = family_on(
        op,
        FamilyKind::Wave { alpha, m },
        points,
        rule.weights.clone(),
        Measure::Dt,
        format!("s in (0, {s_max}], Gauss panels"),
    )?;
    let grid = FamilyGrid { t_max, step: t_step, ..Default::default() };
    let bip = family_samples(op, FamilyKind::ImaginaryPowers { alpha }, &grid)?;
    let t: Vec<f64> = bip.points.iter().map(|p| p[0]).collect();
    let kernel = Mat::from_fn(t.len(), rule.len(), |j, k| {
        let s = rule.nodes[k];
        C64::from_polar(s.powf(-0.5) * rule.weights[k], t[j] * s.ln())
    });
    let target = FamilyTarget {
        points: bip.points.clone(),
        weights: bip.weights.clone(),
        measure: Measure::Dt,
        domain: bip.domain.clone(),
    };
    let image = transform_family(&wave, &kernel, target)?;
    let n = t.len();
    let mut max_error: f64 = 0.0;
    let mut max_value: f64 = 0.0;
    for j in 0..n {
        let h = h_kernel(t[j], &params)? * bracket(t[j]).powf(alpha);
        let want = bip.matrix(n - 1 - j) * h;
        let got = image.matrix(j);
        for (a, b) in got.iter().zip(want.iter()) {
            max_error = max_error.max((a - b).norm());
            max_value = max_value.max(b.norm());
        }
    }
    Ok(RoundTrip { max_error, max_value, points: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    fn phi_resolvent(theta: f64, beta: f64) -> SampledFunction {
        let grid = GridSpec::new(-70.0, 70.0, 1 << 14).unwrap();
        SampledFunction::log(grid, |s| s.powf(beta) / (C64::from_polar(1.0, theta) - s)).unwrap()
    }

    #[test]
    fn rho_dilations() {
        let a = SectorialOperator::preset("diag:(1,3)").unwrap();
        let grid = GridSpec::new(-40.0, 40.0, 4096).unwrap();
        let rho = SampledFunction::log(grid, |l| C64::new(l / (1.0 + l).powi(2), 0.0)).unwrap();
        let c = general_averaged_check(&a, &rho, 1.0).unwrap();
        // ‖ρ(e^v)‖_{L²(dv)}² = ∫ e^{2v}/(1+e^v)⁴ dv = 1/6
        assert!((c.bound - (1.0f64 / 6.0).sqrt()).abs() < 1e-6, "{}", c.bound);
        // Mρ(t) = Γ(1+it)Γ(1-it) = πt / sinh(πt), |Mρ(0)| = 1
        assert!(c.kernel_sup >= 1.0 - 1e-6 && c.kernel_sup.is_finite());
        assert!(c.constant > 0.0 && c.constant < 1.0);
    }

    #[test]
    fn zero_phi() {
        let a = SectorialOperator::preset("diag:(1,3)").unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 512).unwrap();
        let zero = SampledFunction::log(grid, |_| C64::new(0.0, 0.0)).unwrap();
        let c = general_averaged_check(&a, &zero, 1.0).unwrap();
        assert_eq!((c.bound, c.kernel_sup, c.constant), (0.0, 0.0, 0.0));
    }

    #[test]
    fn resolvent_mellin_closed_form() {
        let (theta, beta) = (PI / 4.0, 0.5);
        let phi = phi_resolvent(theta, beta);
        let t_grid = GridSpec::new(-3.0, 3.0, 16).unwrap();
        let m = mellin_transform(&phi, t_grid, MellinNormalization::Plain).unwrap();
        for (t, got) in t_grid.points().into_iter().zip(&m.transform.values) {
            let a = C64::new(beta - 1.0, t);
            let w = -C64::from_polar(1.0, theta);
            let want = (w.ln() * a).exp() * PI / (a * PI).sin();
            assert!((got - want).norm() < 1e-6 * want.norm().max(1.0), "t = {t}: {got} vs {want}");
        }
        // cross-check the |Γ|² form of 1/sin at β = ½: π/|sin π(it-½)| = |Γ(½+it)|²
        let t = 0.7;
        let g = gamma(C64::new(0.5, t)).unwrap().norm_sqr();
        assert!((PI / (C64::new(-0.5, t) * PI).sin().norm() - g).abs() < 1e-10);
    }

    #[test]
    fn resolvent_kernel_sup_grows_like_theta_power() {
        let a = SectorialOperator::preset("diag:(1,3)").unwrap();
        let alpha = 1.0;
        let thetas = [PI / 2.0, PI / 4.0, PI / 8.0];
        let sups: Vec<f64> = thetas
            .iter()
            .map(|&th| general_averaged_check(&a, &phi_resolvent(th, 0.5), alpha).unwrap())
            .map(|c| {
                assert!(c.bound <= 2.0 * c.kernel_sup);
                c.kernel_sup
            })
            .collect();
        let e = -crate::suite::log_log_slope(&thetas, &sups);
        assert!(e > 0.3 && e <= alpha + 0.2, "{e}");
    }

    #[test]
    fn paley_littlewood_scalar() {
        let a = SectorialOperator::preset("diag:(1)").unwrap();
        let r = paley_littlewood_check(&a, &SpaceSpec::hilbert(1), &PaleyLittlewoodConfig { trials: 3, ..Default::default() })
            .unwrap();
        let p = make_partition(PartitionKind::Dyadic, &PartitionParams::default()).unwrap();
        let psi: Vec<f64> = r.blocks.iter().map(|&n| p.member(n, 1.0)).collect();
        assert!(r.blocks.len() <= 3 && r.exact);
        // E|Σ ε_n ψ_n(1)| by enumeration
        let k = psi.len();
        let mut acc = 0.0;
        for pattern in 0..1usize << k {
            let s: f64 = psi.iter().enumerate().map(|(j, v)| if pattern >> j & 1 == 1 { -v } else { *v }).sum();
            acc += s.abs();
        }
        let want = acc / (1usize << k) as f64;
        assert!((r.lower_ratio - want).abs() < 1e-12 && (r.upper_ratio - want).abs() < 1e-12);
        let sq: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r.lower_ratio >= sq / 2f64.sqrt() - 1e-12);
    }

    #[test]
    fn paley_littlewood_orthogonality_band() {
        let a = SectorialOperator::preset("diag:(1,2,4,8,16,32)").unwrap();
        let cfg = PaleyLittlewoodConfig { trials: 30, moment: 2.0, ..Default::default() };
        let r = paley_littlewood_check(&a, &SpaceSpec::hilbert(6), &cfg).unwrap();
        let p = make_partition(PartitionKind::Dyadic, &PartitionParams::default()).unwrap();
        let min_sq = [1.0f64, 2.0, 4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&l| r.blocks.iter().map(|&n| p.member(n, l).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!(r.lower_ratio >= min_sq.sqrt() - 1e-12 && r.upper_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn sea_to_ha_slope() {
        let xs = [1e-1, 1e-2, 1e-3];
        let mut norms = Vec::new();
        for &x in &xs {
            let z = C64::new(x, (1.0 - x * x).sqrt());
            let d = sea_to_ha_decomposition(z).unwrap();
            assert!((d.g_sup - 1.0).abs() < 1e-12);
            norms.push(d.h_norm);
        }
        let slope = crate::suite::log_log_slope(&xs, &norms);
        assert!((-1.2..=-0.8).contains(&slope), "{slope}");
        let one = sea_to_ha_decomposition(C64::new(1.0, 0.0)).unwrap();
        assert!(one.h_norm.is_finite() && one.h_norm < 2.0);
        assert!(sea_to_ha_decomposition(C64::new(0.0, 1.0)).is_err());
        assert!(sea_to_ha_decomposition(C64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn round_trip_on_diag() {
        let a = SectorialOperator::preset("diag:(1,2,5,10)").unwrap();
        let r = wave_bip_round_trip(&a, 2.7, 3, 6.0, 0.5).unwrap();
        assert!(r.max_error < 1e-3, "{r:?}");
        assert!(r.max_value > 1e-2);
    }
}
