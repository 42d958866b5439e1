//! The Mellin transform and the Mellin identities linking wave operators,
//! resolvents and imaginary powers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::power_it;
use super::sectorial::SectorialOperator;
use crate::quad::Rule;
use crate::spaces::{Coordinate, GridSpec, SampledFunction, TAIL_WARNING};
use crate::special::{binomial, h_kernel, power_exp_tail, w_alpha_mellin, WaveKernelParams, WaveSign};
use crate::{Error, Result, Vector, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MellinNormalization {
    /// `Mf(t) = ∫ f(s) s^{it} ds/s`, `‖Mf‖² = 2π ‖f‖²`.
    #[default]
    Plain,
    /// `(2π)^{-1/2}` times the plain transform; an isometry.
    Isometric,
}

#[derive(Clone, Debug)]
pub struct MellinTransform {
    pub transform: SampledFunction,
    /// Relative `L²` mass of `f_e` in the outer grid cells.
    pub tail_mass: f64,
    pub warnings: Vec<String>,
}

/// `Mf(t) = ∫ f_e(u) e^{itu} du` on `t_grid` by the trapezoid sum over the
/// samples of `f_e`.
pub fn mellin_transform(
    f: &SampledFunction,
    t_grid: GridSpec,
    normalization: MellinNormalization,
) -> Result<MellinTransform> {
    if f.coordinate != Coordinate::Log {
        return Err(Error::input("Mellin transform needs samples in log coordinates"));
    }
    let du = f.du();
    let scale = match normalization {
        MellinNormalization::Plain => du,
        MellinNormalization::Isometric => du / (2.0 * PI).sqrt(),
    };
    let u0 = f.grid.u_min;
    let values: Vec<C64> = t_grid
        .points()
        .par_iter()
        .map(|&t| {
            let step = C64::from_polar(1.0, t * du);
            let mut phase = C64::from_polar(1.0, t * u0);
            let mut acc = C64::new(0.0, 0.0);
            for (k, v) in f.values.iter().enumerate() {
                if k % 256 == 0 {
                    // re-anchor the recurrence
                    phase = C64::from_polar(1.0, t * (u0 + k as f64 * du));
                }
                acc += v * phase;
                phase *= step;
            }
            acc * scale
        })
        .collect();
    let tail_mass = f.tail_mass();
    let mut warnings = Vec::new();
    if tail_mass > TAIL_WARNING {
        warnings.push(format!("tail mass {tail_mass:.2e} at grid ends"));
    }
    Ok(MellinTransform {
        transform: SampledFunction::from_samples(Coordinate::Linear, t_grid, values)?,
        tail_mass,
        warnings,
    })
}

/// Outcome of a Mellin identity check over pairs `(x, x')` and a `t`-grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub t: Vec<f64>,
    pub pairs: usize,
    /// `max |lhs - rhs|` over all pairs and `t`.
    pub max_error: f64,
    /// `max |rhs|`, for scale.
    pub max_value: f64,
}

/// `count` pairs of random unit vectors in `ℂⁿ`.
pub fn random_unit_pairs(n: usize, count: usize, seed: u64) -> Vec<(Vector, Vector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut ChaCha8Rng| {
        let v = Vector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    };
    (0..count).map(|_| (unit(&mut rng), unit(&mut rng))).collect()
}

/// Positive eigenvalues and the coordinates `c_j(x, x') = (V⁻¹x)_j conj((V*x')_j)`.
fn spectral_weights(op: &SectorialOperator, pairs: &[(Vector, Vector)]) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let e = op
        .eigen
        .as_ref()
        .ok_or_else(|| Error::input("Mellin identities need a diagonalizable operator"))?;
    let values: Vec<f64> = e
        .values
        .iter()
        .map(|l| {
            if l.im.abs() <= 1e-12 * l.norm() && l.re > 0.0 {
                Ok(l.re)
            } else {
                Err(Error::input(format!("eigenvalue {l} is not positive")))
            }
        })
        .collect::<Result<_>>()?;
    let mut coeffs = Vec::with_capacity(pairs.len());
    for (x, xp) in pairs {
        if x.len() != op.dim() || xp.len() != op.dim() {
            return Err(Error::input("vector dimension does not match the operator"));
        }
        let a = &e.v_inv * x;
        let b = e.v.adjoint() * xp;
        coeffs.push(a.iter().zip(b.iter()).map(|(p, q)| p * q.conj()).collect());
    }
    Ok((values, coeffs))
}

/// `∫_0^∞ s^{it} g(s, λ_j) ds/s` for every eigenvalue and `t`, on one
/// composite rule in `s` shared by all eigenvalues plus a per-eigenvalue
/// tail `∫_S^∞`.
fn spectral_mellin(
    values: &[f64],
    t_grid: &[f64],
    kernel: &(dyn Fn(f64, f64) -> C64 + Sync),
    tail: &(dyn Fn(f64, f64, f64) -> Result<C64> + Sync),
) -> Result<Vec<Vec<C64>>> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let s_min = 1e-9 / hi;
    let s_mid = 1.0 / hi;
    let s_max = 200.0 / lo;
    let mut rule = Rule::geometric(s_min, s_mid, 18, 16);
    let panels = ((s_max - s_mid) * hi / 0.25).ceil() as usize;
    rule.extend(Rule::uniform(s_mid, s_max, panels, 16));
    let samples: Vec<Vec<C64>> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(&s, &w)| values.iter().map(|&l| kernel(s, l) * (w / s)).collect())
        .collect();
    let logs: Vec<f64> = rule.nodes.iter().map(|s| s.ln()).collect();
    t_grid
        .par_iter()
        .map(|&t| {
            let mut acc = vec![C64::new(0.0, 0.0); values.len()];
            for (row, &ls) in samples.iter().zip(&logs) {
                let ph = C64::from_polar(1.0, t * ls);
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v * ph;
                }
            }
            for (a, &l) in acc.iter_mut().zip(values) {
                *a += tail(s_max, l, t)?;
            }
            Ok(acc)
        })
        .collect()
}

fn compare(
    name: &str,
    t_grid: &[f64],
    coeffs: &[Vec<C64>],
    lhs: &[Vec<C64>],
    rhs: impl Fn(usize, &[C64]) -> Result<C64>,
) -> Result<IdentityCheck> {
    let mut max_error: f64 = 0.0;
    let mut max_value: f64 = 0.0;
    for c in coeffs {
        for (k, row) in lhs.iter().enumerate() {
            let left: C64 = row.iter().zip(c).map(|(m, cj)| m * cj).sum();
            let right = rhs(k, c)?;
            max_error = max_error.max((left - right).norm());
            max_value = max_value.max(right.norm());
        }
    }
    Ok(IdentityCheck { name: name.into(), t: t_grid.to_vec(), pairs: coeffs.len(), max_error, max_value })
}

/// `⟨A^{-it}x, x'⟩` from spectral coordinates.
fn imaginary_power_element(values: &[f64], c: &[C64], t: f64) -> C64 {
    values.iter().zip(c).map(|(&l, cj)| power_it(C64::new(l, 0.0), -t) * cj).sum()
}

/// `M[⟨(sA)^{½-α}(e^{∓isA} - 1)^m x, x'⟩](t)` against `h∓(t)⟨A^{-it}x, x'⟩`.
pub fn wave_mellin_identity(
    op: &SectorialOperator,
    params: &WaveKernelParams,
    pairs: &[(Vector, Vector)],
    t_grid: &[f64],
) -> Result<IdentityCheck> {
    let (values, coeffs) = spectral_weights(op, pairs)?;
    let (alpha, m) = (params.alpha, params.m);
    let sgn = params.sign.as_f64();
    let kernel = move |s: f64, l: f64| {
        let half = C64::new(0.0, 0.5 * sgn * s * l);
        // e^{iφ} - 1 = 2i e^{iφ/2} sin(φ/2)
        let d = C64::new(0.0, 2.0) * half.exp() * (0.5 * sgn * s * l).sin();
        (s * l).powf(0.5 - alpha) * d.powu(m)
    };
    let tail = move |s_max: f64, l: f64, t: f64| -> Result<C64> {
        let z = C64::new(0.5 - alpha, t);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..=m {
            let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
            let c = C64::new(0.0, -sgn * k as f64 * l);
            acc += sign * binomial(m, k) * power_exp_tail(z, c, s_max)?;
        }
        Ok(acc * l.powf(0.5 - alpha))
    };
    let lhs = spectral_mellin(&values, t_grid, &kernel, &tail)?;
    let name = match params.sign {
        WaveSign::Minus => "wave-mellin (e^{-isA})",
        WaveSign::Plus => "wave-mellin (e^{+isA})",
    };
    compare(name, t_grid, &coeffs, &lhs, |k, c| {
        Ok(h_kernel(t_grid[k], params)? * imaginary_power_element(&values, c, t_grid[k]))
    })
}

/// `M[⟨(sA)^{1/2} w_α(sA) x, x'⟩](t)` against `i^{z}Γ(z)⟨A^{-it}x, x'⟩`,
/// `z = ½ - α + it`, with Taylor terms `j ≤ m` subtracted (`α - ½ ∈ (m, m+1)`).
pub fn w_alpha_mellin_identity(
    op: &SectorialOperator,
    alpha: f64,
    pairs: &[(Vector, Vector)],
    t_grid: &[f64],
) -> Result<IdentityCheck> {
    let k = alpha - 0.5;
    if !(k > 0.0) || (k - k.round()).abs() < 1e-12 {
        return Err(Error::domain(format!("α - 1/2 must be positive and non-integer, got {k}")));
    }
    let n_terms = k.ceil() as u32;
    let (values, coeffs) = spectral_weights(op, pairs)?;
    let kernel = move |s: f64, l: f64| {
        let sl = s * l;
        sl.sqrt() * sl.powf(-alpha) * super::families::taylor_remainder(C64::new(0.0, sl), n_terms)
    };
    let tail = move |s_max: f64, l: f64, t: f64| -> Result<C64> {
        // ∫_S^∞ s^{it-1} (sl)^{z-it} (e^{isl} - Σ_j (isl)^j/j!) ds
        let z = C64::new(0.5 - alpha, t);
        let mut acc = power_exp_tail(z, C64::new(0.0, -l), s_max)?;
        let mut coef = C64::new(1.0, 0.0);
        for j in 0..n_terms {
            if j > 0 {
                coef *= C64::new(0.0, l) / j as f64;
            }
            let zj = z + j as f64;
            acc += coef * (zj * s_max.ln()).exp() / zj;
        }
        Ok(acc * l.powf(0.5 - alpha))
    };
    let lhs = spectral_mellin(&values, t_grid, &kernel, &tail)?;
    compare("w-alpha-mellin", t_grid, &coeffs, &lhs, |k, c| {
        Ok(w_alpha_mellin(t_grid[k], alpha)? * imaginary_power_element(&values, c, t_grid[k]))
    })
}

/// `π/sin π(β+is) · e^{θs} ⟨A^{is}x, x'⟩` against the Mellin transform of
/// `t ↦ t^β e^{iθβ} ⟨A^{1-β}(e^{iθ}t + A)^{-1}x, x'⟩`, for `|θ| < π`.
pub fn resolvent_bip_identity(
    op: &SectorialOperator,
    beta: f64,
    theta: f64,
    pairs: &[(Vector, Vector)],
    s_grid: &[f64],
) -> Result<IdentityCheck> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(theta.abs() < PI) {
        return Err(Error::domain(format!("|θ| must be below π, got {theta}")));
    }
    let (values, coeffs) = spectral_weights(op, pairs)?;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let decay = beta.min(1.0 - beta);
    let (u0, u1) = (lo.ln() - 36.0 / decay, hi.ln() + 36.0 / decay);
    // the integrand is analytic in a strip of half-width π - |θ|
    let h = (0.05f64).min((PI - theta.abs()) / 12.0);
    let n = ((u1 - u0) / h).ceil() as usize;
    let h = (u1 - u0) / n as f64;
    let rot = C64::from_polar(1.0, theta);
    let pre = C64::from_polar(1.0, theta * beta);
    let lhs: Vec<Vec<C64>> = s_grid
        .par_iter()
        .map(|&s| {
            values
                .iter()
                .map(|&l| {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..=n {
                        let u = u0 + k as f64 * h;
                        let w = if k == 0 || k == n { 0.5 * h } else { h };
                        let t = u.exp();
                        let v = C64::new(beta * u, s * u).exp() * l.powf(1.0 - beta) / (rot * t + l);
                        acc += v * w;
                    }
                    acc * pre
                })
                .collect()
        })
        .collect();
    compare("resolvent-bip", s_grid, &coeffs, &lhs, |k, c| {
        let s = s_grid[k];
        let w = C64::new(beta, s) * PI;
        let front = PI / w.sin() * (theta * s).exp();
        Ok(front * imaginary_power_element(&values, c, -s))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn mellin_of_s_exp_is_gamma() {
        let f = SampledFunction::log(GridSpec::new(-40.0, 8.0, 4096).unwrap(), |s| {
            C64::new(s * (-s).exp(), 0.0)
        })
        .unwrap();
        let t = GridSpec::new(-8.0, 8.0, 64).unwrap();
        let m = mellin_transform(&f, t, MellinNormalization::Plain).unwrap();
        for (k, tt) in t.points().into_iter().enumerate() {
            let g = gamma(C64::new(1.0, tt)).unwrap();
            assert!((m.transform.values[k] - g).norm() < 1e-10, "t = {tt}");
            let modulus = if tt == 0.0 { 1.0 } else { (PI * tt / (PI * tt).sinh()).sqrt() };
            assert!((m.transform.values[k].norm() - modulus).abs() < 1e-10);
        }
    }

    #[test]
    fn isometric_form_preserves_norm() {
        let grid = GridSpec::new(-20.0, 20.0, 1024).unwrap();
        let f = SampledFunction::log(grid, |s| {
            let u = s.ln();
            C64::new((-u * u / 4.0).exp(), 0.3 * u * (-u * u / 8.0).exp())
        })
        .unwrap();
        let span = PI / grid.du();
        let t = GridSpec::new(-span, span, grid.n).unwrap();
        let m = mellin_transform(&f, t, MellinNormalization::Isometric).unwrap();
        let lhs = m.transform.l2_norm();
        let rhs = f.l2_norm();
        assert!((lhs - rhs).abs() < 1e-8 * rhs);
    }

    #[test]
    fn bump_transform_peaks_at_zero() {
        let f = SampledFunction::log(GridSpec::new(-10.0, 10.0, 512).unwrap(), |s| {
            let u = s.ln();
            C64::new((-u * u).exp(), 0.0)
        })
        .unwrap();
        let t = GridSpec::new(-5.0, 5.0, 64).unwrap();
        let m = mellin_transform(&f, t, MellinNormalization::Plain).unwrap();
        let at0 = m.transform.values[32].norm();
        assert!(m.transform.values.iter().all(|v| v.norm() <= at0 + 1e-14));
    }

    #[test]
    fn wave_identity_small() {
        let a = SectorialOperator::preset("diag:(1,3)").unwrap();
        let pairs = random_unit_pairs(2, 3, 7);
        let t: Vec<f64> = (-4..=4).map(|k| k as f64).collect();
        for sign in [WaveSign::Minus, WaveSign::Plus] {
            let p = WaveKernelParams::new(1.0, 2, sign).unwrap();
            let r = wave_mellin_identity(&a, &p, &pairs, &t).unwrap();
            assert!(r.max_error < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn resolvent_identity_small() {
        let a = SectorialOperator::preset("diag:(0.5,2)").unwrap();
        let pairs = random_unit_pairs(2, 2, 3);
        let s: Vec<f64> = (-3..=3).map(|k| 0.5 * k as f64).collect();
        for theta in [0.0, 1.0, -2.5] {
            let r = resolvent_bip_identity(&a, 0.5, theta, &pairs, &s).unwrap();
            assert!(r.max_error < 1e-8 * r.max_value.max(1.0), "{theta}: {r:?}");
        }
    }

    #[test]
    fn rejects_non_log_input() {
        let f = SampledFunction::linear(GridSpec::new(-1.0, 1.0, 16).unwrap(), |_| C64::new(1.0, 0.0)).unwrap();
        assert!(mellin_transform(&f, GridSpec::new(-1.0, 1.0, 16).unwrap(), MellinNormalization::Plain).is_err());
    }
}
