//! Smooth partitions of unity: equidistant, dyadic and Fourier-dyadic.
//!
//! The generator is a mollified indicator `φ = 1_{[-½,½]} ∗ κ` with `κ` a
//! normalized `C^∞` bump, so that `φ(s) = K(s+½) - K(s-½)` for the
//! cumulative `K` of `κ`, and `Σ_n φ(s-n)` telescopes to one.

use serde::{Deserialize, Serialize};

use super::grid::{Coordinate, GridSpec, SampledFunction};
use crate::quad::gauss_legendre;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BumpParams {
    /// Support length of the mollifier, in `(0, 1]`.
    pub width: f64,
    /// `κ(y) ∝ exp(-order / (1 - (2y/width)²))`.
    pub order: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        BumpParams { width: 1.0, order: 1.0 }
    }
}

const TABLE_CELLS: usize = 4096;

/// Tabulated mollifier `κ` and its distribution function `K`, with cubic
/// Hermite interpolation of `K`.
#[derive(Clone, Debug)]
pub struct Bump {
    pub params: BumpParams,
    cdf: Vec<f64>,
    density: Vec<f64>,
    norm: f64,
}

impl Bump {
    pub fn new(params: BumpParams) -> Result<Self> {
        if !(params.width > 0.0 && params.width <= 1.0) || !(params.order > 0.0) {
            return Err(Error::domain(format!("invalid bump parameters {params:?}")));
        }
        let raw = |y: f64| {
            let x = 2.0 * y / params.width;
            if x.abs() >= 1.0 {
                0.0
            } else {
                (-params.order / (1.0 - x * x)).exp()
            }
        };
        let (gx, gw) = gauss_legendre(12);
        let h = params.width / TABLE_CELLS as f64;
        let lo = -0.5 * params.width;
        let mut cdf = vec![0.0; TABLE_CELLS + 1];
        for c in 0..TABLE_CELLS {
            let a = lo + c as f64 * h;
            let cell: f64 = gx.iter().zip(&gw).map(|(x, w)| w * raw(a + 0.5 * h * (x + 1.0))).sum();
            cdf[c + 1] = cdf[c] + 0.5 * h * cell;
        }
        let z = cdf[TABLE_CELLS];
        cdf.iter_mut().for_each(|v| *v /= z);
        let density = (0..=TABLE_CELLS).map(|c| raw(lo + c as f64 * h) / z).collect();
        Ok(Bump { params, cdf, density, norm: z })
    }

    /// Normalized mollifier `κ`, supported on `[-width/2, width/2]`.
    pub fn kernel(&self, y: f64) -> f64 {
        let x = 2.0 * y / self.params.width;
        if x.abs() >= 1.0 {
            return 0.0;
        }
        (-self.params.order / (1.0 - x * x)).exp() / self.norm
    }

    /// `K(y) = ∫_{-∞}^y κ`.
    pub fn cdf(&self, y: f64) -> f64 {
        let half = 0.5 * self.params.width;
        if y <= -half {
            return 0.0;
        }
        if y >= half {
            return 1.0;
        }
        let h = self.params.width / TABLE_CELLS as f64;
        let x = (y + half) / h;
        let c = (x.floor() as usize).min(TABLE_CELLS - 1);
        let s = x - c as f64;
        let (p0, p1) = (self.cdf[c], self.cdf[c + 1]);
        let (m0, m1) = (self.density[c] * h, self.density[c + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * m1
    }

    /// Equidistant generator `φ(s) = K(s+½) - K(s-½)`, supported on
    /// `[-(1+w)/2, (1+w)/2] ⊆ [-1, 1]`.
    pub fn phi(&self, s: f64) -> f64 {
        self.cdf(s + 0.5) - self.cdf(s - 0.5)
    }

    /// Smooth step rising from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
    pub fn step(&self, x: f64) -> f64 {
        self.cdf(self.params.width * (x - 0.5))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionKind {
    Equidistant,
    Dyadic,
    FourierDyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionParams {
    pub bump: BumpParams,
    /// Sampling step of the generator; must resolve the mollifier ramp.
    pub grid_step: f64,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams { bump: BumpParams::default(), grid_step: 1.0 / 64.0 }
    }
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub kind: PartitionKind,
    pub bump: Bump,
    /// `φ` on `[-2, 2]` (equidistant), `ψ` on log-coordinates `[-2, 2]`
    /// (dyadic), or `φ̃₀` on `[-4, 4]` (Fourier-dyadic).
    pub generator: SampledFunction,
}

/// `χ = 1` on `|t| ≤ ½`, `0` on `|t| ≥ 1`.
fn chi(bump: &Bump, t: f64) -> f64 {
    1.0 - bump.step(2.0 * t.abs() - 1.0)
}

pub fn make_partition(kind: PartitionKind, params: &PartitionParams) -> Result<PartitionOfUnity> {
    let bump = Bump::new(params.bump)?;
    if !(params.grid_step > 0.0) || params.grid_step > params.bump.width / 8.0 {
        return Err(Error::resolution(format!(
            "grid step {} does not resolve a mollifier of width {}",
            params.grid_step, params.bump.width
        )));
    }
    let span = if kind == PartitionKind::FourierDyadic { 8.0 } else { 4.0 };
    let n = ((span / params.grid_step).ceil() as usize).next_power_of_two().max(16);
    let grid = GridSpec::new(-span / 2.0, span / 2.0, n)?;
    let mut partition = PartitionOfUnity {
        kind,
        bump,
        generator: SampledFunction::from_samples(Coordinate::Linear, grid, vec![C64::new(0.0, 0.0); n])?,
    };
    let coordinate = match kind {
        PartitionKind::Dyadic => Coordinate::Log,
        _ => Coordinate::Linear,
    };
    let values = grid
        .points()
        .into_iter()
        .map(|u| {
            let x = if coordinate == Coordinate::Log { u.exp() } else { u };
            C64::new(partition.member(0, x), 0.0)
        })
        .collect();
    partition.generator = SampledFunction::from_samples(coordinate, grid, values)?;
    Ok(partition)
}

impl PartitionOfUnity {
    /// The `n`-th member at `x`: `φ(x - n)`, `ψ(2^{-n} x)` (for `x > 0`), or
    /// `φ̃_n(x)`.
    pub fn member(&self, n: i64, x: f64) -> f64 {
        match self.kind {
            PartitionKind::Equidistant => self.bump.phi(x - n as f64),
            PartitionKind::Dyadic => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.bump.phi(x.log2() - n as f64)
                }
            }
            PartitionKind::FourierDyadic => {
                if n == 0 {
                    return chi(&self.bump, x);
                }
                let (k, t) = if n > 0 { (n, x) } else { (-n, -x) };
                if t <= 0.0 {
                    return 0.0;
                }
                let scale = 2f64.powi(-(k as i32));
                chi(&self.bump, scale * t) - chi(&self.bump, 2.0 * scale * t)
            }
        }
    }

    /// Dyadic member in logarithmic coordinates, `ψ_n(e^u) = φ(u/ln 2 - n)`.
    pub fn member_log(&self, n: i64, u: f64) -> f64 {
        match self.kind {
            PartitionKind::Dyadic => self.bump.phi(u / std::f64::consts::LN_2 - n as f64),
            _ => self.member(n, u),
        }
    }

    /// Members whose support meets `[lo, hi]` (in the partition's variable).
    pub fn indices_meeting(&self, lo: f64, hi: f64) -> Vec<i64> {
        let r = 0.5 * (1.0 + self.bump.params.width);
        match self.kind {
            PartitionKind::Equidistant => ((lo - r).floor() as i64..=(hi + r).ceil() as i64)
                .filter(|&n| n as f64 + r > lo && n as f64 - r < hi)
                .collect(),
            PartitionKind::Dyadic => {
                let (a, b) = (lo.max(f64::MIN_POSITIVE).log2(), hi.log2());
                ((a - r).floor() as i64..=(b + r).ceil() as i64)
                    .filter(|&n| n as f64 + r > a && n as f64 - r < b)
                    .collect()
            }
            PartitionKind::FourierDyadic => {
                let m = lo.abs().max(hi.abs()).max(1.0).log2().ceil() as i64 + 1;
                (-m..=m).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_reproduces_one() {
        let p = make_partition(PartitionKind::Equidistant, &PartitionParams::default()).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=4000 {
            let t = -2.0 + 4.0 * i as f64 / 4000.0;
            let s: f64 = (-3..=3).map(|n| p.member(n, t)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        assert!(worst < 1e-10, "{worst}");
        assert_eq!(p.member(0, 1.0), 0.0);
        assert!((p.member(0, 0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dyadic_at_one() {
        let p = make_partition(PartitionKind::Dyadic, &PartitionParams::default()).unwrap();
        let s = p.member(0, 1.0) + p.member(-1, 1.0) + p.member(1, 1.0);
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(p.member(0, 0.5), 0.0);
        assert_eq!(p.member(0, 2.0), 0.0);
    }

    #[test]
    fn fourier_dyadic_supports() {
        let p = make_partition(PartitionKind::FourierDyadic, &PartitionParams::default()).unwrap();
        for n in 2..8 {
            let lo = 2f64.powi(n - 2);
            let hi = 2f64.powi(n);
            for i in 0..2000 {
                let t = -2.0 * hi + 4.0 * hi * i as f64 / 2000.0;
                if t < lo || t > hi {
                    assert_eq!(p.member(n as i64, t), 0.0, "n = {n}, t = {t}");
                }
            }
        }
        for i in 0..2000 {
            let t = -40.0 + 80.0 * i as f64 / 2000.0;
            let s: f64 = (-8..=8).map(|n| p.member(n, t)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let params = PartitionParams { grid_step: 0.5, ..Default::default() };
        assert!(matches!(
            make_partition(PartitionKind::Equidistant, &params),
            Err(Error::Resolution(_))
        ));
    }
}
