//! Uniformly sampled functions and the discrete Fourier transform.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT, `F_k = Σ_j x_j e^{-2πijk/N}`.
pub fn fft(values: &[C64]) -> Vec<C64> {
    let mut buf = values.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(&mut buf));
    buf
}

/// Inverse DFT including the `1/N` factor.
pub fn ifft(values: &[C64]) -> Vec<C64> {
    let mut buf = values.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(&mut buf));
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Signed angular frequencies of the DFT bins for step `du`.
pub fn frequencies(n: usize, du: f64) -> Vec<f64> {
    let dt = 2.0 * PI / (n as f64 * du);
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            k * dt
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinate {
    /// Samples of a function on ℝ.
    Linear,
    /// Samples of `f_e(u) = f(e^u)` for a function `f` on ℝ₊.
    Log,
}

/// Grid `u_k = u_min + k du`, `k = 0..n`, with `du = (u_max - u_min)/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(u_min: f64, u_max: f64, n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::input(format!("grid size {n} must be a power of two >= 16")));
        }
        if !(u_max > u_min) || !u_min.is_finite() || !u_max.is_finite() {
            return Err(Error::input(format!("bad grid range [{u_min}, {u_max}]")));
        }
        Ok(GridSpec { u_min, u_max, n })
    }

    pub fn du(&self) -> f64 {
        (self.u_max - self.u_min) / self.n as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.u_min + k as f64 * self.du()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub coordinate: Coordinate,
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl SampledFunction {
    pub fn from_samples(coordinate: Coordinate, grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        let grid = GridSpec::new(grid.u_min, grid.u_max, grid.n)?;
        if values.len() != grid.n {
            return Err(Error::input(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::input("non-finite sample"));
        }
        Ok(SampledFunction { coordinate, grid, values })
    }

    /// Samples `f` on a linear grid.
    pub fn linear(grid: GridSpec, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::from_samples(Coordinate::Linear, grid, values)
    }

    /// Samples `f_e(u) = f(e^u)` on a logarithmic grid; `f` takes `λ > 0`.
    pub fn log(grid: GridSpec, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = grid.points().into_iter().map(|u| f(u.exp())).collect();
        Self::from_samples(Coordinate::Log, grid, values)
    }

    pub fn du(&self) -> f64 {
        self.grid.du()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same samples, reinterpreted as a function of `u` on ℝ.
    pub fn as_linear(&self) -> SampledFunction {
        SampledFunction { coordinate: Coordinate::Linear, ..self.clone() }
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> SampledFunction {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(self.grid.point(k), v))
            .collect();
        SampledFunction { values, ..self.clone() }
    }

    pub fn mul(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(SampledFunction { values, ..self.clone() })
    }

    pub fn check_same_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid != other.grid || self.coordinate != other.coordinate {
            return Err(Error::input("sampled functions live on different grids"));
        }
        Ok(())
    }

    /// `(t_k, f̂(t_k))` with `f̂(t) = ∫ f(u) e^{-iut} du`, DFT bin order.
    pub fn fourier(&self) -> (Vec<f64>, Vec<C64>) {
        let du = self.du();
        let t = frequencies(self.len(), du);
        let raw = fft(&self.values);
        let fhat = raw
            .iter()
            .zip(&t)
            .map(|(v, &tk)| v * du * C64::new(0.0, -tk * self.grid.u_min).exp())
            .collect();
        (t, fhat)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.du()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative `L²` mass in the outer `1/32` of the grid on each side.
    pub fn tail_mass(&self) -> f64 {
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let edge = (self.len() / 32).max(1);
        let tail: f64 = self.values[..edge]
            .iter()
            .chain(&self.values[self.len() - edge..])
            .map(|v| v.norm_sqr())
            .sum();
        (tail / total).sqrt()
    }

    /// Cubic Lagrange interpolation at `u`; zero outside the grid.
    pub fn eval(&self, u: f64) -> C64 {
        let du = self.du();
        let x = (u - self.grid.u_min) / du;
        let n = self.len() as isize;
        if x < 0.0 || x > (n - 1) as f64 {
            return C64::new(0.0, 0.0);
        }
        let i = (x.floor() as isize).clamp(1, n - 3);
        let s = x - i as f64;
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        (0..4).map(|j| self.values[(i - 1 + j as isize) as usize] * w[j]).sum()
    }

    /// Spectral derivative `d/du` (periodic extension of the samples).
    pub fn derivative(&self) -> SampledFunction {
        let t = frequencies(self.len(), self.du());
        let n = self.len();
        let mut spec = fft(&self.values);
        for (k, (v, &tk)) in spec.iter_mut().zip(&t).enumerate() {
            *v = if n % 2 == 0 && k == n / 2 { C64::new(0.0, 0.0) } else { *v * C64::new(0.0, tk) };
        }
        SampledFunction { values: ifft(&spec), ..self.clone() }
    }
}
