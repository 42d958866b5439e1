//! Quadrature rules shared by the special-function and operator modules.

use crate::{Error, Result, C64};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A fixed composite rule: nodes and weights on some interval.
#[derive(Clone, Debug, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Composite Gauss–Legendre over the given panel breakpoints.
    pub fn composite(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut rule = Rule::default();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                rule.nodes.push(mid + half * xi);
                rule.weights.push(half * wi);
            }
        }
        rule
    }

    /// Composite rule over `n` equal panels of `[a, b]`.
    pub fn uniform(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels)
            .map(|k| a + (b - a) * k as f64 / panels as f64)
            .collect();
        Self::composite(&breaks, order)
    }

    /// Composite rule over geometrically spaced panels of `[a, b]`, `0 < a < b`.
    pub fn geometric(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (la, lb) = (a.ln(), b.ln());
        let breaks: Vec<f64> = (0..=panels)
            .map(|k| (la + (lb - la) * k as f64 / panels as f64).exp())
            .collect();
        Self::composite(&breaks, order)
    }

    pub fn extend(&mut self, other: Rule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }

    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

// Kronrod 15-point nodes (positive half) and weights, with the embedded
// Gauss 7-point weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).norm())
}

/// Tolerances for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_intervals: 20_000,
        }
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of a complex integrand
/// over a finite interval. Interval bisection order is deterministic.
pub fn adaptive<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, cfg: AdaptiveConfig) -> Result<C64> {
    adaptive_with_breaks(f, &[a, b], cfg)
}

/// As [`adaptive`], seeded with initial breakpoints.
pub fn adaptive_with_breaks<F: Fn(f64) -> C64>(
    f: F,
    breaks: &[f64],
    cfg: AdaptiveConfig,
) -> Result<C64> {
    let mut intervals: Vec<(f64, f64, C64, f64)> = breaks
        .windows(2)
        .map(|p| {
            let (v, e) = gk15(&f, p[0], p[1]);
            (p[0], p[1], v, e)
        })
        .collect();
    loop {
        let total: C64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.norm()) {
            return Ok(total);
        }
        if intervals.len() >= cfg.max_intervals {
            return Err(Error::resolution(format!(
                "adaptive quadrature did not converge: error estimate {err:.3e} on {} intervals",
                intervals.len()
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (a, b, _, _) = intervals[idx];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Err(Error::resolution("adaptive quadrature interval underflow"));
        }
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        intervals[idx] = (a, mid, v1, e1);
        intervals.push((mid, b, v2, e2));
    }
}

/// Richardson extrapolation of values computed at geometrically decreasing
/// step `h, h/r, h/r², …` under an error expansion in integer powers of `h`.
pub fn richardson(values: &[C64], ratio: f64) -> C64 {
    let mut table: Vec<C64> = values.to_vec();
    let mut factor = ratio;
    for level in 1..values.len() {
        for i in (level..values.len()).rev() {
            table[i] = (table[i] * factor - table[i - 1]) / (factor - 1.0);
        }
        factor *= ratio;
    }
    *table.last().expect("richardson needs at least one value")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree 15 is exact for 8 nodes
        let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((approx - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = adaptive(|x| C64::new(x.powf(-0.5), 0.0), 0.0, 1.0, AdaptiveConfig::default())
            .unwrap();
        assert!((v.re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_oscillatory() {
        // ∫_0^{20} e^{i 5 x} dx = (e^{100 i} - 1)/(5 i)
        let v = adaptive(|x| C64::new(0.0, 5.0 * x).exp(), 0.0, 20.0, AdaptiveConfig::default())
            .unwrap();
        let exact = (C64::new(0.0, 100.0).exp() - 1.0) / C64::new(0.0, 5.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn richardson_removes_linear_error() {
        let vals: Vec<C64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|h| C64::new(3.0 + 2.0 * h + 5.0 * h * h, 0.0))
            .collect();
        assert!((richardson(&vals, 10.0).re - 3.0).abs() < 1e-12);
    }
}
