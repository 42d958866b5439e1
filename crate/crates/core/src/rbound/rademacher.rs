//! Rademacher averages in `ℓ^p_n` and R-bound estimation for finite sets of
//! matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::operator::linalg::operator_norm;
use crate::{Error, Mat, Result, Vector, C64};

/// `ℓ^p_n`, `1 ≤ p < ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub p: f64,
    pub n: usize,
}

impl SpaceSpec {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::input(format!("p must lie in [1, ∞), got {p}")));
        }
        if n == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        Ok(SpaceSpec { p, n })
    }

    pub fn hilbert(n: usize) -> Self {
        SpaceSpec { p: 2.0, n }
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0
    }

    pub fn norm(&self, x: &[C64]) -> f64 {
        lp_norm(x, self.p)
    }
}

fn lp_norm(x: &[C64], p: f64) -> f64 {
    if p == 2.0 {
        return x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return x.iter().map(|v| v.norm()).sum();
    }
    let m = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Sampling budget for Rademacher averages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RademacherBudget {
    /// Largest number of vectors averaged by full enumeration.
    pub exact_max: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for RademacherBudget {
    fn default() -> Self {
        RademacherBudget { exact_max: 24, samples: 4096, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RademacherValue {
    pub value: f64,
    /// Standard error of the Monte Carlo estimate; `None` when exact.
    pub std_error: Option<f64>,
}

fn check_vectors(vectors: &[Vector], space: &SpaceSpec) -> Result<()> {
    if vectors.iter().any(|v| v.len() != space.n) {
        return Err(Error::input(format!("vector length differs from n = {}", space.n)));
    }
    Ok(())
}

/// `(E‖Σ ε_k x_k‖^q)^{1/q}`.
pub fn rademacher_moment(
    vectors: &[Vector],
    space: &SpaceSpec,
    q: f64,
    budget: &RademacherBudget,
) -> Result<RademacherValue> {
    check_vectors(vectors, space)?;
    let k = vectors.len();
    if k == 0 {
        return Ok(RademacherValue { value: 0.0, std_error: None });
    }
    let n = space.n;
    let flat: Vec<C64> = vectors.iter().flat_map(|v| v.iter().copied()).collect();
    if k <= budget.exact_max {
        // ε₁ = +1 by symmetry; the remaining k-1 signs are split into chunks
        let free = k - 1;
        let chunk_bits = free.min(8);
        let chunks = 1usize << chunk_bits;
        let per = 1usize << (free - chunk_bits);
        let total: f64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = 0.0;
                let mut sum = vec![C64::new(0.0, 0.0); n];
                for inner in 0..per {
                    let pattern = (c * per + inner) << 1;
                    sum.iter_mut().for_each(|s| *s = C64::new(0.0, 0.0));
                    for j in 0..k {
                        let sign = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 };
                        for (s, v) in sum.iter_mut().zip(&flat[j * n..(j + 1) * n]) {
                            *s += v * sign;
                        }
                    }
                    acc += lp_norm(&sum, space.p).powf(q);
                }
                acc
            })
            .collect::<Vec<f64>>()
            .iter()
            // fixed summation order keeps reruns bit-identical
            .sum();
        let mean = total / (1usize << free) as f64;
        return Ok(RademacherValue { value: mean.powf(1.0 / q), std_error: None });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let signs: Vec<Vec<f64>> = (0..budget.samples)
        .map(|_| (0..k).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
        .collect();
    let values: Vec<f64> = signs
        .par_iter()
        .map(|eps| {
            let mut sum = vec![C64::new(0.0, 0.0); n];
            for (j, e) in eps.iter().enumerate() {
                for (s, v) in sum.iter_mut().zip(&flat[j * n..(j + 1) * n]) {
                    *s += v * *e;
                }
            }
            lp_norm(&sum, space.p).powf(q)
        })
        .collect();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let se = (var / m).sqrt();
    // delta method for the q-th root
    let value = mean.powf(1.0 / q);
    let std_error = if mean > 0.0 { se * value / (q * mean) } else { se };
    Ok(RademacherValue { value, std_error: Some(std_error) })
}

/// `E‖Σ ε_k x_k‖`.
pub fn rademacher_norm(vectors: &[Vector], space: &SpaceSpec, budget: &RademacherBudget) -> Result<RademacherValue> {
    rademacher_moment(vectors, space, 1.0, budget)
}

/// `‖(Σ_k |x_k(·)|²)^{1/2}‖_{ℓ^p}`.
pub fn square_sum_norm(vectors: &[Vector], space: &SpaceSpec) -> Result<f64> {
    check_vectors(vectors, space)?;
    let coords: Vec<C64> = (0..space.n)
        .map(|i| C64::new(vectors.iter().map(|v| v[i].norm_sqr()).sum::<f64>().sqrt(), 0.0))
        .collect();
    Ok(lp_norm(&coords, space.p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RMethod {
    HilbertExact,
    SquareSum,
    MonteCarloSearch,
}

/// Estimate of an R-bound or averaged R-bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBoundEstimate {
    /// Certified by the witnesses (exactly evaluated ratios).
    pub lower: f64,
    /// Certified upper bound, when one is available.
    pub upper: Option<f64>,
    pub method: RMethod,
    pub seed: u64,
    /// SHA-256 digests of the best witnesses.
    pub witness_digests: Vec<String>,
    /// Largest square-function ratio seen on the witnesses (ℓ^p proxy).
    pub square_sum_proxy: Option<f64>,
    /// Grid of the family the estimate was taken over.
    pub grid: Option<String>,
    /// The search stopped at its iteration budget.
    pub budget_exhausted: bool,
}

impl RBoundEstimate {
    /// Best available value (the certified lower bound).
    pub fn value(&self) -> f64 {
        self.lower
    }
}

/// Witness search settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RSearchConfig {
    pub restarts: usize,
    /// Largest number of `(T_k, x_k)` pairs in a witness.
    pub max_terms: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for RSearchConfig {
    fn default() -> Self {
        RSearchConfig { restarts: 32, max_terms: 6, iterations: 400, seed: 0 }
    }
}

pub(crate) fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())
}

fn witness_digest(indices: &[usize], xs: &[Vector]) -> String {
    let mut bytes = Vec::new();
    for i in indices {
        bytes.extend_from_slice(&(*i as u64).to_le_bytes());
    }
    for x in xs {
        for v in x.iter() {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    digest(&[&bytes])
}

fn check_operators(ops: &[Mat], space: &SpaceSpec) -> Result<()> {
    if ops.is_empty() {
        return Err(Error::input("empty operator set"));
    }
    if ops.iter().any(|t| t.nrows() != space.n || t.ncols() != space.n) {
        return Err(Error::input(format!("operators must be {0}×{0}", space.n)));
    }
    Ok(())
}

/// Upper bound for `‖T‖_{p→p}`: exact at `p ∈ {1, 2}`, Riesz–Thorin otherwise.
pub fn operator_norm_upper(t: &Mat, p: f64) -> f64 {
    if p == 1.0 || p == 2.0 {
        operator_norm(t, p)
    } else {
        operator_norm(t, 1.0).powf(1.0 / p) * operator_norm(t, f64::INFINITY).powf(1.0 - 1.0 / p)
    }
}

struct Witness {
    ratio: f64,
    square: f64,
    indices: Vec<usize>,
    xs: Vec<Vector>,
}

fn ratio_of(ops: &[Mat], space: &SpaceSpec, idx: &[usize], xs: &[Vector]) -> (f64, f64) {
    let budget = RademacherBudget::default();
    let images: Vec<Vector> = idx.iter().zip(xs).map(|(&i, x)| &ops[i] * x).collect();
    let den = rademacher_moment(xs, space, 2.0, &budget).map(|v| v.value).unwrap_or(0.0);
    if den == 0.0 {
        return (0.0, 0.0);
    }
    let num = rademacher_moment(&images, space, 2.0, &budget).map(|v| v.value).unwrap_or(0.0);
    let sq_den = square_sum_norm(xs, space).unwrap_or(0.0);
    let sq_num = square_sum_norm(&images, space).unwrap_or(0.0);
    (num / den, if sq_den > 0.0 { sq_num / sq_den } else { 0.0 })
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| {
        // Box–Muller
        let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
        let r = (-2.0 * u1.ln()).sqrt();
        C64::from_polar(r / std::f64::consts::SQRT_2, 2.0 * std::f64::consts::PI * u2)
    })
}

/// Entries from `{±1, ±i}`.
fn sign_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    const UNITS: [C64; 4] =
        [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
    Vector::from_fn(n, |_, _| UNITS[rng.random_range(0..4)])
}

fn coordinate_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    let i = rng.random_range(0..n);
    Vector::from_fn(n, |k, _| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0))
}

fn search_restart(ops: &[Mat], space: &SpaceSpec, cfg: &RSearchConfig, r: usize) -> Witness {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(r as u64 + 1)));
    let k = 1 + r % cfg.max_terms.max(1);
    let n = space.n;
    let mut idx: Vec<usize> = (0..k).map(|_| rng.random_range(0..ops.len())).collect();
    let style = (r / cfg.max_terms.max(1)) % 3;
    let mut xs: Vec<Vector> = (0..k)
        .map(|_| match style {
            0 => gaussian_vector(&mut rng, n),
            1 => sign_vector(&mut rng, n),
            _ => coordinate_vector(&mut rng, n),
        })
        .collect();
    let (mut best, mut best_sq) = ratio_of(ops, space, &idx, &xs);
    let mut step = 0.5;
    for _ in 0..cfg.iterations {
        let j = rng.random_range(0..k);
        let (old_i, old_x) = (idx[j], xs[j].clone());
        let move_kind = rng.random::<f64>();
        let local = move_kind >= 0.45;
        if ops.len() > 1 && move_kind < 0.15 {
            idx[j] = rng.random_range(0..ops.len());
        } else if move_kind < 0.3 {
            xs[j] = sign_vector(&mut rng, n);
        } else if move_kind < 0.38 {
            xs[j] = coordinate_vector(&mut rng, n);
        } else if move_kind < 0.45 && k > 1 {
            let i = rng.random_range(0..k);
            xs[j] = xs[i].clone();
        } else {
            let scale = old_x.norm().max(1e-12) * step;
            xs[j] = &old_x + gaussian_vector(&mut rng, n) * C64::new(scale, 0.0);
        }
        let (ratio, sq) = ratio_of(ops, space, &idx, &xs);
        if ratio > best {
            best = ratio;
            best_sq = best_sq.max(sq);
            if local {
                step = (step * 1.2).min(2.0);
            }
        } else {
            idx[j] = old_i;
            xs[j] = old_x;
            if local {
                step = (step * 0.85).max(1e-3);
            }
        }
    }
    Witness { ratio: best, square: best_sq, indices: idx, xs }
}

/// R-bound of a finite set of matrices acting on `ℓ^p_n`.
///
/// On `ℓ²` the value is `max ‖T‖₂`. Otherwise the lower bound is the best
/// ratio `(E‖Σε_k T_k x_k‖²)^{1/2} / (E‖Σε_k x_k‖²)^{1/2}` found by random
/// restarts and coordinate ascent, and the upper bound is `Σ ‖T‖`.
pub fn r_bound(ops: &[Mat], space: &SpaceSpec, search: &RSearchConfig) -> Result<RBoundEstimate> {
    check_operators(ops, space)?;
    if space.is_hilbert() {
        let (k, v) = ops
            .iter()
            .enumerate()
            .map(|(k, t)| (k, operator_norm(t, 2.0)))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        return Ok(RBoundEstimate {
            lower: v,
            upper: Some(v),
            method: RMethod::HilbertExact,
            seed: search.seed,
            witness_digests: vec![digest(&[&(k as u64).to_le_bytes()])],
            square_sum_proxy: None,
            grid: None,
            budget_exhausted: false,
        });
    }
    let upper: f64 = ops.iter().map(|t| operator_norm_upper(t, space.p)).sum();
    // single-operator witnesses give sup ‖T‖ (Boyd iteration is a lower estimate)
    let single = ops.iter().map(|t| operator_norm(t, space.p)).fold(0.0, f64::max);
    let mut found: Vec<Witness> = (0..search.restarts)
        .into_par_iter()
        .map(|r| search_restart(ops, space, search, r))
        .collect();
    found.sort_by(|a, b| b.ratio.total_cmp(&a.ratio));
    let best = found.first().map_or(0.0, |w| w.ratio);
    let proxy = found.iter().map(|w| w.square).fold(0.0, f64::max);
    let digests = found.iter().take(4).map(|w| witness_digest(&w.indices, &w.xs)).collect();
    let lower = best.max(single).min(upper);
    Ok(RBoundEstimate {
        lower,
        upper: Some(upper),
        method: RMethod::MonteCarloSearch,
        seed: search.seed,
        witness_digests: digests,
        square_sum_proxy: Some(proxy),
        grid: None,
        budget_exhausted: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vector {
        Vector::from_fn(n, |k, _| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0))
    }

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
    }

    #[test]
    fn rademacher_examples() {
        let s = SpaceSpec::hilbert(3);
        let b = RademacherBudget::default();
        let x = Vector::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0), C64::new(0.0, 0.0)]);
        assert!((rademacher_norm(&[x], &s, &b).unwrap().value - 5.0).abs() < 1e-14);
        let v = rademacher_norm(&[e(3, 0), e(3, 1)], &s, &b).unwrap();
        assert!((v.value - 2f64.sqrt()).abs() < 1e-14 && v.std_error.is_none());
        assert!((rademacher_norm(&[e(3, 0), e(3, 0)], &s, &b).unwrap().value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_matches_enumeration() {
        let s = SpaceSpec::new(1.5, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<Vector> = (0..10).map(|_| gaussian_vector(&mut rng, 4)).collect();
        let exact = rademacher_norm(&xs, &s, &RademacherBudget::default()).unwrap().value;
        let mc = rademacher_norm(&xs, &s, &RademacherBudget { exact_max: 4, samples: 20000, seed: 1 }).unwrap();
        let se = mc.std_error.unwrap();
        assert!((mc.value - exact).abs() < 5.0 * se, "{} vs {exact} ± {se}", mc.value);
    }

    #[test]
    fn square_sum_examples() {
        for p in [1.0, 1.5, 3.0] {
            let s = SpaceSpec::new(p, 3).unwrap();
            let v = square_sum_norm(&[e(3, 0), e(3, 1)], &s).unwrap();
            assert!((v - 2f64.powf(1.0 / p)).abs() < 1e-14);
        }
    }

    #[test]
    fn hilbert_r_bounds() {
        let cfg = RSearchConfig::default();
        let r = r_bound(&[Mat::identity(3, 3)], &SpaceSpec::hilbert(3), &cfg).unwrap();
        assert_eq!(r.lower, 1.0);
        let r = r_bound(&[diag(&[2.0, 0.0]), diag(&[0.0, 3.0])], &SpaceSpec::hilbert(2), &cfg).unwrap();
        assert!((r.lower - 3.0).abs() < 1e-14 && r.method == RMethod::HilbertExact);
    }

    #[test]
    fn l1_search_beats_single_norms() {
        let s = SpaceSpec::new(1.0, 2).unwrap();
        let ops = [Mat::identity(2, 2), diag(&[1.0, -1.0])];
        let r = r_bound(&ops, &s, &RSearchConfig::default()).unwrap();
        // x₁ = e₁ + e₂ under I, x₂ = e₁ - e₂ under diag(1,-1)
        let xs = [e(2, 0) + e(2, 1), e(2, 0) - e(2, 1)];
        let (oracle, _) = ratio_of(&ops, &s, &[0, 1], &xs);
        assert!(oracle >= 2f64.sqrt() - 1e-12);
        assert!(r.lower >= oracle * (1.0 - 1e-3) && r.lower <= 2.0 + 1e-12, "{} vs {oracle}", r.lower);
        assert!(r.lower <= r.upper.unwrap());
        let single = r_bound(&ops[..1], &s, &RSearchConfig::default()).unwrap();
        assert!((single.lower - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_is_one_everywhere() {
        for p in [1.0, 1.5, 4.0] {
            let r = r_bound(&[Mat::identity(3, 3)], &SpaceSpec::new(p, 3).unwrap(), &RSearchConfig::default()).unwrap();
            assert!((r.lower - 1.0).abs() < 1e-9, "p = {p}: {}", r.lower);
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(SpaceSpec::new(0.5, 2).is_err());
        let s = SpaceSpec::hilbert(2);
        assert!(rademacher_norm(&[e(3, 0)], &s, &RademacherBudget::default()).is_err());
        assert!(r_bound(&[Mat::identity(3, 3)], &s, &RSearchConfig::default()).is_err());
    }
}
