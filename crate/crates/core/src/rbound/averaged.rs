//! Averaged operators `N_h = ∫ h(t) N(t) dμ(t)` and `R[L²]`-bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{FamilyStorage, Measure, OperatorFamily};
use super::rademacher::{digest, r_bound, RBoundEstimate, RMethod, RSearchConfig, SpaceSpec};
use crate::{Error, Mat, Result, Vector, C64};

/// `‖h‖_{L²(μ)}` on the family grid.
pub fn family_l2_norm(family: &OperatorFamily, h: &[C64]) -> Result<f64> {
    if h.len() != family.len() {
        return Err(Error::input(format!("h has {} samples, family has {}", h.len(), family.len())));
    }
    Ok(h.iter().zip(&family.weights).map(|(v, w)| w * v.norm_sqr()).sum::<f64>().sqrt())
}

/// `N_h = Σ_k w_k h(t_k) N(t_k)`.
pub fn averaged_operator(family: &OperatorFamily, h: &[C64]) -> Result<Mat> {
    if h.len() != family.len() {
        return Err(Error::input(format!("h has {} samples, family has {}", h.len(), family.len())));
    }
    let n = family.dim();
    match &family.storage {
        FamilyStorage::Dense(m) => {
            let mut acc = Mat::zeros(n, n);
            for ((mk, hk), wk) in m.iter().zip(h).zip(&family.weights) {
                acc += mk * (hk * *wk);
            }
            Ok(acc)
        }
        FamilyStorage::Spectral { v, v_inv, diags, .. } => {
            let mut d = vec![C64::new(0.0, 0.0); n];
            for ((dk, hk), wk) in diags.iter().zip(h).zip(&family.weights) {
                for (a, b) in d.iter_mut().zip(dk) {
                    *a += b * hk * *wk;
                }
            }
            let mut s = v.clone();
            for (j, dj) in d.iter().enumerate() {
                for i in 0..n {
                    s[(i, j)] *= dj;
                }
            }
            Ok(s * v_inv)
        }
    }
}

/// Settings of the averaged bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct L2BasisConfig {
    /// Number of sampled `h` in the unit ball.
    pub samples: usize,
    /// Polynomial degree of the piecewise Legendre basis.
    pub degree: usize,
    /// Dyadic block levels `0..levels`.
    pub levels: usize,
    /// Power steps `h ← conj⟨N(·)v, u⟩` applied to each sample.
    pub refine_steps: usize,
    /// Restarts of the alternating maximization on `ℓ²`.
    pub restarts: usize,
    /// Use the sampled search even on `ℓ²`.
    pub force_search: bool,
    pub search: RSearchConfig,
}

impl Default for L2BasisConfig {
    fn default() -> Self {
        L2BasisConfig {
            samples: 256,
            degree: 3,
            levels: 5,
            refine_steps: 3,
            restarts: 8,
            force_search: false,
            search: RSearchConfig::default(),
        }
    }
}

fn check_space(family: &OperatorFamily, space: &SpaceSpec) -> Result<()> {
    if family.is_empty() {
        return Err(Error::input("empty family"));
    }
    if family.dim() != space.n {
        return Err(Error::input(format!("family dimension {} differs from n = {}", family.dim(), space.n)));
    }
    Ok(())
}

/// Top eigenpair of a Hermitian positive semidefinite matrix.
fn top_eigen(m: &Mat) -> (f64, Vector) {
    let se = m.clone().symmetric_eigen();
    let (k, _) = se
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    (se.eigenvalues[k].max(0.0), se.eigenvectors.column(k).into_owned())
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    let v = Vector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// `sup_{x, x'} ‖⟨N(·)x, x'⟩‖_{L²(μ)}` by alternating maximization.
fn hilbert_alternating(mats: &[Mat], weights: &[f64], restarts: usize, seed: u64) -> (f64, Vector, Vector) {
    let n = mats[0].nrows();
    let form = |x: &Vector, adjoint: bool| -> Mat {
        let parts: Vec<Mat> = mats
            .par_chunks(256)
            .zip(weights.par_chunks(256))
            .map(|(ms, ws)| {
                let mut acc = Mat::zeros(n, n);
                for (m, w) in ms.iter().zip(ws) {
                    let y = if adjoint { m.adjoint() * x } else { m * x };
                    acc += &y * y.adjoint() * C64::new(*w, 0.0);
                }
                acc
            })
            .collect();
        parts.into_iter().fold(Mat::zeros(n, n), |a, b| a + b)
    };
    let mut starts = Vec::new();
    // start from the top right singular direction of ∫ N*N
    let mut gram = Mat::zeros(n, n);
    for (m, w) in mats.iter().zip(weights) {
        gram += m.adjoint() * m * C64::new(*w, 0.0);
    }
    starts.push(top_eigen(&gram).1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        starts.push(random_unit(&mut rng, n));
    }
    let mut best = (0.0, starts[0].clone(), starts[0].clone());
    for mut x in starts {
        let mut value = 0.0;
        let mut xp = x.clone();
        for _ in 0..100 {
            let (_, v) = top_eigen(&form(&x, false));
            xp = v;
            let (lam, u) = top_eigen(&form(&xp, true));
            x = u;
            let next = lam.sqrt();
            let done = next <= value * (1.0 + 1e-13);
            value = value.max(next);
            if done {
                break;
            }
        }
        if value > best.0 {
            best = (value, x, xp);
        }
    }
    best
}

/// Certified upper bound for the Hilbert value: `λ_max(G)^{1/2}` with
/// `G = ∫ vec N vec N* dμ` when affordable, else `(∫ ‖N‖_F² dμ)^{1/2}`.
fn hilbert_upper(mats: &[Mat], weights: &[f64]) -> f64 {
    let n = mats[0].nrows();
    let nn = n * n;
    if (nn * nn) as f64 * mats.len() as f64 <= 2e8 {
        let mut g = Mat::zeros(nn, nn);
        for (m, w) in mats.iter().zip(weights) {
            let v = Vector::from_iterator(nn, m.iter().copied());
            g += &v * v.adjoint() * C64::new(*w, 0.0);
        }
        top_eigen(&g).0.sqrt()
    } else {
        mats.iter().zip(weights).map(|(m, w)| w * m.norm_squared()).sum::<f64>().sqrt()
    }
}

/// Orthonormal (in `L²(μ)`) piecewise-Legendre functions, grouped by block.
fn block_basis(weights: &[f64], degree: usize, levels: usize) -> Vec<Vec<(usize, Vec<f64>)>> {
    let len = weights.len();
    let mut blocks = Vec::new();
    for level in 0..levels {
        let parts = 1usize << level;
        if parts > len {
            break;
        }
        for b in 0..parts {
            let (lo, hi) = (b * len / parts, (b + 1) * len / parts);
            if hi <= lo {
                continue;
            }
            let mut funcs: Vec<(usize, Vec<f64>)> = Vec::new();
            for d in 0..=degree.min(hi - lo - 1) {
                let mut f: Vec<f64> = (lo..hi)
                    .map(|k| {
                        let x = if hi - lo > 1 { 2.0 * (k - lo) as f64 / (hi - lo - 1) as f64 - 1.0 } else { 0.0 };
                        x.powi(d as i32)
                    })
                    .collect();
                // weighted Gram–Schmidt, twice for stability
                for _ in 0..2 {
                    for (_, g) in &funcs {
                        let dot: f64 = (lo..hi).map(|k| weights[k] * f[k - lo] * g[k - lo]).sum();
                        f.iter_mut().zip(g).for_each(|(a, b)| *a -= dot * b);
                    }
                }
                let norm: f64 = (lo..hi).map(|k| weights[k] * f[k - lo] * f[k - lo]).sum::<f64>().sqrt();
                if norm > 1e-10 {
                    f.iter_mut().for_each(|a| *a /= norm);
                    funcs.push((lo, f));
                }
            }
            blocks.push(funcs);
        }
    }
    blocks
}

fn refine_h(family: &OperatorFamily, h: Vec<C64>, steps: usize) -> Result<Vec<Vec<C64>>> {
    let mut out = vec![h.clone()];
    let mut h = h;
    for _ in 0..steps {
        let nh = averaged_operator(family, &h)?;
        let svd = nh.svd(true, true);
        let k = (0..svd.singular_values.len())
            .max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .unwrap_or(0);
        let u = svd.u.as_ref().expect("requested U").column(k).into_owned();
        let v = svd.v_t.as_ref().expect("requested Vᵀ").row(k).adjoint();
        let g: Vec<C64> = family.matrix_elements(&v, &u).into_iter().map(|z| z.conj()).collect();
        let norm = family_l2_norm(family, &g)?;
        if norm == 0.0 {
            break;
        }
        h = g.into_iter().map(|z| z / norm).collect();
        out.push(h.clone());
    }
    Ok(out)
}

/// Unit-ball samples `h` (normalized in `L²(μ)`).
pub fn sample_unit_ball(family: &OperatorFamily, cfg: &L2BasisConfig) -> Result<Vec<Vec<C64>>> {
    let blocks = block_basis(&family.weights, cfg.degree, cfg.levels);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.search.seed ^ 0x5151);
    let mut hs = Vec::new();
    for s in 0..cfg.samples {
        let block = &blocks[if s < blocks.len() { s } else { rng.random_range(0..blocks.len()) }];
        let mut h = vec![C64::new(0.0, 0.0); family.len()];
        let mut norm2 = 0.0;
        for (lo, f) in block {
            let c = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            norm2 += c.norm_sqr();
            for (k, v) in f.iter().enumerate() {
                h[lo + k] += c * v;
            }
        }
        if norm2 == 0.0 {
            continue;
        }
        let norm = family_l2_norm(family, &h)?;
        hs.push(h.into_iter().map(|z| z / norm).collect());
    }
    Ok(hs)
}

/// `R[L²(μ)]`-bound of a sampled family on `ℓ^p_n`.
pub fn r_l2_bound(family: &OperatorFamily, space: &SpaceSpec, cfg: &L2BasisConfig) -> Result<RBoundEstimate> {
    check_space(family, space)?;
    if space.is_hilbert() && !cfg.force_search {
        if let FamilyStorage::Spectral { unitary: true, diags, .. } = &family.storage {
            // the sup over Σ|c_j| ≤ 1 of a positive form sits at a coordinate
            let n = space.n;
            let g: Vec<f64> = (0..n)
                .map(|j| diags.iter().zip(&family.weights).map(|(d, w)| w * d[j].norm_sqr()).sum())
                .collect();
            let (j, best) = g.iter().enumerate().fold((0, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
            return Ok(RBoundEstimate {
                lower: best.sqrt(),
                upper: Some(best.sqrt()),
                method: RMethod::HilbertExact,
                seed: cfg.search.seed,
                witness_digests: vec![digest(&[b"coordinate", &(j as u64).to_le_bytes()])],
                square_sum_proxy: None,
                grid: Some(family.domain.clone()),
                budget_exhausted: false,
            });
        }
        let mats: Vec<Mat> = (0..family.len()).map(|k| family.matrix(k)).collect();
        let (lower, x, xp) = hilbert_alternating(&mats, &family.weights, cfg.restarts, cfg.search.seed);
        let upper = hilbert_upper(&mats, &family.weights).max(lower);
        let mut bytes = Vec::new();
        for v in x.iter().chain(xp.iter()) {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        return Ok(RBoundEstimate {
            lower,
            upper: Some(upper),
            method: RMethod::HilbertExact,
            seed: cfg.search.seed,
            witness_digests: vec![digest(&[&bytes])],
            square_sum_proxy: None,
            grid: Some(family.domain.clone()),
            budget_exhausted: false,
        });
    }
    let hs = sample_unit_ball(family, cfg)?;
    let refined: Vec<Vec<Vec<C64>>> =
        hs.into_par_iter().map(|h| refine_h(family, h, cfg.refine_steps)).collect::<Result<_>>()?;
    let ops: Vec<Mat> = refined
        .iter()
        .flatten()
        .map(|h| averaged_operator(family, h))
        .collect::<Result<_>>()?;
    let mut est = r_bound(&ops, space, &cfg.search)?;
    est.grid = Some(family.domain.clone());
    if space.is_hilbert() {
        // the sampled set certifies only a lower bound
        est.method = RMethod::MonteCarloSearch;
        est.upper = None;
    } else {
        // Σ‖N_h‖ bounds R of the sample, not of the whole ball
        est.upper = None;
    }
    Ok(est)
}

/// Target grid of a transformed family.
#[derive(Clone, Debug)]
pub struct FamilyTarget {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub measure: Measure,
    pub domain: String,
}

/// `M(s_i) = Σ_k K_{ik} N(t_k)`, so that `⟨M(·)x, x'⟩ = K⟨N(·)x, x'⟩`.
pub fn transform_family(family: &OperatorFamily, kernel: &Mat, target: FamilyTarget) -> Result<OperatorFamily> {
    if kernel.ncols() != family.len() || kernel.nrows() != target.points.len() {
        return Err(Error::input(format!(
            "kernel is {}×{}, expected {}×{}",
            kernel.nrows(),
            kernel.ncols(),
            target.points.len(),
            family.len()
        )));
    }
    let storage = match &family.storage {
        FamilyStorage::Dense(m) => FamilyStorage::Dense(
            (0..kernel.nrows())
                .into_par_iter()
                .map(|i| {
                    let mut acc = Mat::zeros(family.dim(), family.dim());
                    for (k, mk) in m.iter().enumerate() {
                        let c = kernel[(i, k)];
                        if c != C64::new(0.0, 0.0) {
                            acc += mk * c;
                        }
                    }
                    acc
                })
                .collect(),
        ),
        FamilyStorage::Spectral { v, v_inv, unitary, diags } => {
            let n = family.dim();
            let new: Vec<Vec<C64>> = (0..kernel.nrows())
                .into_par_iter()
                .map(|i| {
                    let mut acc = vec![C64::new(0.0, 0.0); n];
                    for (k, dk) in diags.iter().enumerate() {
                        let c = kernel[(i, k)];
                        for (a, b) in acc.iter_mut().zip(dk) {
                            *a += c * b;
                        }
                    }
                    acc
                })
                .collect();
            FamilyStorage::Spectral { v: v.clone(), v_inv: v_inv.clone(), unitary: *unitary, diags: new }
        }
    };
    OperatorFamily::new(target.points, target.weights, target.measure, target.domain, storage)
}

/// `R(τ)` and `R[L¹]` over a discrete `Ω` with counting measure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct L1Comparison {
    pub r: RBoundEstimate,
    pub r_l1: RBoundEstimate,
}

/// `R[L¹(Ω)]` is the R-bound of `{Σ f_k N_k : Σ|f_k| ≤ 1}`; its estimate
/// searches the members together with random points of that hull.
pub fn r_l1_vs_rbound(ops: &[Mat], space: &SpaceSpec, search: &RSearchConfig) -> Result<L1Comparison> {
    let r = r_bound(ops, space, search)?;
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed ^ 0x11);
    let mut hull: Vec<Mat> = ops.to_vec();
    for _ in 0..(16 * ops.len()).min(128) {
        let f: Vec<C64> = (0..ops.len())
            .map(|_| C64::from_polar(rng.random::<f64>(), 2.0 * std::f64::consts::PI * rng.random::<f64>()))
            .collect();
        let total: f64 = f.iter().map(|z| z.norm()).sum();
        if total == 0.0 {
            continue;
        }
        let mut m = Mat::zeros(space.n, space.n);
        for (fk, op) in f.iter().zip(ops) {
            m += op * (fk / total);
        }
        hull.push(m);
    }
    let mut r_l1 = r_bound(&hull, space, search)?;
    // τ sits inside the hull, so witnesses for R(τ) certify R[L¹] too
    r_l1.lower = r_l1.lower.max(r.lower);
    Ok(L1Comparison { r, r_l1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_family(points: &[f64], weights: &[f64], f: impl Fn(f64) -> C64, measure: Measure) -> OperatorFamily {
        let mats = points.iter().map(|&t| Mat::from_element(1, 1, f(t))).collect();
        OperatorFamily::new(
            points.iter().map(|&t| vec![t]).collect(),
            weights.to_vec(),
            measure,
            "test",
            FamilyStorage::Dense(mats),
        )
        .unwrap()
    }

    fn exp_family() -> OperatorFamily {
        let h = 1.0 / 64.0;
        let pts: Vec<f64> = (0..=64 * 40).map(|k| k as f64 * h).collect();
        let w: Vec<f64> = (0..pts.len()).map(|k| if k == 0 || k == pts.len() - 1 { h / 2.0 } else { h }).collect();
        scalar_family(&pts, &w, |t| C64::new((-t).exp(), 0.0), Measure::Dt)
    }

    #[test]
    fn averaged_exp_family() {
        let f = exp_family();
        let h: Vec<C64> = f.points.iter().map(|p| C64::new(2f64.sqrt() * (-p[0]).exp(), 0.0)).collect();
        assert!((family_l2_norm(&f, &h).unwrap() - 1.0).abs() < 1e-4);
        let m = averaged_operator(&f, &h).unwrap();
        assert!((m[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-4);
        let zero = vec![C64::new(0.0, 0.0); f.len()];
        assert_eq!(averaged_operator(&f, &zero).unwrap()[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn exp_family_bound_in_every_space() {
        let f = exp_family();
        let r = r_l2_bound(&f, &SpaceSpec::hilbert(1), &L2BasisConfig::default()).unwrap();
        assert!((r.lower - 0.5f64.sqrt()).abs() < 1e-4);
        let cfg = L2BasisConfig { samples: 32, ..Default::default() };
        let r1 = r_l2_bound(&f, &SpaceSpec::new(1.0, 1).unwrap(), &cfg).unwrap();
        assert!((r1.lower - 0.5f64.sqrt()).abs() < 1e-4, "{}", r1.lower);
    }

    #[test]
    fn constant_family_on_probability_block() {
        let n0 = Mat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]);
        let pts: Vec<Vec<f64>> = (0..100).map(|k| vec![(k as f64 + 0.5) / 100.0]).collect();
        let f = OperatorFamily::new(pts, vec![0.01; 100], Measure::Dt, "[0,1]", FamilyStorage::Dense(vec![n0.clone(); 100]))
            .unwrap();
        let r = r_l2_bound(&f, &SpaceSpec::hilbert(2), &L2BasisConfig::default()).unwrap();
        let want = n0.singular_values().max();
        assert!((r.lower - want).abs() < 1e-10 && r.upper.unwrap() >= want - 1e-12);
    }

    #[test]
    fn transform_identity_and_linearity() {
        let f = exp_family().restrict(|p| p[0] < 4.0).unwrap();
        let k = Mat::identity(f.len(), f.len());
        let target = FamilyTarget {
            points: f.points.clone(),
            weights: f.weights.clone(),
            measure: f.measure,
            domain: "same".into(),
        };
        let g = transform_family(&f, &k, target).unwrap();
        let s = SpaceSpec::hilbert(1);
        let cfg = L2BasisConfig::default();
        assert_eq!(r_l2_bound(&f, &s, &cfg).unwrap().lower, r_l2_bound(&g, &s, &cfg).unwrap().lower);
        assert!(transform_family(&f, &Mat::identity(3, 3), FamilyTarget {
            points: vec![],
            weights: vec![],
            measure: Measure::Dt,
            domain: String::new()
        })
        .is_err());
    }

    #[test]
    fn l1_comparison_on_hilbert() {
        let d = |a: f64, b: f64| Mat::from_diagonal(&Vector::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)]));
        let c = r_l1_vs_rbound(&[d(1.0, 0.0), d(0.0, 1.0)], &SpaceSpec::hilbert(2), &RSearchConfig::default()).unwrap();
        assert!((c.r.lower - 1.0).abs() < 1e-12 && (c.r_l1.lower - 1.0).abs() < 1e-12);
        let c = r_l1_vs_rbound(&[Mat::identity(2, 2)], &SpaceSpec::new(1.0, 2).unwrap(), &RSearchConfig::default())
            .unwrap();
        assert!((c.r.lower - 1.0).abs() < 1e-9 && c.r_l1.lower >= 1.0 - 1e-9 && c.r_l1.lower <= 2.0);
    }
}
