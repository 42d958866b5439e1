//! Dense complex linear algebra: Schur factorization with cluster
//! reordering, Schur–Parlett matrix functions, triangular eigenvectors and
//! operator norms.

use std::f64::consts::PI;

use nalgebra::linalg::Schur;

use crate::spaces::fft;
use crate::{Error, Result, Mat, C64};

pub fn zeros(n: usize) -> Mat {
    Mat::from_element(n, n, C64::new(0.0, 0.0))
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Spectral norm `‖M‖₂`.
pub fn norm2(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Frobenius norm.
pub fn norm_fro(m: &Mat) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Ordered Schur form `A = Q T Q*` with equal-cluster eigenvalues contiguous
/// on the diagonal of `T`.
#[derive(Clone, Debug)]
pub struct OrderedSchur {
    pub q: Mat,
    pub t: Mat,
    /// Half-open index ranges of the diagonal blocks.
    pub blocks: Vec<(usize, usize)>,
}

/// Relative separation below which eigenvalues are grouped into one block.
pub const CLUSTER_TOL: f64 = 0.05;

pub fn ordered_schur(a: &Mat) -> Result<OrderedSchur> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::input("matrix must be square"));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::resolution("Schur iteration did not converge"))?;
    let (mut q, mut t) = schur.unpack();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    let eig: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    // single-linkage clustering
    let mut label: Vec<usize> = (0..n).collect();
    let close = |x: C64, y: C64| (x - y).norm() <= CLUSTER_TOL * x.norm().max(y.norm());
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if close(eig[i], eig[j]) && label[j] > label[i] {
                    label[j] = label[i];
                    changed = true;
                }
            }
        }
    }
    // target order: clusters by first occurrence
    let mut order: Vec<usize> = Vec::new();
    for &l in &label {
        if !order.contains(&l) {
            order.push(l);
        }
    }
    let rank = |l: usize| order.iter().position(|&x| x == l).unwrap();
    let mut keys: Vec<usize> = label.iter().map(|&l| rank(l)).collect();

    // bubble sort by adjacent Givens swaps
    for pass in 0..n {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if keys[k] > keys[k + 1] {
                swap_adjacent(&mut t, &mut q, k);
                keys.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || keys[k] != keys[start] {
            blocks.push((start, k));
            start = k;
        }
    }
    Ok(OrderedSchur { q, t, blocks })
}

/// Exchanges the diagonal entries `k`, `k+1` of the triangular `t` by a
/// unitary rotation, updating `q` so that `Q T Q*` is unchanged.
fn swap_adjacent(t: &mut Mat, q: &mut Mat, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x = t[(k, k + 1)];
    let (v0, v1) = (x, b - a);
    let r = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    if r == 0.0 {
        return;
    }
    let (c, s) = (v0 / r, v1 / r);
    // G = [[c, -s̄], [s, c̄]], T ← G* T G, Q ← Q G
    for j in 0..n {
        let (u, w) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = c.conj() * u + s.conj() * w;
        t[(k + 1, j)] = -s * u + c * w;
    }
    for i in 0..n {
        let (u, w) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = u * c + w * s;
        t[(i, k + 1)] = -u * s.conj() + w * c.conj();
        let (u, w) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = u * c + w * s;
        q[(i, k + 1)] = -u * s.conj() + w * c.conj();
    }
    t[(k + 1, k)] = C64::new(0.0, 0.0);
}

/// Taylor coefficients `c_k = f^{(k)}(σ)/k!`, `k < count`, from `f` on the
/// circle `|λ - σ| = r` (trapezoid rule, i.e. an FFT of the samples).
pub fn taylor_coefficients(f: &dyn Fn(C64) -> C64, sigma: C64, r: f64, count: usize) -> Vec<C64> {
    let m = (4 * count).max(64).next_power_of_two();
    let samples: Vec<C64> = (0..m)
        .map(|j| f(sigma + C64::from_polar(r, 2.0 * PI * j as f64 / m as f64)))
        .collect();
    let spec = fft(&samples);
    (0..count)
        .map(|k| spec[k] / m as f64 / r.powi(k as i32))
        .collect()
}

/// Solves `T₁ X - X T₂ = C` for upper-triangular `T₁`, `T₂` with disjoint
/// spectra.
fn triangular_sylvester(t1: &Mat, t2: &Mat, c: &Mat) -> Result<Mat> {
    let (p, q) = (t1.nrows(), t2.nrows());
    let mut x = Mat::from_element(p, q, C64::new(0.0, 0.0));
    for col in 0..q {
        let mut rhs: Vec<C64> = (0..p).map(|i| c[(i, col)]).collect();
        for l in 0..col {
            let tl = t2[(l, col)];
            for (i, r) in rhs.iter_mut().enumerate() {
                *r += x[(i, l)] * tl;
            }
        }
        let mu = t2[(col, col)];
        for i in (0..p).rev() {
            let mut s = rhs[i];
            for j in i + 1..p {
                s -= t1[(i, j)] * x[(j, col)];
            }
            let d = t1[(i, i)] - mu;
            if d.norm() == 0.0 {
                return Err(Error::Singular("Sylvester equation with shared eigenvalue".into()));
            }
            x[(i, col)] = s / d;
        }
    }
    Ok(x)
}

/// `f(T)` for a single cluster block by a Taylor expansion around the
/// block's mean eigenvalue.
fn block_function(f: &dyn Fn(C64) -> C64, t: &Mat) -> Mat {
    let n = t.nrows();
    let sigma: C64 = (0..n).map(|i| t[(i, i)]).sum::<C64>() / n as f64;
    if n == 1 {
        return Mat::from_element(1, 1, f(t[(0, 0)]));
    }
    let shifted = t - identity(n) * sigma;
    let spread = (0..n).map(|i| (t[(i, i)] - sigma).norm()).fold(0.0, f64::max);
    let r = (0.5 * sigma.norm()).max(4.0 * spread).max(1e-300);
    let count = 24 + 2 * n;
    let coef = taylor_coefficients(f, sigma, r, count);
    let mut out = identity(n) * coef[0];
    let mut power = identity(n);
    for c in coef.iter().skip(1) {
        power = &power * &shifted;
        if norm_fro(&power) == 0.0 {
            break;
        }
        out += &power * *c;
    }
    out
}

/// Block Schur–Parlett evaluation of `f(A) = Q f(T) Q*`.
pub fn schur_parlett(s: &OrderedSchur, f: &dyn Fn(C64) -> C64) -> Result<Mat> {
    let n = s.t.nrows();
    let nb = s.blocks.len();
    let mut ft = zeros(n);
    let view = |m: &Mat, (a, b): (usize, usize), (c, d): (usize, usize)| {
        m.view((a, c), (b - a, d - c)).clone_owned()
    };
    for &blk in &s.blocks {
        let fb = block_function(f, &view(&s.t, blk, blk));
        ft.view_mut((blk.0, blk.0), (blk.1 - blk.0, blk.1 - blk.0)).copy_from(&fb);
    }
    for d in 1..nb {
        for i in 0..nb - d {
            let j = i + d;
            let (bi, bj) = (s.blocks[i], s.blocks[j]);
            let tii = view(&s.t, bi, bi);
            let tjj = view(&s.t, bj, bj);
            let tij = view(&s.t, bi, bj);
            let fii = view(&ft, bi, bi);
            let fjj = view(&ft, bj, bj);
            let mut rhs = &fii * &tij - &tij * &fjj;
            for k in i + 1..j {
                let bk = s.blocks[k];
                rhs += view(&ft, bi, bk) * view(&s.t, bk, bj) - view(&s.t, bi, bk) * view(&ft, bk, bj);
            }
            let x = triangular_sylvester(&tii, &tjj, &rhs)?;
            ft.view_mut((bi.0, bj.0), (bi.1 - bi.0, bj.1 - bj.0)).copy_from(&x);
        }
    }
    Ok(&s.q * ft * s.q.adjoint())
}

/// Eigenvectors of an upper-triangular matrix with distinct diagonal, as
/// the columns of a unit upper-triangular `Y` (so `T Y = Y diag(T)`).
pub fn triangular_eigenvectors(t: &Mat) -> Result<Mat> {
    let n = t.nrows();
    let mut y = identity(n);
    for j in 0..n {
        let lj = t[(j, j)];
        for i in (0..j).rev() {
            let mut s = C64::new(0.0, 0.0);
            for k in i + 1..=j {
                s += t[(i, k)] * y[(k, j)];
            }
            let d = lj - t[(i, i)];
            if d.norm() <= 1e-14 * lj.norm().max(1.0) {
                return Err(Error::Singular("repeated eigenvalue".into()));
            }
            y[(i, j)] = s / d;
        }
    }
    Ok(y)
}

/// Inverse of a unit/invertible upper-triangular matrix.
pub fn triangular_inverse(t: &Mat) -> Result<Mat> {
    let n = t.nrows();
    let mut inv = zeros(n);
    for j in 0..n {
        if t[(j, j)].norm() == 0.0 {
            return Err(Error::Singular("singular triangular factor".into()));
        }
        inv[(j, j)] = C64::new(1.0, 0.0) / t[(j, j)];
        for i in (0..j).rev() {
            let mut s = C64::new(0.0, 0.0);
            for k in i + 1..=j {
                s += t[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / t[(i, i)];
        }
    }
    Ok(inv)
}

/// `ℓ^p → ℓ^p` operator norm: exact for `p ∈ {1, 2, ∞}`, otherwise a
/// power-iteration lower estimate (Boyd's method) from several starts.
pub fn operator_norm(m: &Mat, p: f64) -> f64 {
    if p == 2.0 {
        return norm2(m);
    }
    if p == 1.0 {
        return (0..m.ncols())
            .map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max);
    }
    if p.is_infinite() {
        return (0..m.nrows())
            .map(|i| m.row(i).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max);
    }
    let n = m.ncols();
    let q = p / (p - 1.0);
    let lp = |v: &[C64], p: f64| v.iter().map(|x| x.norm().powf(p)).sum::<f64>().powf(1.0 / p);
    let dual = |v: &[C64], p: f64| -> Vec<C64> {
        let nv = lp(v, p);
        v.iter()
            .map(|x| {
                if x.norm() == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    x / x.norm() * (x.norm() / nv).powf(p - 1.0)
                }
            })
            .collect()
    };
    let mut best: f64 = 0.0;
    for start in 0..=n {
        let mut x: Vec<C64> = if start < n {
            (0..n).map(|i| if i == start { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect()
        } else {
            vec![C64::new(1.0, 0.0); n]
        };
        let nx = lp(&x, p);
        x.iter_mut().for_each(|v| *v /= nx);
        for _ in 0..100 {
            let y: Vec<C64> = (m * crate::Vector::from_vec(x.clone())).iter().cloned().collect();
            let ny = lp(&y, p);
            best = best.max(ny);
            if ny == 0.0 {
                break;
            }
            let z: Vec<C64> = (m.adjoint() * crate::Vector::from_vec(dual(&y, p))).iter().cloned().collect();
            let xn = dual(&z, q);
            let diff: f64 = xn.iter().zip(&x).map(|(a, b)| (a - b).norm()).sum();
            x = xn;
            let nx = lp(&x, p);
            x.iter_mut().for_each(|v| *v /= nx);
            if diff < 1e-13 {
                break;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn schur_parlett_on_jordan_block() {
        // f = exp on [[a,1],[0,a]] gives e^a [[1,1],[0,1]]
        let a = c(0.7, 0.2);
        let m = Mat::from_row_slice(2, 2, &[a, c(1.0, 0.0), c(0.0, 0.0), a]);
        let s = ordered_schur(&m).unwrap();
        let f = schur_parlett(&s, &|z: C64| z.exp()).unwrap();
        let e = a.exp();
        let expected = Mat::from_row_slice(2, 2, &[e, e, c(0.0, 0.0), e]);
        assert!(norm_fro(&(f - expected)) < 1e-12);
    }

    #[test]
    fn schur_parlett_reorders_clusters() {
        let m = Mat::from_row_slice(
            3,
            3,
            &[c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0),
              c(0.0, 0.0), c(3.0, 0.0), c(1.0, 0.0),
              c(0.0, 0.0), c(0.0, 0.0), c(1.01, 0.0)],
        );
        let s = ordered_schur(&m).unwrap();
        assert_eq!(s.blocks.len(), 2);
        let f = schur_parlett(&s, &|z: C64| z.ln()).unwrap();
        // exp(log A) = A
        let s2 = ordered_schur(&f).unwrap();
        let back = schur_parlett(&s2, &|z: C64| z.exp()).unwrap();
        assert!(norm_fro(&(back - &m)) < 1e-10);
        let recon = &s.q * &s.t * s.q.adjoint();
        assert!(norm_fro(&(recon - m)) < 1e-12);
    }

    #[test]
    fn triangular_helpers() {
        let t = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(3.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let y = triangular_eigenvectors(&t).unwrap();
        let d = Mat::from_diagonal(&crate::Vector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        assert!(norm_fro(&(&t * &y - &y * d)) < 1e-14);
        let inv = triangular_inverse(&t).unwrap();
        assert!(norm_fro(&(&t * inv - identity(2))) < 1e-14);
    }

    #[test]
    fn lp_operator_norms() {
        let m = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert!((operator_norm(&m, 1.0) - 6.0).abs() < 1e-14);
        assert!((operator_norm(&m, f64::INFINITY) - 7.0).abs() < 1e-14);
        assert!((operator_norm(&m, 2.0) - 5.464985704219043).abs() < 1e-12);
        let n3 = operator_norm(&m, 3.0);
        assert!(n3 > 5.0 && n3 < 7.0);
    }
}
