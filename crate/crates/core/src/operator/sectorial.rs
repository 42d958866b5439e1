//! Finite-dimensional sectorial operators, presets and range reduction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::linalg::{
    identity, norm2, norm_fro, ordered_schur, schur_parlett, triangular_eigenvectors,
    triangular_inverse, OrderedSchur,
};
use crate::{Error, Mat, Result, Vector, C64};

/// `A = V diag(values) V⁻¹`.
#[derive(Clone, Debug)]
pub struct EigenData {
    pub values: Vec<C64>,
    pub v: Mat,
    pub v_inv: Mat,
    /// `V` is unitary (Hermitian input).
    pub unitary: bool,
    /// `‖V‖₂ ‖V⁻¹‖₂`.
    pub cond: f64,
}

/// Eigenvector matrices with condition number above this are not used.
pub const MAX_EIGEN_COND: f64 = 1e10;

#[derive(Clone, Debug)]
pub struct SectorialOperator {
    pub name: String,
    /// The operator on `R(A)` (equal to the input when it is injective).
    pub matrix: Mat,
    pub original_dim: usize,
    /// Dimension of the split-off kernel `N(A)`.
    pub kernel_dim: usize,
    /// `max |arg λ|` over the spectrum.
    pub omega: f64,
    pub hermitian: bool,
    pub eigen: Option<EigenData>,
    pub schur: OrderedSchur,
}

impl SectorialOperator {
    pub fn from_matrix(name: impl Into<String>, m: Mat) -> Result<Self> {
        let name = name.into();
        let n = m.nrows();
        if n == 0 || n != m.ncols() {
            return Err(Error::input("operator must be a non-empty square matrix"));
        }
        if n > 512 {
            return Err(Error::input(format!("dimension {n} exceeds 512")));
        }
        if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::input("non-finite matrix entry"));
        }
        let full = ordered_schur(&m)?;
        let eig: Vec<C64> = (0..n).map(|i| full.t[(i, i)]).collect();
        let scale = eig.iter().map(|v| v.norm()).fold(0.0, f64::max).max(norm2(&m));
        if scale == 0.0 {
            return Err(Error::NotSectorial("zero operator".into()));
        }
        let tol = 1e-10 * scale;
        let zeros = eig.iter().filter(|v| v.norm() <= tol).count();
        let (matrix, kernel_dim) = if zeros == 0 {
            (m.clone(), 0)
        } else {
            let svd = m.clone().svd(true, false);
            let u = svd.u.as_ref().expect("requested U");
            let keep: Vec<usize> =
                (0..n).filter(|&i| svd.singular_values[i] > tol).collect();
            if keep.len() != n - zeros {
                return Err(Error::NotSectorial(
                    "eigenvalue 0 is not semisimple; no range/kernel splitting".into(),
                ));
            }
            let q = Mat::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]);
            let b = q.adjoint() * &m * &q;
            if norm_fro(&(&m * &q - &q * &b)) > 1e-8 * scale {
                return Err(Error::NotSectorial("range of A is not invariant".into()));
            }
            (b, zeros)
        };
        let reduced = if kernel_dim == 0 { full } else { ordered_schur(&matrix)? };
        let dim = matrix.nrows();
        let spectrum: Vec<C64> = (0..dim).map(|i| reduced.t[(i, i)]).collect();
        let mut omega: f64 = 0.0;
        for l in &spectrum {
            if l.norm() <= tol {
                return Err(Error::NotSectorial("zero eigenvalue after range reduction".into()));
            }
            let arg = l.arg().abs();
            if arg > PI - 1e-10 {
                return Err(Error::NotSectorial(format!(
                    "eigenvalue {l} on the negative real axis"
                )));
            }
            omega = omega.max(arg);
        }
        let hermitian = norm_fro(&(&matrix - matrix.adjoint())) <= 1e-13 * scale;
        let eigen = if hermitian {
            let se = matrix.clone().symmetric_eigen();
            let values: Vec<C64> = se.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect();
            for l in &values {
                if l.re <= tol {
                    return Err(Error::NotSectorial(format!("eigenvalue {l} is not positive")));
                }
            }
            Some(EigenData {
                values,
                v_inv: se.eigenvectors.adjoint(),
                v: se.eigenvectors,
                unitary: true,
                cond: 1.0,
            })
        } else if reduced.blocks.iter().all(|b| b.1 - b.0 == 1) {
            match triangular_eigenvectors(&reduced.t) {
                Ok(y) => {
                    let v = &reduced.q * &y;
                    let v_inv = triangular_inverse(&y)? * reduced.q.adjoint();
                    let cond = norm2(&v) * norm2(&v_inv);
                    (cond < MAX_EIGEN_COND).then_some(EigenData {
                        values: spectrum.clone(),
                        v,
                        v_inv,
                        unitary: false,
                        cond,
                    })
                }
                Err(_) => None,
            }
        } else {
            None
        };
        Ok(SectorialOperator {
            name,
            matrix,
            original_dim: n,
            kernel_dim,
            omega,
            hermitian,
            eigen,
            schur: reduced,
        })
    }

    /// Builds a named preset: `diag:(a₁,…)`, `diag-logspaced:n`,
    /// `cycle-laplacian:n`, `path-laplacian:n`, `jordan:(a,n)`.
    pub fn preset(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("preset {spec:?} lacks ':'")))?;
        let arg = arg.trim().trim_start_matches('(').trim_end_matches(')');
        let numbers = || -> Result<Vec<f64>> {
            arg.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number {s:?} in preset {spec:?}")))
                })
                .collect()
        };
        let size = |lo: usize| -> Result<usize> {
            let n: usize = arg
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad size in preset {spec:?}")))?;
            if n < lo || n > 512 {
                return Err(Error::Config(format!("size {n} out of range in preset {spec:?}")));
            }
            Ok(n)
        };
        let m = match kind.trim() {
            "diag" => {
                let a = numbers()?;
                Mat::from_diagonal(&Vector::from_iterator(a.len(), a.iter().map(|&x| C64::new(x, 0.0))))
            }
            "diag-logspaced" => {
                let n = size(1)?;
                let a: Vec<f64> = (0..n)
                    .map(|k| {
                        let s = if n == 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (n - 1) as f64 };
                        10f64.powf(s)
                    })
                    .collect();
                Mat::from_diagonal(&Vector::from_iterator(n, a.iter().map(|&x| C64::new(x, 0.0))))
            }
            "cycle-laplacian" => {
                let n = size(3)?;
                let mut m = identity(n) * C64::new(2.0, 0.0);
                for i in 0..n {
                    m[(i, (i + 1) % n)] -= 1.0;
                    m[((i + 1) % n, i)] -= 1.0;
                }
                m
            }
            "path-laplacian" => {
                let n = size(2)?;
                let mut m = super::linalg::zeros(n);
                for i in 0..n - 1 {
                    m[(i, i)] += 1.0;
                    m[(i + 1, i + 1)] += 1.0;
                    m[(i, i + 1)] -= 1.0;
                    m[(i + 1, i)] -= 1.0;
                }
                m
            }
            "jordan" => {
                let v = numbers()?;
                if v.len() != 2 || v[1] < 1.0 || v[1].fract() != 0.0 {
                    return Err(Error::Config(format!("jordan preset needs (a, n): {spec:?}")));
                }
                let n = v[1] as usize;
                let mut m = identity(n) * C64::new(v[0], 0.0);
                for i in 0..n - 1 {
                    m[(i, i + 1)] = C64::new(1.0, 0.0);
                }
                m
            }
            other => return Err(Error::Config(format!("unknown preset kind {other:?}"))),
        };
        Self::from_matrix(spec, m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectrum(&self) -> Vec<C64> {
        match &self.eigen {
            Some(e) => e.values.clone(),
            None => (0..self.dim()).map(|i| self.schur.t[(i, i)]).collect(),
        }
    }

    pub fn spectral_range(&self) -> (f64, f64) {
        let s = self.spectrum();
        let lo = s.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        let hi = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
        (lo, hi)
    }

    /// `f(A)` through the eigendecomposition (Hermitian inputs) or the
    /// block Schur–Parlett recurrence.
    pub fn funm(&self, f: &dyn Fn(C64) -> C64) -> Result<Mat> {
        match &self.eigen {
            Some(e) if e.unitary => Ok(eigen_apply(e, f)),
            _ => schur_parlett(&self.schur, f),
        }
    }

    /// `V f(Λ) V⁻¹`; requires a well-conditioned eigendecomposition.
    pub fn eigen_funm(&self, f: &dyn Fn(C64) -> C64) -> Result<Mat> {
        let e = self
            .eigen
            .as_ref()
            .ok_or_else(|| Error::resolution(format!("{} has no eigendecomposition", self.name)))?;
        Ok(eigen_apply(e, f))
    }

    /// `(λ - A)⁻¹`.
    pub fn resolvent(&self, lambda: C64) -> Result<Mat> {
        let (_, hi) = self.spectral_range();
        for l in self.spectrum() {
            if (l - lambda).norm() <= 1e-12 * hi.max(lambda.norm()) {
                return Err(Error::Singular(format!("λ = {lambda} is an eigenvalue")));
            }
        }
        let n = self.dim();
        (identity(n) * lambda - &self.matrix)
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("λ - A singular at λ = {lambda}")))
    }

    /// `e^{-zA}`, `Re z > 0`.
    pub fn semigroup(&self, z: C64) -> Result<Mat> {
        if !(z.re > 0.0) {
            return Err(Error::domain(format!("semigroup needs Re z > 0, got {z}")));
        }
        self.funm(&|l: C64| (-z * l).exp())
    }
}

pub(crate) fn eigen_apply(e: &EigenData, f: &dyn Fn(C64) -> C64) -> Mat {
    let d: Vec<C64> = e.values.iter().map(|&l| f(l)).collect();
    let mut scaled = e.v.clone();
    for (j, dj) in d.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= dj;
        }
    }
    scaled * &e.v_inv
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayBound {
    pub theta: f64,
    /// `sup_r ‖λ(λ - A)⁻¹‖` over `λ = r e^{±iθ}`; `+∞` when `θ ≤ ω`.
    pub c_theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorialityReport {
    pub omega: f64,
    /// Smallest sampled angle with a finite bound.
    pub theta_min: Option<f64>,
    pub table: Vec<RayBound>,
    pub reduced_dim: usize,
    pub kernel_dim: usize,
}

/// Sector angle and resolvent ray bounds on log-spaced `|λ|`.
pub fn check_sectoriality(a: &Mat, angles: &[f64]) -> Result<SectorialityReport> {
    let op = SectorialOperator::from_matrix("input", a.clone())?;
    sectoriality_of(&op, angles)
}

pub fn sectoriality_of(op: &SectorialOperator, angles: &[f64]) -> Result<SectorialityReport> {
    let (lo, hi) = op.spectral_range();
    let n = op.dim();
    let radii: Vec<f64> = (0..161)
        .map(|k| (lo * 1e-3) * ((hi * 1e3) / (lo * 1e-3)).powf(k as f64 / 160.0))
        .collect();
    let mut table = Vec::new();
    for &theta in angles {
        if !(theta > op.omega) || theta > PI {
            table.push(RayBound { theta, c_theta: f64::INFINITY });
            continue;
        }
        let mut sup: f64 = 0.0;
        for &r in &radii {
            for sign in [1.0, -1.0] {
                let lambda = C64::from_polar(r, sign * theta);
                let res = (identity(n) * lambda - &op.matrix)
                    .try_inverse()
                    .ok_or_else(|| Error::Singular("resolvent on ray".into()))?;
                sup = sup.max(r * norm2(&res));
            }
        }
        table.push(RayBound { theta, c_theta: sup });
    }
    let theta_min = table
        .iter()
        .filter(|r| r.c_theta.is_finite())
        .map(|r| r.theta)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
    Ok(SectorialityReport {
        omega: op.omega,
        theta_min,
        table,
        reduced_dim: n,
        kernel_dim: op.kernel_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        let d = SectorialOperator::preset("diag:(1,2,4)").unwrap();
        assert_eq!(d.dim(), 3);
        assert!(d.hermitian && d.omega == 0.0);
        let c = SectorialOperator::preset("cycle-laplacian:8").unwrap();
        assert_eq!((c.dim(), c.kernel_dim), (7, 1));
        let p = SectorialOperator::preset("path-laplacian:5").unwrap();
        assert_eq!((p.dim(), p.kernel_dim), (4, 1));
        let j = SectorialOperator::preset("jordan:(1,3)").unwrap();
        assert!(j.eigen.is_none() && j.dim() == 3);
        let l = SectorialOperator::preset("diag-logspaced:16").unwrap();
        let (lo, hi) = l.spectral_range();
        assert!((lo - 0.1).abs() < 1e-14 && (hi - 10.0).abs() < 1e-12);
        assert!(SectorialOperator::preset("nope:3").is_err());
        assert!(SectorialOperator::preset("diag:(1,x)").is_err());
    }

    #[test]
    fn cycle_spectrum() {
        let c = SectorialOperator::preset("cycle-laplacian:8").unwrap();
        let mut s: Vec<f64> = c.spectrum().iter().map(|v| v.re).collect();
        s.sort_by(f64::total_cmp);
        let mut want: Vec<f64> =
            (1..8).map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / 8.0).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in s.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn not_sectorial() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]));
        assert!(matches!(check_sectoriality(&m, &[0.5]), Err(Error::NotSectorial(_))));
        let nil = Mat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(SectorialOperator::from_matrix("nil", nil).is_err());
    }

    #[test]
    fn diag_ray_bounds() {
        let d = SectorialOperator::preset("diag:(1,2,4)").unwrap();
        let rep = sectoriality_of(&d, &[0.3, 1.0, 2.0]).unwrap();
        for r in &rep.table {
            let bound = if r.theta < PI / 2.0 { 1.0 / r.theta.sin() } else { 1.0 };
            assert!(r.c_theta <= bound * (1.0 + 1e-9), "{r:?}");
            assert!(r.c_theta >= 0.95 * bound);
        }
        assert_eq!(rep.theta_min, Some(0.3));
    }

    #[test]
    fn jordan_ray_growth() {
        let j = SectorialOperator::preset("jordan:(1,2)").unwrap();
        let rep = sectoriality_of(&j, &[0.4, 0.2, 0.1]).unwrap();
        // C_θ ~ sin^{-2} θ: halving θ roughly quadruples the bound
        let r1 = rep.table[1].c_theta / rep.table[0].c_theta;
        let r2 = rep.table[2].c_theta / rep.table[1].c_theta;
        assert!(r1 > 3.0 && r2 > 3.5, "{r1} {r2}");
    }

    #[test]
    fn semigroup_and_resolvent() {
        let d = SectorialOperator::preset("diag:(1)").unwrap();
        let e = d.semigroup(C64::new(1.0, 0.0)).unwrap();
        assert!((e[(0, 0)].re - (-1f64).exp()).abs() < 1e-15);
        assert!(d.semigroup(C64::new(0.0, 1.0)).is_err());
        assert!(matches!(d.resolvent(C64::new(1.0, 0.0)), Err(Error::Singular(_))));
    }
}
