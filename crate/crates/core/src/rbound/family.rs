//! Sampled operator families `(N(t))_{t∈Ω}` on a weighted grid.

use serde::{Deserialize, Serialize};

use crate::{Error, Mat, Result, Vector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Dt,
    DtOverT,
    /// Two-dimensional product measure (weights include any Jacobian).
    Product,
}

/// Storage of the sampled matrices.
#[derive(Clone, Debug)]
pub enum FamilyStorage {
    Dense(Vec<Mat>),
    /// `N(t_k) = V diag(d_k) V⁻¹`.
    Spectral {
        v: Mat,
        v_inv: Mat,
        unitary: bool,
        diags: Vec<Vec<C64>>,
    },
}

#[derive(Clone, Debug)]
pub struct OperatorFamily {
    /// Parameter points (one or two coordinates).
    pub points: Vec<Vec<f64>>,
    /// Quadrature weights of the measure at the points.
    pub weights: Vec<f64>,
    pub measure: Measure,
    pub domain: String,
    pub storage: FamilyStorage,
}

impl OperatorFamily {
    pub fn new(
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        measure: Measure,
        domain: impl Into<String>,
        storage: FamilyStorage,
    ) -> Result<Self> {
        let len = match &storage {
            FamilyStorage::Dense(m) => m.len(),
            FamilyStorage::Spectral { diags, .. } => diags.len(),
        };
        if points.len() != weights.len() || weights.len() != len {
            return Err(Error::input(format!(
                "family sizes disagree: {} points, {} weights, {len} samples",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::input("family weights must be positive and finite"));
        }
        match &storage {
            FamilyStorage::Dense(m) => {
                if let Some(first) = m.first() {
                    if m.iter().any(|x| x.shape() != first.shape() || x.nrows() != x.ncols()) {
                        return Err(Error::input("family matrices differ in shape"));
                    }
                }
            }
            FamilyStorage::Spectral { v, v_inv, diags, .. } => {
                if diags.iter().any(|d| d.len() != v.ncols()) || v.shape() != v_inv.shape() {
                    return Err(Error::input("spectral family dimensions disagree"));
                }
            }
        }
        Ok(OperatorFamily { points, weights, measure, domain: domain.into(), storage })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            FamilyStorage::Dense(m) => m.first().map_or(0, |x| x.nrows()),
            FamilyStorage::Spectral { v, .. } => v.nrows(),
        }
    }

    pub fn matrix(&self, k: usize) -> Mat {
        match &self.storage {
            FamilyStorage::Dense(m) => m[k].clone(),
            FamilyStorage::Spectral { v, v_inv, diags, .. } => {
                let mut s = v.clone();
                for (j, d) in diags[k].iter().enumerate() {
                    for i in 0..s.nrows() {
                        s[(i, j)] *= d;
                    }
                }
                s * v_inv
            }
        }
    }

    /// `⟨N(t_k) x, x'⟩ = x'* N(t_k) x` for every sample.
    pub fn matrix_elements(&self, x: &Vector, xp: &Vector) -> Vec<C64> {
        match &self.storage {
            FamilyStorage::Dense(m) => m.iter().map(|n| xp.dotc(&(n * x))).collect(),
            FamilyStorage::Spectral { v, v_inv, diags, .. } => {
                let a = v_inv * x;
                let b = v.adjoint() * xp;
                diags
                    .iter()
                    .map(|d| d.iter().zip(a.iter().zip(b.iter())).map(|(dj, (aj, bj))| dj * aj * bj.conj()).sum())
                    .collect()
            }
        }
    }

    /// The family multiplied pointwise by the scalar function `c(t)`.
    pub fn modulated(&self, c: impl Fn(&[f64]) -> C64) -> OperatorFamily {
        let factors: Vec<C64> = self.points.iter().map(|p| c(p)).collect();
        let storage = match &self.storage {
            FamilyStorage::Dense(m) => {
                FamilyStorage::Dense(m.iter().zip(&factors).map(|(x, f)| x * *f).collect())
            }
            FamilyStorage::Spectral { v, v_inv, unitary, diags } => FamilyStorage::Spectral {
                v: v.clone(),
                v_inv: v_inv.clone(),
                unitary: *unitary,
                diags: diags
                    .iter()
                    .zip(&factors)
                    .map(|(d, f)| d.iter().map(|x| x * f).collect())
                    .collect(),
            },
        };
        OperatorFamily { storage, ..self.clone() }
    }

    /// Sub-family on the points where `keep` holds.
    pub fn restrict(&self, keep: impl Fn(&[f64]) -> bool) -> Result<OperatorFamily> {
        let idx: Vec<usize> = (0..self.len()).filter(|&k| keep(&self.points[k])).collect();
        if idx.is_empty() {
            return Err(Error::input("restriction leaves no samples"));
        }
        let storage = match &self.storage {
            FamilyStorage::Dense(m) => FamilyStorage::Dense(idx.iter().map(|&k| m[k].clone()).collect()),
            FamilyStorage::Spectral { v, v_inv, unitary, diags } => FamilyStorage::Spectral {
                v: v.clone(),
                v_inv: v_inv.clone(),
                unitary: *unitary,
                diags: idx.iter().map(|&k| diags[k].clone()).collect(),
            },
        };
        OperatorFamily::new(
            idx.iter().map(|&k| self.points[k].clone()).collect(),
            idx.iter().map(|&k| self.weights[k]).collect(),
            self.measure,
            format!("{} (restricted)", self.domain),
            storage,
        )
    }

    /// The same family as dense matrices.
    pub fn to_dense(&self) -> OperatorFamily {
        let mats = (0..self.len()).map(|k| self.matrix(k)).collect();
        OperatorFamily { storage: FamilyStorage::Dense(mats), ..self.clone() }
    }
}
