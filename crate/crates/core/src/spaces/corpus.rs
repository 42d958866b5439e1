//! Test-function corpora loaded from JSON.
//!
//! ```json
//! { "functions": [
//!     { "name": "rho", "coordinate": "log",
//!       "grid": { "u_min": -40, "u_max": 40, "n": 4096 },
//!       "source": { "closed-form": { "kind": "rho", "power": 1 } } },
//!     { "name": "custom", "coordinate": "linear",
//!       "grid": { "u_min": -1, "u_max": 1, "n": 16 },
//!       "source": { "samples": [[1.0, 0.0], ...] } } ] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{Coordinate, GridSpec, SampledFunction};
use crate::{Error, Result, C64};

/// Closed-form functions of `λ` (log coordinates) or `u` (linear).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClosedForm {
    One,
    /// `ρ(λ)^power`, `ρ(λ) = λ (1+λ)^{-2}`.
    Rho { power: u32 },
    /// `λ^{is}`.
    PowerIs { s: f64 },
    /// `e^{-zλ}` with `z = re + i im`.
    Exponential { re: f64, im: f64 },
    /// `e^{-λ} ρ(λ)`.
    ExpRho,
    /// `e^{-λ}(1 - e^{-λ})`.
    SemigroupDifference,
    /// `exp(-(log λ - center)² / (2 width²))` (or of `u` in linear
    /// coordinates).
    Gaussian { center: f64, width: f64 },
}

impl ClosedForm {
    /// Value at the point `x` (`x = λ > 0` for log-coordinate use).
    pub fn eval(&self, x: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self {
            ClosedForm::One => one,
            ClosedForm::Rho { power } => (x / ((one + x) * (one + x))).powu(*power),
            ClosedForm::PowerIs { s } => (x.ln() * C64::new(0.0, *s)).exp(),
            ClosedForm::Exponential { re, im } => (-C64::new(*re, *im) * x).exp(),
            ClosedForm::ExpRho => (-x).exp() * x / ((one + x) * (one + x)),
            ClosedForm::SemigroupDifference => (-x).exp() * (one - (-x).exp()),
            ClosedForm::Gaussian { center, width } => {
                let d = x.ln() - center;
                (-(d * d) / (2.0 * width * width)).exp()
            }
        }
    }

    fn eval_linear(&self, u: f64) -> C64 {
        match self {
            ClosedForm::Gaussian { center, width } => {
                C64::new((-(u - center).powi(2) / (2.0 * width * width)).exp(), 0.0)
            }
            _ => self.eval(C64::new(u.exp(), 0.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SampleSource {
    ClosedForm(ClosedForm),
    /// `[re, im]` pairs, one per grid point.
    Samples(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub coordinate: Coordinate,
    pub grid: GridSpec,
    pub source: SampleSource,
}

impl CorpusEntry {
    pub fn sample(&self) -> Result<SampledFunction> {
        let grid = GridSpec::new(self.grid.u_min, self.grid.u_max, self.grid.n)?;
        match &self.source {
            SampleSource::Samples(v) => SampledFunction::from_samples(
                self.coordinate,
                grid,
                v.iter().map(|p| C64::new(p[0], p[1])).collect(),
            ),
            SampleSource::ClosedForm(form) => match self.coordinate {
                Coordinate::Log => SampledFunction::log(grid, |l| form.eval(C64::new(l, 0.0))),
                Coordinate::Linear => SampledFunction::linear(grid, |u| form.eval_linear(u)),
            },
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    functions: Vec<CorpusEntry>,
}

/// Reads a corpus file and samples every entry.
pub fn load_corpus(path: &Path) -> Result<Vec<(String, SampledFunction)>> {
    let text = std::fs::read_to_string(path)?;
    let file: CorpusFile = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    file.functions
        .iter()
        .map(|e| {
            e.sample()
                .map(|f| (e.name.clone(), f))
                .map_err(|err| Error::input(format!("corpus entry {}: {err}", e.name)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let rho = ClosedForm::Rho { power: 1 };
        assert!((rho.eval(C64::new(1.0, 0.0)).re - 0.25).abs() < 1e-15);
        let p = ClosedForm::PowerIs { s: 2.0 }.eval(C64::new(3.0, 0.0));
        assert!((p.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn corpus_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let samples: Vec<[f64; 2]> = (0..16).map(|k| [k as f64, 0.0]).collect();
        let text = serde_json::json!({ "functions": [
            { "name": "rho", "coordinate": "log",
              "grid": { "u_min": -10.0, "u_max": 10.0, "n": 64 },
              "source": { "closed-form": { "kind": "rho", "power": 2 } } },
            { "name": "raw", "coordinate": "linear",
              "grid": { "u_min": 0.0, "u_max": 1.0, "n": 16 },
              "source": { "samples": samples } } ] });
        std::fs::write(&path, text.to_string()).unwrap();
        let c = load_corpus(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].1.values[3].re, 3.0);
        std::fs::write(&path, r#"{"functions": [], "extra": 1}"#).unwrap();
        assert!(matches!(load_corpus(&path), Err(Error::Schema(_))));
    }
}
