//! Conditions (1)–(8) of the characterization and their consistency report.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calculus::{condition_c1, sobolev_unit_corpus, CorpusSpec};
use super::{log_log_slope, SuiteRow, Verdict};
use crate::operator::{family_samples, FamilyGrid, FamilyKind, SectorialOperator};
use crate::rbound::{r_l2_bound, L2BasisConfig, RMethod, SpaceSpec};
use crate::{Error, Result};

/// Parameters shared by the condition computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub alpha: f64,
    /// `β` of conditions (3) and (4).
    pub beta: f64,
    /// Power of the wave family; defaults to the least integer above `α - ½`.
    pub m: Option<u32>,
    pub theta0: f64,
    /// Ray angles `θ` of condition (3).
    pub c3_angles: Vec<f64>,
    /// Distances `π/2 - θ` of condition (5).
    pub c5_gaps: Vec<f64>,
    /// Extra `β` values for condition (3) at `θ = π`.
    pub beta_sweep: Vec<f64>,
    /// Condition (1) is also evaluated at order `α + ε` when `ε > 0`.
    pub epsilon: f64,
    pub fit_tolerance: f64,
    /// Half-width of the accepted band around 1 for `c2 / (2π c1)`.
    pub ratio_band: f64,
    pub grid: FamilyGrid,
    pub corpus: CorpusSpec,
    pub l2: L2BasisConfig,
    /// Recompute (2), (3) at `θ = π` and (7) on the refined grid.
    pub convergence_study: bool,
    /// Radial points of the two-dimensional families for operators without
    /// an eigendecomposition.
    pub dense_log_points_2d: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            alpha: 1.0,
            beta: 0.5,
            m: None,
            theta0: PI,
            c3_angles: vec![PI, PI / 2.0, PI / 4.0, PI / 8.0],
            c5_gaps: vec![PI / 4.0, PI / 8.0, PI / 16.0, PI / 32.0],
            beta_sweep: Vec::new(),
            epsilon: 0.0,
            fit_tolerance: 0.1,
            ratio_band: 0.05,
            grid: FamilyGrid::default(),
            corpus: CorpusSpec::default(),
            l2: L2BasisConfig::default(),
            convergence_study: false,
            dense_log_points_2d: 128,
        }
    }
}

impl SuiteParams {
    pub fn wave_power(&self) -> u32 {
        self.m.unwrap_or_else(|| ((self.alpha - 0.5).floor() + 1.0).max(1.0) as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.5 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must exceed 1/2, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) || self.beta_sweep.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
            return Err(Error::domain("beta values must lie in (0, 1)"));
        }
        if self.c3_angles.iter().any(|t| !(t.abs() > 0.0 && t.abs() <= PI))
            || self.c5_gaps.iter().any(|g| !(*g > 0.0 && *g <= PI / 2.0))
        {
            return Err(Error::domain("angles out of range"));
        }
        if !(self.epsilon >= 0.0) || !(self.fit_tolerance >= 0.0) || !(self.ratio_band >= 0.0) {
            return Err(Error::domain("epsilon and tolerances must be non-negative"));
        }
        Ok(())
    }
}

/// One averaged R-bound value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionValue {
    pub condition: String,
    pub param: String,
    pub value: f64,
    pub upper: Option<f64>,
    pub method: RMethod,
    pub grid: String,
}

/// Bound against angle with the fitted growth exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleFit {
    pub condition: String,
    /// `|θ|` for (3), `π/2 - |θ|` for (5).
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    /// `e` in `value ≈ C angle^{-e}`.
    pub exponent: f64,
}

impl AngleFit {
    fn new(condition: &str, angles: Vec<f64>, values: Vec<f64>) -> Self {
        let exponent = if angles.len() >= 2 { -log_log_slope(&angles, &values) } else { f64::NAN };
        AngleFit { condition: condition.into(), angles, values, exponent }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub operator: String,
    pub dim: usize,
    pub kernel_dim: usize,
    pub space: SpaceSpec,
    pub alpha: f64,
    pub beta: f64,
    pub m: u32,
    pub c1: f64,
    pub c1_epsilon: Option<f64>,
    pub corpus_size: usize,
    pub conditions: Vec<ConditionValue>,
    pub c3_fit: AngleFit,
    pub c5_fit: AngleFit,
    pub ratio_c2_c1: f64,
    pub convergence: Vec<ConditionValue>,
    pub flags: Vec<Flag>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn value(&self, condition: &str) -> Option<f64> {
        self.conditions.iter().find(|c| c.condition == condition).map(|c| c.value)
    }

    pub fn failed(&self) -> bool {
        self.flags.iter().any(|f| f.verdict == Verdict::Fail)
    }

    /// Flat rows for the CSV report.
    pub fn rows(&self, suite: &str) -> Vec<SuiteRow> {
        let row = |condition: &str, param: String, value: f64, tolerance: f64, grid: &str, pass: Verdict| SuiteRow {
            operator: self.operator.clone(),
            suite: suite.into(),
            condition: condition.into(),
            param,
            value,
            tolerance,
            grid: grid.into(),
            pass,
        };
        let corpus = format!("{} functions", self.corpus_size);
        let mut rows = vec![row("c1", format!("alpha={}", self.alpha), self.c1, 0.0, &corpus, Verdict::Info)];
        if let Some(v) = self.c1_epsilon {
            rows.push(row("c1-eps", format!("alpha={}", self.alpha), v, 0.0, &corpus, Verdict::Info));
        }
        for c in self.conditions.iter().chain(&self.convergence) {
            let tol = c.upper.map_or(0.0, |u| u - c.value);
            rows.push(row(&c.condition, c.param.clone(), c.value, tol, &c.grid, Verdict::Info));
        }
        for fit in [&self.c3_fit, &self.c5_fit] {
            rows.push(row(
                &format!("{}-exponent", fit.condition),
                format!("alpha={}", self.alpha),
                fit.exponent,
                0.0,
                &format!("{} angles", fit.angles.len()),
                Verdict::Info,
            ));
        }
        for f in &self.flags {
            rows.push(row(&f.name, format!("alpha={}", self.alpha), f.value, f.tolerance, "", f.verdict));
        }
        rows
    }
}

fn grid_for(op: &SectorialOperator, params: &SuiteParams, grid: &FamilyGrid) -> FamilyGrid {
    if op.eigen.is_some() {
        grid.clone()
    } else {
        FamilyGrid { log_points_2d: grid.log_points_2d.min(params.dense_log_points_2d), ..grid.clone() }
    }
}

fn evaluate(
    op: &SectorialOperator,
    space: &SpaceSpec,
    jobs: Vec<(String, FamilyKind)>,
    grid: &FamilyGrid,
    l2: &L2BasisConfig,
) -> Result<Vec<ConditionValue>> {
    jobs.into_par_iter()
        .map(|(param, kind)| {
            let family = family_samples(op, kind, grid)?;
            let est = r_l2_bound(&family, space, l2)?;
            Ok(ConditionValue {
                condition: kind.label().into(),
                param,
                value: est.value(),
                upper: est.upper,
                method: est.method,
                grid: family.domain.clone(),
            })
        })
        .collect()
}

/// `R[L²]`-bounds of the families of conditions (2)–(8). Angles outside the
/// admissible range of `op` are skipped and listed in the returned notes.
fn conditions_with_notes(
    op: &SectorialOperator,
    space: &SpaceSpec,
    params: &SuiteParams,
) -> Result<(Vec<ConditionValue>, Vec<String>)> {
    params.validate()?;
    let (alpha, beta, m) = (params.alpha, params.beta, params.wave_power());
    let mut jobs: Vec<(String, FamilyKind)> = vec![(format!("alpha={alpha}"), FamilyKind::ImaginaryPowers { alpha })];
    let mut notes = Vec::new();
    let mut push = |param: String, kind: FamilyKind, jobs: &mut Vec<(String, FamilyKind)>| match kind.validate(op) {
        Ok(()) => jobs.push((param, kind)),
        Err(e) => notes.push(format!("{} {param} skipped: {e}", kind.label())),
    };
    for &theta in &params.c3_angles {
        push(format!("beta={beta},theta={theta:.6}"), FamilyKind::ResolventRay { beta, theta }, &mut jobs);
    }
    for &b in &params.beta_sweep {
        push(format!("beta={b},theta={PI:.6}"), FamilyKind::ResolventRay { beta: b, theta: PI }, &mut jobs);
    }
    push(
        format!("alpha={alpha},beta={beta},theta0={:.6}", params.theta0),
        FamilyKind::ResolventSector { alpha, beta, theta0: params.theta0 },
        &mut jobs,
    );
    for &gap in &params.c5_gaps {
        let theta = PI / 2.0 - gap;
        push(format!("theta={theta:.6}"), FamilyKind::SemigroupRay { theta }, &mut jobs);
    }
    push(format!("alpha={alpha}"), FamilyKind::SemigroupHalfPlane { alpha }, &mut jobs);
    push(format!("alpha={alpha},m={m}"), FamilyKind::Wave { alpha, m }, &mut jobs);
    push(format!("alpha={alpha}"), FamilyKind::WaveTaylor { alpha }, &mut jobs);
    let grid = grid_for(op, params, &params.grid);
    Ok((evaluate(op, space, jobs, &grid, &params.l2)?, notes))
}

/// `R[L²]`-bounds of the families of conditions (2)–(8) on the grids of
/// `params` (one value per parameter set, in order (2), (3), (4), …, (8)).
pub fn condition_c2_to_c8(op: &SectorialOperator, space: &SpaceSpec, params: &SuiteParams) -> Result<Vec<ConditionValue>> {
    Ok(conditions_with_notes(op, space, params)?.0)
}

fn angle_fit(values: &[ConditionValue], condition: &str, beta: f64, angle: impl Fn(f64) -> f64) -> AngleFit {
    let mut angles = Vec::new();
    let mut vals = Vec::new();
    for c in values.iter().filter(|c| c.condition == condition) {
        // parameter strings end in theta=<value>
        let Some(theta) = c.param.rsplit("theta=").next().and_then(|s| s.parse::<f64>().ok()) else {
            continue;
        };
        if condition == "c3" && !c.param.starts_with(&format!("beta={beta},")) {
            continue;
        }
        angles.push(angle(theta));
        vals.push(c.value);
    }
    AngleFit::new(condition, angles, vals)
}

/// Conditions (1)–(8) together with the consistency checks the proofs make
/// explicit: `c2 = 2π c1`, co-occurring finiteness and the angle-growth
/// exponents of (3) and (5).
pub fn equivalence_report(op: &SectorialOperator, space: &SpaceSpec, params: &SuiteParams) -> Result<SuiteReport> {
    params.validate()?;
    if space.n != op.dim() {
        return Err(Error::input(format!("space dimension {} differs from operator dimension {}", space.n, op.dim())));
    }
    let corpus = sobolev_unit_corpus(op, params.alpha, &params.corpus)?;
    let c1 = condition_c1(op, space, &corpus, &params.l2.search)?.value();
    let c1_epsilon = if params.epsilon > 0.0 {
        let corpus = sobolev_unit_corpus(op, params.alpha + params.epsilon, &params.corpus)?;
        Some(condition_c1(op, space, &corpus, &params.l2.search)?.value())
    } else {
        None
    };
    let (conditions, mut notes) = conditions_with_notes(op, space, params)?;
    let c2 = conditions.iter().find(|c| c.condition == "c2").map_or(f64::NAN, |c| c.value);
    let ratio = c2 / (2.0 * PI * c1);
    let c3_fit = angle_fit(&conditions, "c3", params.beta, f64::abs);
    let c5_fit = angle_fit(&conditions, "c5", params.beta, |t| PI / 2.0 - t.abs());

    let normal_hilbert = space.is_hilbert() && op.eigen.as_ref().is_some_and(|e| e.unitary);
    let asserted = |ok: bool| if normal_hilbert { Verdict::from_check(ok) } else { Verdict::Info };
    let alpha = params.alpha;
    let mut flags = vec![Flag {
        name: "c2/(2pi*c1)".into(),
        value: ratio,
        tolerance: params.ratio_band,
        verdict: asserted((ratio - 1.0).abs() <= params.ratio_band),
    }];
    let all_finite = c1.is_finite() && conditions.iter().all(|c| c.value.is_finite());
    flags.push(Flag {
        name: "finite-co-occurrence".into(),
        value: conditions.iter().map(|c| c.value).fold(c1, f64::max),
        tolerance: 0.0,
        verdict: Verdict::from_check(all_finite),
    });
    for fit in [&c3_fit, &c5_fit] {
        if fit.exponent.is_nan() {
            notes.push(format!("{}: fewer than two admissible angles, no growth fit", fit.condition));
            continue;
        }
        flags.push(Flag {
            name: format!("{}-exponent<=alpha+tol", fit.condition),
            value: fit.exponent,
            tolerance: params.fit_tolerance,
            verdict: asserted(fit.exponent <= alpha + params.fit_tolerance),
        });
        flags.push(Flag {
            name: format!("{}-exponent-band", fit.condition),
            value: fit.exponent,
            tolerance: 0.3,
            verdict: Verdict::Info,
        });
    }
    if op.kernel_dim > 0 {
        notes.push(format!(
            "range reduction: removed N(A) of dimension {}, reduced operator has dimension {}",
            op.kernel_dim,
            op.dim()
        ));
    }
    if !normal_hilbert {
        notes.push("ratios recorded without equivalence assertions (non-normal operator or non-Hilbert space)".into());
    }
    let convergence = if params.convergence_study {
        let m = params.wave_power();
        let mut jobs = vec![
            (format!("alpha={alpha},refined"), FamilyKind::ImaginaryPowers { alpha }),
            (format!("alpha={alpha},m={m},refined"), FamilyKind::Wave { alpha, m }),
        ];
        if (FamilyKind::ResolventRay { beta: params.beta, theta: PI }).validate(op).is_ok() {
            jobs.push((format!("beta={},theta={PI:.6},refined", params.beta), FamilyKind::ResolventRay {
                beta: params.beta,
                theta: PI,
            }));
        }
        let grid = grid_for(op, params, &params.grid.refined());
        evaluate(op, space, jobs, &grid, &params.l2)?
    } else {
        Vec::new()
    };
    Ok(SuiteReport {
        operator: op.name.clone(),
        dim: op.dim(),
        kernel_dim: op.kernel_dim,
        space: *space,
        alpha,
        beta: params.beta,
        m: params.wave_power(),
        c1,
        c1_epsilon,
        corpus_size: corpus.len(),
        conditions,
        c3_fit,
        c5_fit,
        ratio_c2_c1: ratio,
        convergence,
        flags,
        notes,
    })
}
