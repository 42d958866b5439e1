//! Config-driven runs: suites, CSV/JSON reports, plot data and manifests.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::operator::{
    family_samples, random_unit_pairs, resolvent_bip_identity, w_alpha_mellin_identity, wave_mellin_identity,
    FamilyGrid, FamilyKind, IdentityCheck, SectorialOperator,
};
use crate::quad::Rule;
use crate::rbound::{r_l1_vs_rbound, r_l2_bound, L2BasisConfig, RSearchConfig, SpaceSpec};
use crate::spaces::{
    hoermander_norm, make_partition, mihlin_norm, sobexp_norm, ClosedForm, GridSpec, PartitionKind,
    PartitionParams, SampledFunction,
};
use crate::special::{
    contour_shifted_integral, find_lower_bound_constants, gamma_asymptotic_band, wave_kernel_integral,
    IntegralConfig, LowerBoundSearch, WaveKernelParams, WaveSign,
};
use crate::suite::{
    equivalence_report, general_averaged_check, log_log_slope, paley_littlewood_check, sea_to_ha_decomposition,
    sobolev_calculus_apply, PaleyLittlewoodConfig, SuiteParams, SuiteRow, Verdict,
};
use crate::{bracket, Error, Mat, Result, C64};

/// Version of the report and manifest layout.
pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 8] = ["operator", "suite", "condition", "param", "value", "tolerance", "grid", "pass"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Norms,
    Identities,
    Rbound,
    TheoremEquivalence,
    PaleyLittlewood,
    SeaToHa,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Norms,
        Suite::Identities,
        Suite::Rbound,
        Suite::TheoremEquivalence,
        Suite::PaleyLittlewood,
        Suite::SeaToHa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Norms => "norms",
            Suite::Identities => "identities",
            Suite::Rbound => "rbound",
            Suite::TheoremEquivalence => "theorem-equivalence",
            Suite::PaleyLittlewood => "paley-littlewood",
            Suite::SeaToHa => "sea-to-ha",
        }
    }

    pub fn parse(name: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown suite {name:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub p: f64,
    pub n: usize,
}

fn default_alpha() -> Vec<f64> {
    vec![1.0]
}

fn default_beta() -> Vec<f64> {
    vec![0.5]
}

fn default_pairs() -> usize {
    20
}

fn default_out() -> PathBuf {
    PathBuf::from("hormander-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Operator preset, e.g. `diag:(1,2,4)`.
    pub operator: String,
    /// `ℓ^p_n`; defaults to `ℓ²` of the (range-reduced) operator dimension.
    #[serde(default)]
    pub space: Option<SpaceConfig>,
    #[serde(default = "default_alpha")]
    pub alpha: Vec<f64>,
    #[serde(default = "default_beta")]
    pub beta: Vec<f64>,
    /// Wave powers; each must exceed `α - ½`. Empty: the least admissible.
    #[serde(default)]
    pub m: Vec<u32>,
    /// Ray angles of condition (3); empty: `π, π/2, π/4, π/8`.
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub grid: FamilyGrid,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub suites: Vec<Suite>,
    /// Random `(x, x')` pairs of the identity checks.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical JSON of everything except the output
    /// directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Checks the config and builds the operator and space.
    pub fn validate(&self) -> Result<(SectorialOperator, SpaceSpec)> {
        let op = SectorialOperator::preset(&self.operator)?;
        let space = match self.space {
            None => SpaceSpec::hilbert(op.dim()),
            Some(s) => {
                if s.n != op.dim() && s.n != op.original_dim {
                    return Err(Error::Config(format!(
                        "space dimension {} matches neither the operator ({}) nor its range ({})",
                        s.n,
                        op.original_dim,
                        op.dim()
                    )));
                }
                SpaceSpec::new(s.p, op.dim()).map_err(|e| Error::Config(e.to_string()))?
            }
        };
        if self.alpha.is_empty() || self.alpha.iter().any(|a| !(*a > 0.5 && a.is_finite())) {
            return Err(Error::Config("alpha values must exceed 1/2".into()));
        }
        if self.beta.is_empty() || self.beta.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
            return Err(Error::Config("beta values must lie in (0, 1)".into()));
        }
        if self.theta.iter().any(|t| !(t.abs() > 0.0 && t.abs() <= PI)) {
            return Err(Error::Config("theta values must satisfy 0 < |θ| ≤ π".into()));
        }
        for &a in &self.alpha {
            for &m in &self.m {
                if m as f64 <= a - 0.5 {
                    return Err(Error::Config(format!("m = {m} does not exceed alpha - 1/2 = {}", a - 0.5)));
                }
            }
        }
        if self.pairs == 0 {
            return Err(Error::Config("pairs must be positive".into()));
        }
        let g = &self.grid;
        if !(g.t_max > 0.0 && g.s_max > 0.0 && g.step > 0.0 && g.log_points >= 16 && g.log_points_2d >= 16) {
            return Err(Error::Config(format!("invalid grid {g:?}")));
        }
        Ok((op, space))
    }

    fn wave_powers(&self, alpha: f64) -> Vec<u32> {
        if self.m.is_empty() {
            vec![((alpha - 0.5).floor() + 1.0).max(1.0) as u32]
        } else {
            self.m.clone()
        }
    }
}

/// x–y series for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Default)]
struct SuiteOutput {
    rows: Vec<SuiteRow>,
    plots: Vec<PlotSeries>,
    notes: Vec<String>,
    details: BTreeMap<String, serde_json::Value>,
}

impl SuiteOutput {
    fn row(&mut self, ctx: &Ctx, suite: Suite, condition: &str, param: String, value: f64, tolerance: f64, grid: &str, pass: Verdict) {
        self.rows.push(SuiteRow {
            operator: ctx.op.name.clone(),
            suite: suite.name().into(),
            condition: condition.into(),
            param,
            value,
            tolerance,
            grid: grid.into(),
            pass,
        });
    }

    fn detail(&mut self, key: String, value: impl Serialize) {
        self.details.insert(key, serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    op: &'a SectorialOperator,
    space: SpaceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
    pub wall_seconds: f64,
    pub rows: usize,
    pub failures: usize,
    /// The module error, verbatim, when the suite aborted.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config_hash: String,
    pub tool_version: String,
    pub operator: String,
    pub output_dir: PathBuf,
    pub suites: Vec<SuiteOutcome>,
    pub failures: usize,
    pub passed: bool,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)?;
        let mut m: RunManifest = serde_json::from_str(&text)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "manifest schema {} differs from supported {SCHEMA_VERSION}",
                m.schema_version
            )));
        }
        // resolve outputs next to the manifest
        m.output_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }
}

/// JSON mirror of a suite's CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteDocument {
    pub schema_version: u32,
    pub config_hash: String,
    pub suite: Suite,
    pub operator: String,
    pub rows: Vec<JsonRow>,
    pub notes: Vec<String>,
    pub details: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonRow {
    pub operator: String,
    pub suite: String,
    pub condition: String,
    pub param: String,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub grid: GridMeta,
    pub pass: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub description: String,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Runs the selected suites and writes reports under `output_dir`.
pub fn run(config: &RunConfig) -> Result<RunManifest> {
    let (op, space) = config.validate()?;
    let hash = config.hash();
    std::fs::create_dir_all(&config.output_dir)?;
    let ctx = Ctx { cfg: config, op: &op, space };
    let mut suites = config.suites.clone();
    suites.dedup();
    let results: Vec<(Suite, f64, Result<SuiteOutput>)> = suites
        .par_iter()
        .map(|&s| {
            let start = Instant::now();
            let out = run_suite(&ctx, s);
            (s, start.elapsed().as_secs_f64(), out)
        })
        .collect();
    let mut outcomes = Vec::new();
    for (suite, wall, result) in results {
        let outcome = match result {
            Ok(out) => {
                let files = write_suite(&config.output_dir, &hash, suite, &op.name, &out)?;
                let failures = out.rows.iter().filter(|r| r.pass == Verdict::Fail).count();
                SuiteOutcome { suite, files, wall_seconds: wall, rows: out.rows.len(), failures, error: None }
            }
            Err(e) => SuiteOutcome {
                suite,
                files: Vec::new(),
                wall_seconds: wall,
                rows: 0,
                failures: 0,
                error: Some(e.to_string()),
            },
        };
        outcomes.push(outcome);
    }
    let failures = outcomes.iter().map(|o| o.failures).sum();
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        config_hash: hash,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        operator: op.name.clone(),
        output_dir: config.output_dir.clone(),
        suites: outcomes,
        failures,
        passed: failures == 0,
    };
    std::fs::write(config.output_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

fn write_suite(dir: &Path, hash: &str, suite: Suite, operator: &str, out: &SuiteOutput) -> Result<Vec<String>> {
    let name = suite.name();
    let mut files = Vec::new();
    let csv_name = format!("{name}.csv");
    let mut buf = format!("# config-hash {hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(CSV_HEADER).map_err(std::io::Error::from)?;
        for r in &out.rows {
            w.write_record([
                r.operator.as_str(),
                r.suite.as_str(),
                r.condition.as_str(),
                r.param.as_str(),
                &fmt(r.value),
                &fmt(r.tolerance),
                r.grid.as_str(),
                r.pass.as_str(),
            ])
            .map_err(std::io::Error::from)?;
        }
        w.flush()?;
    }
    std::fs::write(dir.join(&csv_name), buf)?;
    files.push(csv_name);

    let doc = SuiteDocument {
        schema_version: SCHEMA_VERSION,
        config_hash: hash.into(),
        suite,
        operator: operator.into(),
        rows: out
            .rows
            .iter()
            .map(|r| JsonRow {
                operator: r.operator.clone(),
                suite: r.suite.clone(),
                condition: r.condition.clone(),
                param: r.param.clone(),
                value: finite(r.value),
                tolerance: finite(r.tolerance),
                grid: GridMeta { description: r.grid.clone() },
                pass: r.pass,
            })
            .collect(),
        notes: out.notes.clone(),
        details: out.details.clone(),
    };
    let json_name = format!("{name}.json");
    std::fs::write(dir.join(&json_name), serde_json::to_string_pretty(&doc)?)?;
    files.push(json_name);

    for p in &out.plots {
        let file = format!("{name}-{}.plot.csv", p.name);
        let mut buf = format!("# config-hash {hash}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record([p.x_label.as_str(), p.y_label.as_str()]).map_err(std::io::Error::from)?;
            for (x, y) in &p.points {
                w.write_record([fmt(*x), fmt(*y)]).map_err(std::io::Error::from)?;
            }
            w.flush()?;
        }
        std::fs::write(dir.join(&file), buf)?;
        files.push(file);
    }
    Ok(files)
}

fn run_suite(ctx: &Ctx, suite: Suite) -> Result<SuiteOutput> {
    match suite {
        Suite::Norms => norms_suite(ctx),
        Suite::Identities => identities_suite(ctx),
        Suite::Rbound => rbound_suite(ctx),
        Suite::TheoremEquivalence => theorem_suite(ctx),
        Suite::PaleyLittlewood => paley_littlewood_suite(ctx),
        Suite::SeaToHa => sea_to_ha_suite(ctx),
    }
}

fn norms_grid() -> GridSpec {
    GridSpec::new(-40.0, 40.0, 8192).expect("valid grid")
}

fn norms_suite(ctx: &Ctx) -> Result<SuiteOutput> {
    const S: Suite = Suite::Norms;
    let mut out = SuiteOutput::default();
    let grid = norms_grid();
    let g = format!("u in [{}, {}], {} points", grid.u_min, grid.u_max, grid.n);
    let eq = make_partition(PartitionKind::Equidistant, &PartitionParams::default())?;
    let fd = make_partition(PartitionKind::FourierDyadic, &PartitionParams::default())?;
    let corpus: Vec<(&str, ClosedForm)> = vec![
        ("rho", ClosedForm::Rho { power: 1 }),
        ("exp-rho", ClosedForm::ExpRho),
        ("semigroup-difference", ClosedForm::SemigroupDifference),
        ("gaussian", ClosedForm::Gaussian { center: 0.0, width: 1.0 }),
        ("power-is", ClosedForm::PowerIs { s: 1.0 }),
    ];
    let sample = |form: &ClosedForm| SampledFunction::log(grid, |l| form.eval(C64::new(l, 0.0)));
    for &alpha in &ctx.cfg.alpha {
        for (name, form) in &corpus {
            let f = sample(form)?;
            let s = sobexp_norm(&f, alpha)?;
            let h = hoermander_norm(&f, alpha, &eq)?;
            let m = mihlin_norm(&f, alpha, &fd)?;
            let p = format!("alpha={alpha}");
            let expect_divergent = matches!(form, ClosedForm::PowerIs { .. });
            out.row(ctx, S, &format!("S-norm:{name}"), p.clone(), s.value, 0.0, &g, Verdict::Info);
            out.row(ctx, S, &format!("H-norm:{name}"), p.clone(), h.value, 0.0, &g, Verdict::Info);
            out.row(ctx, S, &format!("M-norm:{name}"), p.clone(), m.value, 0.0, &g, Verdict::Info);
            let applicable = s.divergent == expect_divergent && h.value.is_finite();
            out.row(ctx, S, &format!("applicability:{name}"), p, f64::from(u8::from(applicable)), 0.0, &g, Verdict::from_check(applicable));
        }

        // ‖λ^{is}‖_{H^α} against ⟨s⟩
        let svals = [1.0, 4.0, 16.0, 64.0];
        let mut pts = Vec::new();
        for &s in &svals {
            let f = sample(&ClosedForm::PowerIs { s })?;
            let h = hoermander_norm(&f, alpha, &eq)?.value;
            out.row(ctx, S, "H-norm:power-is", format!("alpha={alpha},s={s}"), h, 0.0, &g, Verdict::Info);
            pts.push((bracket(s), h));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let slope = log_log_slope(&xs, &ys);
        // the four-point fit is pre-asymptotic for windows supported in [-1, 1]
        out.row(ctx, S, "power-is-growth-exponent", format!("alpha={alpha}"), slope, 0.1 * alpha, &g, Verdict::Info);
        let tail = log_log_slope(&xs[2..], &ys[2..]);
        out.row(ctx, S, "power-is-tail-exponent", format!("alpha={alpha}"), tail, 0.1 * alpha, &g, Verdict::from_check((tail - alpha).abs() <= 0.1 * alpha));
        out.plots.push(PlotSeries {
            name: format!("power-is-growth-alpha{alpha}"),
            x_label: "bracket_s".into(),
            y_label: "hoermander_norm".into(),
            points: pts,
        });

        // dilation invariance of the Hörmander norm
        for (name, form) in corpus.iter().filter(|(n, _)| *n != "semigroup-difference") {
            let base = hoermander_norm(&sample(form)?, alpha, &eq)?.value;
            for (label, lt) in [("e^(1/3)", 1.0 / 3.0), ("e", 1.0), ("e^(7/2)", 3.5)] {
                let shifted = SampledFunction::log(grid, |l| form.eval(C64::new(l * f64::exp(lt), 0.0)))?;
                let r = hoermander_norm(&shifted, alpha, &eq)?.value / base;
                let ok = (0.5..=2.0).contains(&r);
                out.row(ctx, S, &format!("dilation-ratio:{name}"), format!("alpha={alpha},t={label}"), r, 0.0, &g, Verdict::from_check(ok));
            }
        }
    }

    // S^α calculus against the holomorphic closed form
    for (name, form) in corpus.iter().filter(|(n, _)| *n != "power-is") {
        let f = sample(form)?;
        let formula = sobolev_calculus_apply(ctx.op, &f)?;
        let oracle = ctx.op.funm(&|l| form.eval(l))?;
        let err = max_abs(&(formula - oracle));
        out.row(ctx, S, &format!("calculus-error:{name}"), String::new(), err, 1e-5, &g, Verdict::from_check(err <= 1e-5));
    }
    Ok(out)
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn identities_suite(ctx: &Ctx) -> Result<SuiteOutput> {
    const S: Suite = Suite::Identities;
    let mut out = SuiteOutput::default();
    let icfg = IntegralConfig::default();
    let ln4 = 2.0 * LN_2;
    let v = wave_kernel_integral(C64::new(-1.0, 0.0), 2, &icfg)?;
    out.row(ctx, S, "gamma-integral", "m=2,z=-1".into(), v.re, 1e-6, "adaptive", Verdict::from_check((v - ln4).norm() <= 1e-6));
    let v = contour_shifted_integral(C64::new(-1.0, 0.0), 2, C64::new(0.0, 1.0), &icfg)?;
    let want = C64::new(0.0, ln4);
    let rel = (v - want).norm() / want.norm();
    out.row(ctx, S, "contour-shift", "m=2,z=-1,lambda=i".into(), rel, 1e-4, "damped limit", Verdict::from_check(rel <= 1e-4));
    for &alpha in &ctx.cfg.alpha {
        let (lo, hi) = gamma_asymptotic_band(0.5 - alpha, alpha, 1.0, 100.0, 400)?;
        out.row(ctx, S, "gamma-band", format!("sigma=1/2-alpha,alpha={alpha}"), hi / lo, 4.0, "|t| in [1, 100]", Verdict::from_check(hi / lo <= 4.0));
        let (lo, hi) = gamma_asymptotic_band(alpha - 0.5, alpha, 1.0, 100.0, 400)?;
        out.row(ctx, S, "gamma-band", format!("sigma=alpha-1/2,alpha={alpha}"), hi / lo, 4.0, "|t| in [1, 100]", Verdict::Info);
        for m in [2u32, 3] {
            let beta = 0.5 - alpha;
            let p = format!("m={m},beta={beta}");
            match find_lower_bound_constants(m, beta, &LowerBoundSearch::default()) {
                Ok(c) => {
                    let ok = c.min_sum >= c.epsilon;
                    out.row(ctx, S, "lower-bound-constants", p, c.epsilon, 0.0, "10^4 verification points", Verdict::from_check(ok));
                    out.detail(format!("lower-bound-constants:m={m},alpha={alpha}"), &c);
                }
                Err(e) => {
                    out.row(ctx, S, "lower-bound-constants", p, f64::NAN, 0.0, "10^4 verification points", Verdict::Fail);
                    out.notes.push(format!("lower-bound search m={m}, alpha={alpha}: {e}"));
                }
            }
        }
    }
    let pairs = random_unit_pairs(ctx.op.dim(), ctx.cfg.pairs, ctx.cfg.seed);
    let t_grid: Vec<f64> = (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect();
    let tg = "t in [-10, 10], step 0.5";
    let push = |out: &mut SuiteOutput, name: &str, p: String, check: Result<IdentityCheck>| match check {
        Ok(c) => {
            out.row(ctx, S, name, p, c.max_error, 1e-3, tg, Verdict::from_check(c.max_error <= 1e-3));
        }
        Err(e) => out.notes.push(format!("{name} {p}: {e}")),
    };
    for &alpha in &ctx.cfg.alpha {
        for m in ctx.cfg.wave_powers(alpha) {
            let params = WaveKernelParams::new(alpha, m, WaveSign::Minus)?;
            push(&mut out, "wave-mellin", format!("alpha={alpha},m={m}"), wave_mellin_identity(ctx.op, &params, &pairs, &t_grid));
        }
        let k = alpha - 0.5;
        if (k - k.round()).abs() > 1e-12 {
            push(&mut out, "w-alpha-mellin", format!("alpha={alpha}"), w_alpha_mellin_identity(ctx.op, alpha, &pairs, &t_grid));
        }
    }
    for &beta in &ctx.cfg.beta {
        push(&mut out, "resolvent-bip", format!("beta={beta},theta=pi/2"), resolvent_bip_identity(ctx.op, beta, PI / 2.0, &pairs, &t_grid));
    }
    Ok(out)
}

fn rbound_suite(ctx: &Ctx) -> Result<SuiteOutput> {
    const S: Suite = Suite::Rbound;
    let mut out = SuiteOutput::default();
    let l2 = L2BasisConfig { search: RSearchConfig { seed: ctx.cfg.seed, ..Default::default() }, ..Default::default() };
    let normal_hilbert = ctx.space.is_hilbert() && ctx.op.eigen.as_ref().is_some_and(|e| e.unitary);
    for &alpha in &ctx.cfg.alpha {
        let fam = family_samples(ctx.op, FamilyKind::ImaginaryPowers { alpha }, &ctx.cfg.grid)?;
        let est = r_l2_bound(&fam, &ctx.space, &l2)?;
        let t = ctx.cfg.grid.t_max;
        let closed = Rule::uniform(-t, t, (8.0 * t).ceil() as usize, 16)
            .integrate(|x| C64::new(bracket(x).powf(-2.0 * alpha), 0.0))
            .re
            .sqrt();
        let rel = (est.value() / closed - 1.0).abs();
        let verdict = if normal_hilbert { Verdict::from_check(rel <= 0.02) } else { Verdict::Info };
        out.row(ctx, S, "c2-family", format!("alpha={alpha}"), est.value(), 0.02 * closed, &fam.domain, verdict);
        out.row(ctx, S, "c2-closed-form", format!("alpha={alpha}"), closed, 0.0, &fam.domain, Verdict::Info);
        if ctx.space.is_hilbert() {
            let search = r_l2_bound(&fam, &ctx.space, &L2BasisConfig { force_search: true, ..l2 })?;
            let ok = search.value() <= est.upper.unwrap_or(f64::INFINITY) * (1.0 + 1e-9);
            out.row(ctx, S, "c2-search-lower-bound", format!("alpha={alpha}"), search.value(), 0.0, &fam.domain, Verdict::from_check(ok));
        }
    }
    // R versus R[L¹] on small families of functions of A
    let families: [(&str, Vec<ClosedForm>); 3] = [
        ("rho,power-i", vec![ClosedForm::Rho { power: 1 }, ClosedForm::PowerIs { s: 1.0 }]),
        ("exp,exp-rho,semigroup-difference", vec![
            ClosedForm::Exponential { re: 1.0, im: 0.0 },
            ClosedForm::ExpRho,
            ClosedForm::SemigroupDifference,
        ]),
        ("power-i/2,exp(-(1+i)λ)", vec![ClosedForm::PowerIs { s: 0.5 }, ClosedForm::Exponential { re: 1.0, im: 1.0 }]),
    ];
    for (name, forms) in families {
        let ops: Vec<Mat> = forms.iter().map(|f| ctx.op.funm(&|l| f.eval(l))).collect::<Result<_>>()?;
        let cmp = r_l1_vs_rbound(&ops, &ctx.space, &l2.search)?;
        let (r, r1) = (cmp.r.value(), cmp.r_l1.value());
        out.row(ctx, S, "R", name.into(), r, 0.0, "", Verdict::Info);
        out.row(ctx, S, "R_L1", name.into(), r1, 0.0, "", Verdict::Info);
        out.row(ctx, S, "R_L1<=2R", name.into(), r1 / r, 2.0 * 1.05, "", Verdict::from_check(r1 <= 2.0 * r * 1.05));
        out.row(ctx, S, "R<=R_L1", name.into(), r / r1, 1.05, "", Verdict::from_check(r <= r1 * 1.05));
    }
    // averaged bound of the dilations of ρ
    let grid = norms_grid();
    let rho = SampledFunction::log(grid, |l| ClosedForm::Rho { power: 1 }.eval(C64::new(l, 0.0)))?;
    for &alpha in &ctx.cfg.alpha {
        match general_averaged_check(ctx.op, &rho, alpha) {
            Ok(c) => {
                let p = format!("phi=rho,alpha={alpha}");
                out.row(ctx, S, "dilation-bound", p.clone(), c.bound, 0.0, &c.grid, Verdict::Info);
                out.row(ctx, S, "mellin-kernel-sup", p.clone(), c.kernel_sup, 0.0, "t in [-50, 50]", Verdict::Info);
                out.row(ctx, S, "dilation-constant", p, c.constant, 0.0, &c.grid, Verdict::Info);
            }
            Err(e) => out.notes.push(format!("dilation bound: {e}")),
        }
    }
    Ok(out)
}

fn theorem_suite(ctx: &Ctx) -> Result<SuiteOutput> {
    const S: Suite = Suite::TheoremEquivalence;
    let mut out = SuiteOutput::default();
    for &alpha in &ctx.cfg.alpha {
        for &beta in &ctx.cfg.beta {
            for m in ctx.cfg.wave_powers(alpha) {
                let mut params = SuiteParams {
                    alpha,
                    beta,
                    m: Some(m),
                    grid: ctx.cfg.grid.clone(),
                    convergence_study: true,
                    ..Default::default()
                };
                params.l2.search.seed = ctx.cfg.seed;
                if !ctx.cfg.theta.is_empty() {
                    params.c3_angles = ctx.cfg.theta.clone();
                }
                let report = equivalence_report(ctx.op, &ctx.space, &params)?;
                out.rows.extend(report.rows(S.name()));
                let tag = format!("alpha{alpha}-beta{beta}-m{m}");
                for fit in [&report.c3_fit, &report.c5_fit] {
                    out.plots.push(PlotSeries {
                        name: format!("{}-{tag}", fit.condition),
                        x_label: if fit.condition == "c3" { "theta".into() } else { "pi/2-theta".into() },
                        y_label: "r_l2_bound".into(),
                        points: fit.angles.iter().cloned().zip(fit.values.iter().cloned()).collect(),
                    });
                }
                out.notes.extend(report.notes.iter().cloned());
                out.detail(tag, &report);
            }
        }
    }
    Ok(out)
}

fn paley_littlewood_suite(ctx: &Ctx) -> Result<SuiteOutput> {
    const S: Suite = Suite::PaleyLittlewood;
    let mut out = SuiteOutput::default();
    let cfg = PaleyLittlewoodConfig { seed: ctx.cfg.seed, ..Default::default() };
    let r = paley_littlewood_check(ctx.op, &ctx.space, &cfg)?;
    let g = format!("{} dyadic blocks, {} trials", r.blocks.len(), cfg.trials);
    let band = |v: f64| Verdict::from_check((0.1..=10.0).contains(&v));
    out.row(ctx, S, "lower-ratio", String::new(), r.lower_ratio, 0.1, &g, band(r.lower_ratio));
    out.row(ctx, S, "upper-ratio", String::new(), r.upper_ratio, 10.0, &g, band(r.upper_ratio));
    let spread = r.upper_ratio / r.lower_ratio;
    out.row(ctx, S, "max/min", String::new(), spread, 10.0, &g, Verdict::from_check(spread <= 10.0));
    out.detail("result".into(), &r);
    Ok(out)
}

fn sea_to_ha_suite(ctx: &Ctx) -> Result<SuiteOutput> {
    const S: Suite = Suite::SeaToHa;
    let mut out = SuiteOutput::default();
    let xs = [1e-1, 1e-2, 1e-3];
    let mut norms = Vec::new();
    let mut g_max: f64 = 0.0;
    for &x in &xs {
        let z = C64::new(x, (1.0 - x * x).sqrt());
        let d = sea_to_ha_decomposition(z)?;
        out.row(ctx, S, "h-norm", format!("re_z={x}"), d.h_norm, 0.0, "log-t Gauss panels", Verdict::Info);
        out.row(ctx, S, "g-sup", format!("re_z={x}"), d.g_sup, 0.0, "boundary of the sector pi/8", Verdict::Info);
        norms.push(d.h_norm);
        g_max = g_max.max(d.g_sup);
    }
    let slope = log_log_slope(&xs, &norms);
    out.row(ctx, S, "h-norm-slope", String::new(), slope, 0.2, "", Verdict::from_check((-1.2..=-0.8).contains(&slope)));
    out.row(ctx, S, "g-sup-max", String::new(), g_max, 0.0, "", Verdict::from_check(g_max <= 1.0 + 1e-12));
    out.plots.push(PlotSeries {
        name: "h-norm".into(),
        x_label: "re_z".into(),
        y_label: "h_norm".into(),
        points: xs.iter().cloned().zip(norms).collect(),
    });
    Ok(out)
}

/// Difference of one row between two runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowDiff {
    pub suite: String,
    pub condition: String,
    pub param: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub rel_diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub operator_a: String,
    pub operator_b: String,
    pub rows: Vec<RowDiff>,
    /// Keys present in only one run.
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
    pub max_rel_diff: f64,
}

impl DiffReport {
    pub fn is_identical(&self) -> bool {
        self.operator_a == self.operator_b
            && self.only_in_a.is_empty()
            && self.only_in_b.is_empty()
            && self.max_rel_diff == 0.0
    }
}

fn load_rows(m: &RunManifest) -> Result<BTreeMap<String, JsonRow>> {
    let mut rows = BTreeMap::new();
    for s in &m.suites {
        for f in s.files.iter().filter(|f| f.ends_with(".json")) {
            let doc: SuiteDocument = serde_json::from_str(&std::fs::read_to_string(m.output_dir.join(f))?)?;
            if doc.schema_version != SCHEMA_VERSION {
                return Err(Error::Schema(format!("{f} has schema {}", doc.schema_version)));
            }
            for r in doc.rows {
                let mut key = format!("{}|{}|{}", r.suite, r.condition, r.param);
                let mut k = 1;
                while rows.contains_key(&key) {
                    k += 1;
                    key = format!("{}|{}|{}#{k}", r.suite, r.condition, r.param);
                }
                rows.insert(key, r);
            }
        }
    }
    Ok(rows)
}

/// Row-by-row relative differences between two runs.
pub fn compare(manifest_a: &Path, manifest_b: &Path) -> Result<DiffReport> {
    let a = RunManifest::load(manifest_a)?;
    let b = RunManifest::load(manifest_b)?;
    let ra = load_rows(&a)?;
    let rb = load_rows(&b)?;
    let mut rows = Vec::new();
    let mut max_rel: f64 = 0.0;
    for (key, x) in &ra {
        let Some(y) = rb.get(key) else { continue };
        let rel = match (x.value, y.value) {
            (Some(u), Some(v)) => {
                let scale = u.abs().max(v.abs());
                Some(if scale == 0.0 { 0.0 } else { (u - v).abs() / scale })
            }
            (None, None) => Some(0.0),
            _ => None,
        };
        max_rel = max_rel.max(rel.unwrap_or(f64::INFINITY));
        rows.push(RowDiff {
            suite: x.suite.clone(),
            condition: x.condition.clone(),
            param: x.param.clone(),
            a: x.value,
            b: y.value,
            rel_diff: rel,
        });
    }
    let only_in_a = ra.keys().filter(|k| !rb.contains_key(*k)).cloned().collect();
    let only_in_b = rb.keys().filter(|k| !ra.contains_key(*k)).cloned().collect();
    Ok(DiffReport { operator_a: a.operator, operator_b: b.operator, rows, only_in_a, only_in_b, max_rel_diff: max_rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path, suites: Vec<Suite>) -> RunConfig {
        let text = format!(
            r#"{{"operator": "diag:(1,2,4)", "suites": {}, "output_dir": {:?}}}"#,
            serde_json::to_string(&suites).unwrap(),
            dir.to_str().unwrap()
        );
        RunConfig::from_json(&text).unwrap()
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"operator": "diag:(1)", "colour": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"operator": "diag:(1)", "suites": ["bogus"]}"#).is_err());
        let c = RunConfig::from_json(r#"{"operator": "diag:(1)", "alpha": [0.4]}"#).unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_json(r#"{"operator": "diag:(1,2)", "alpha": [1.7], "m": [1]}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_run() {
        let dir = tempfile::tempdir().unwrap();
        let m = run(&config(dir.path(), vec![])).unwrap();
        assert!(m.suites.is_empty() && m.passed);
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = config(Path::new("/tmp/a"), vec![Suite::SeaToHa]);
        let b = config(Path::new("/tmp/b"), vec![Suite::SeaToHa]);
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: 7, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn identities_and_compare() {
        let da = tempfile::tempdir().unwrap();
        let db = tempfile::tempdir().unwrap();
        let suites = vec![Suite::Identities, Suite::SeaToHa];
        let ma = run(&config(da.path(), suites.clone())).unwrap();
        let mb = run(&config(db.path(), suites)).unwrap();
        assert_eq!(ma.config_hash, mb.config_hash);
        assert!(ma.passed, "{ma:?}");
        for s in &ma.suites {
            assert!(s.error.is_none(), "{s:?}");
            for f in &s.files {
                let text = std::fs::read_to_string(da.path().join(f)).unwrap();
                assert!(text.contains(&ma.config_hash), "{f}");
            }
        }
        let ident = std::fs::read_to_string(da.path().join("identities.csv")).unwrap();
        assert!(ident.lines().nth(1).unwrap() == CSV_HEADER.join(","));
        assert!(ident.contains("wave-mellin") && ident.contains("resolvent-bip"));
        for f in ["identities.csv", "sea-to-ha.csv", "identities.json"] {
            assert_eq!(std::fs::read(da.path().join(f)).unwrap(), std::fs::read(db.path().join(f)).unwrap());
        }
        let d = compare(&da.path().join("manifest.json"), &db.path().join("manifest.json")).unwrap();
        assert!(d.is_identical(), "{d:?}");
    }

    #[test]
    fn compare_lists_mismatches() {
        let da = tempfile::tempdir().unwrap();
        let db = tempfile::tempdir().unwrap();
        run(&config(da.path(), vec![Suite::SeaToHa])).unwrap();
        let mut cb = config(db.path(), vec![Suite::PaleyLittlewood]);
        cb.operator = "diag:(1,3,9)".into();
        run(&cb).unwrap();
        let d = compare(&da.path().join("manifest.json"), &db.path().join("manifest.json")).unwrap();
        assert_ne!(d.operator_a, d.operator_b);
        assert!(!d.only_in_a.is_empty() && !d.only_in_b.is_empty());
        let mut text = std::fs::read_to_string(db.path().join("manifest.json")).unwrap();
        text = text.replace("\"schema_version\": 1", "\"schema_version\": 99");
        std::fs::write(db.path().join("manifest.json"), text).unwrap();
        assert!(matches!(
            compare(&da.path().join("manifest.json"), &db.path().join("manifest.json")),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn suite_errors_are_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path(), vec![Suite::PaleyLittlewood]);
        c.operator = "jordan:(1,3)".into();
        let m = run(&c).unwrap();
        assert!(m.suites[0].error.as_deref().unwrap().contains("eigendecomposition"));
        assert!(m.passed);
    }
}
