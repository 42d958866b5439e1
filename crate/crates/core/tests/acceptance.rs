//! Acceptance criteria AC1-AC16, one line each.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails when a criterion outside `KNOWN_RED` fails; criteria in
//! `KNOWN_RED` are evaluated at their stated tolerance and reported as they
//! come out.

use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::time::Instant;

use hormander::operator::{
    family_samples, random_unit_pairs, w_alpha_mellin_identity, wave_mellin_identity, FamilyGrid, FamilyKind,
    SectorialOperator,
};
use hormander::rbound::{r_l1_vs_rbound, r_l2_bound, L2BasisConfig, RSearchConfig, SpaceSpec};
use hormander::run::{run, RunConfig, Suite};
use hormander::spaces::{hoermander_norm, make_partition, sobexp_norm, ClosedForm, GridSpec, PartitionKind, PartitionParams, SampledFunction};
use hormander::special::{
    contour_shifted_integral, f_m, find_lower_bound_constants, gamma_asymptotic_band, gamma_fm,
    wave_kernel_integral, IntegralConfig, LowerBoundSearch, WaveKernelParams, WaveSign,
};
use hormander::suite::{
    condition_c2_to_c8, equivalence_report, log_log_slope, paley_littlewood_check, sea_to_ha_decomposition,
    PaleyLittlewoodConfig, SuiteParams,
};
use hormander::{bracket, Mat, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot hold as stated; see the project notes.
const KNOWN_RED: [&str; 2] = ["AC3", "AC11"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn ac1() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = IntegralConfig::default();
    let mut worst: f64 = 0.0;
    for m in 1..=3u32 {
        for k in 0..20 {
            // Re z across (-m, 0), Im z across [-4, 4]
            let re = -(m as f64) * (0.05 + 0.9 * ((k * 7) % 20) as f64 / 19.0);
            let im = -4.0 + 8.0 * k as f64 / 19.0;
            let z = C64::new(re, im);
            if (re - re.round()).abs() < 1e-9 && im.abs() < 1e-9 {
                continue;
            }
            worst = worst.max(rel(wave_kernel_integral(z, m, &cfg)?, gamma_fm(z, m)?));
        }
    }
    let frullani = wave_kernel_integral(C64::new(-1.0, 0.0), 2, &cfg)?;
    let f_err = (frullani - 2.0 * LN_2).norm();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && f_err <= 1e-6 && secs < 5.0,
        format!("max rel err {worst:.2e} (≤ 1e-8), |I(-1,2) - 2ln2| = {f_err:.2e} (≤ 1e-6), {secs:.2}s (< 5s)"),
    )
}

fn ac2() -> Result<Outcome> {
    let v = contour_shifted_integral(C64::new(-1.0, 0.0), 2, C64::new(0.0, 1.0), &IntegralConfig::default())?;
    let e = rel(v, C64::new(0.0, 2.0 * LN_2));
    outcome(e <= 1e-4, format!("value {v:.8}, rel err {e:.2e} (≤ 1e-4)"))
}

fn ac3() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in [1.0, 1.7] {
        let (lo, hi) = gamma_asymptotic_band(alpha - 0.5, alpha, 1.0, 100.0, 2000)?;
        pass &= hi / lo <= 4.0;
        parts.push(format!("alpha={alpha}: ratio {:.3}", hi / lo));
    }
    outcome(pass, format!("|Γ(-1/2+α+it)| e^(π|t|/2) |t|^α band, {} (≤ 4)", parts.join(", ")))
}

fn pairs_for(op: &SectorialOperator) -> Vec<(hormander::Vector, hormander::Vector)> {
    random_unit_pairs(op.dim(), 20, 0)
}

fn t_grid() -> Vec<f64> {
    (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect()
}

fn ac4() -> Result<Outcome> {
    let start = Instant::now();
    let op = SectorialOperator::preset("diag:(1,2,5,10)")?;
    let params = WaveKernelParams::new(1.0, 2, WaveSign::Minus)?;
    let c = wave_mellin_identity(&op, &params, &pairs_for(&op), &t_grid())?;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        c.max_error <= 1e-3 && secs < 30.0,
        format!("max error {:.2e} (≤ 1e-3) over 20 pairs, {secs:.2}s (< 30s)", c.max_error),
    )
}

fn ac5() -> Result<Outcome> {
    let op = SectorialOperator::preset("diag:(1,2,5,10)")?;
    let c = w_alpha_mellin_identity(&op, 1.7, &pairs_for(&op), &t_grid())?;
    outcome(c.max_error <= 1e-3, format!("max error {:.2e} (≤ 1e-3)", c.max_error))
}

fn ac6() -> Result<Outcome> {
    let want = PI.sqrt();
    let mut parts = Vec::new();
    let mut pass = true;
    for spec in ["diag:(1,2,4)", "diag:(0.01,1,100)", "diag-logspaced:16"] {
        let op = SectorialOperator::preset(spec)?;
        let fam = family_samples(&op, FamilyKind::ImaginaryPowers { alpha: 1.0 }, &FamilyGrid::default())?;
        let v = r_l2_bound(&fam, &SpaceSpec::hilbert(op.dim()), &L2BasisConfig::default())?.value();
        let e = (v / want - 1.0).abs();
        pass &= e <= 0.02;
        parts.push(format!("{spec}: {v:.5} ({:.2}%)", 100.0 * e));
    }
    outcome(pass, format!("{} vs √π, ≤ 2%", parts.join(", ")))
}

fn ac7() -> Result<Outcome> {
    let op = SectorialOperator::preset("diag:(1,2,4)")?;
    let r = equivalence_report(&op, &SpaceSpec::hilbert(3), &SuiteParams::default())?;
    let ratio = r.ratio_c2_c1;
    outcome(
        (0.95..=1.05).contains(&ratio) && r.corpus_size == 200,
        format!("c2/(2π c1) = {ratio:.4} over {} functions (in [0.95, 1.05])", r.corpus_size),
    )
}

fn ac8() -> Result<Outcome> {
    let scalar = SectorialOperator::preset("diag:(1)")?;
    let params = SuiteParams { c3_angles: vec![PI], ..Default::default() };
    let c3 = condition_c2_to_c8(&scalar, &SpaceSpec::hilbert(1), &params)?
        .into_iter()
        .find(|c| c.condition == "c3")
        .map(|c| c.value)
        .unwrap_or(f64::NAN);
    let mut pass = (c3 - 1.0).abs() <= 0.01;
    let mut parts = vec![format!("scalar θ=π bound {c3:.5} (1 ± 1%)")];
    for spec in ["diag-logspaced:16", "diag:(1,3,10,30,100)"] {
        let op = SectorialOperator::preset(spec)?;
        let vals = condition_c2_to_c8(&op, &SpaceSpec::hilbert(op.dim()), &SuiteParams::default())?;
        let (angles, values): (Vec<f64>, Vec<f64>) = vals
            .iter()
            .filter(|c| c.condition == "c3")
            .map(|c| {
                let theta: f64 = c.param.rsplit("theta=").next().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
                (theta.abs(), c.value)
            })
            .unzip();
        let exponent = -log_log_slope(&angles, &values);
        pass &= angles.len() == 4 && exponent <= 1.0;
        parts.push(format!("{spec}: exponent {exponent:.3} (≤ 1)"));
    }
    outcome(pass, parts.join(", "))
}

fn ac9() -> Result<Outcome> {
    let op = SectorialOperator::preset("diag:(1)")?;
    let params = SuiteParams { alpha: 1.0, m: Some(1), ..Default::default() };
    let c7 = condition_c2_to_c8(&op, &SpaceSpec::hilbert(1), &params)?
        .into_iter()
        .find(|c| c.condition == "c7")
        .map(|c| c.value)
        .unwrap_or(f64::NAN);
    let want = (2.0 * PI).sqrt();
    let e = (c7 / want - 1.0).abs();
    outcome(e <= 0.01, format!("c7 = {c7:.5} vs √(2π) = {want:.5} ({:.3}%, ≤ 1%)", 100.0 * e))
}

fn norm_grid() -> GridSpec {
    GridSpec::new(-40.0, 40.0, 8192).unwrap()
}

fn corpus() -> Vec<(&'static str, ClosedForm)> {
    vec![
        ("rho", ClosedForm::Rho { power: 1 }),
        ("exp-rho", ClosedForm::ExpRho),
        ("semigroup-difference", ClosedForm::SemigroupDifference),
        ("gaussian", ClosedForm::Gaussian { center: 0.0, width: 1.0 }),
        ("power-is", ClosedForm::PowerIs { s: 2.0 }),
    ]
}

fn ac10() -> Result<Outcome> {
    let eq = make_partition(PartitionKind::Equidistant, &PartitionParams::default())?;
    let grid = norm_grid();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (_, form) in corpus() {
        let base = hoermander_norm(&SampledFunction::log(grid, |l| form.eval(C64::new(l, 0.0)))?, 1.0, &eq)?.value;
        for lt in [1.0 / 3.0, 1.0, 3.5] {
            let f = SampledFunction::log(grid, |l| form.eval(C64::new(l * f64::exp(lt), 0.0)))?;
            let r = hoermander_norm(&f, 1.0, &eq)?.value / base;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    outcome(lo >= 0.5 && hi <= 2.0, format!("ratios in [{lo:.4}, {hi:.4}] (within [1/2, 2]), 5 functions × 3 dilations"))
}

fn ac11() -> Result<Outcome> {
    let eq = make_partition(PartitionKind::Equidistant, &PartitionParams::default())?;
    let grid = norm_grid();
    let s_values = [1.0, 4.0, 16.0, 64.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.0, 1.5] {
        let mut norms = Vec::new();
        for &s in &s_values {
            let f = SampledFunction::log(grid, |l| ClosedForm::PowerIs { s }.eval(C64::new(l, 0.0)))?;
            norms.push(hoermander_norm(&f, alpha, &eq)?.value);
        }
        let xs: Vec<f64> = s_values.iter().map(|&s| bracket(s)).collect();
        let e = log_log_slope(&xs, &norms);
        pass &= (e - alpha).abs() <= 0.1 * alpha;
        parts.push(format!("alpha={alpha}: exponent {e:.3}"));
    }
    let f = SampledFunction::log(grid, |l| ClosedForm::PowerIs { s: 1.0 }.eval(C64::new(l, 0.0)))?;
    let divergent = sobexp_norm(&f, 1.0)?.divergent;
    pass &= divergent;
    outcome(pass, format!("{} (within 10%), S-norm divergent: {divergent}", parts.join(", ")))
}

fn ac12() -> Result<Outcome> {
    let start = Instant::now();
    // 32 eigenvalues over [1, 64): six dyadic blocks
    let n = 32;
    let a = Mat::from_fn(n, n, |i, j| if i == j { C64::new(2f64.powf(6.0 * i as f64 / n as f64), 0.0) } else { C64::new(0.0, 0.0) });
    let op = SectorialOperator::from_matrix("diag-dyadic:32", a)?;
    let cfg = PaleyLittlewoodConfig { trials: 100, ..Default::default() };
    let r = paley_littlewood_check(&op, &SpaceSpec::hilbert(n), &cfg)?;
    let secs = start.elapsed().as_secs_f64();
    let spread = r.upper_ratio / r.lower_ratio;
    outcome(
        r.lower_ratio >= 0.1 && r.upper_ratio <= 10.0 && spread <= 10.0 && secs < 60.0,
        format!(
            "ratios in [{:.4}, {:.4}], max/min {spread:.3} (≤ 10), {} blocks, {secs:.2}s (< 60s)",
            r.lower_ratio,
            r.upper_ratio,
            r.blocks.len()
        ),
    )
}

fn ac13() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.0, 1.7] {
        let beta = 0.5 - alpha;
        for m in [2u32, 3] {
            let c = find_lower_bound_constants(m, beta, &LowerBoundSearch::default())?;
            // independent re-verification on 10^4 points
            let (a, b) = c.window;
            let mut min_sum = f64::INFINITY;
            for i in 0..10_000 {
                let t = a + (b - a) * i as f64 / 9_999.0;
                let mut s = 0.0;
                for k in -(c.n as i64)..=(c.n as i64) {
                    s += f_m(C64::new(beta, t + k as f64 * c.delta), m)?.norm();
                }
                min_sum = min_sum.min(s);
            }
            let ok = min_sum >= c.epsilon && c.n as f64 > c.c / c.delta;
            pass &= ok;
            parts.push(format!(
                "m={m},α={alpha}: (C,ε,δ,N)=({:.3},{:.3e},{:.3},{}) min sum {min_sum:.3e}",
                c.c, c.epsilon, c.delta, c.n
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn ac14() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut pass = true;
    let mut parts = Vec::new();
    for (fam, size) in [2usize, 3, 3].into_iter().enumerate() {
        let ops: Vec<Mat> = (0..size)
            .map(|_| Mat::from_fn(4, 4, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
            .collect();
        for p in [2.0, 1.0] {
            let cmp = r_l1_vs_rbound(&ops, &SpaceSpec::new(p, 4)?, &RSearchConfig::default())?;
            let (r, r1) = (cmp.r.value(), cmp.r_l1.value());
            pass &= r1 <= 2.0 * r * 1.05 && r <= r1 * 1.05;
            parts.push(format!("F{fam} p={p}: R={r:.4} R_L1={r1:.4}"));
        }
    }
    outcome(pass, format!("{} (R_L1 ≤ 2.1 R, R ≤ 1.05 R_L1)", parts.join(", ")))
}

fn ac15() -> Result<Outcome> {
    let xs = [1e-1, 1e-2, 1e-3];
    let mut norms = Vec::new();
    let mut g_max: f64 = 0.0;
    for &x in &xs {
        let d = sea_to_ha_decomposition(C64::new(x, (1.0 - x * x).sqrt()))?;
        norms.push(d.h_norm);
        g_max = g_max.max(d.g_sup);
    }
    let slope = log_log_slope(&xs, &norms);
    outcome(
        (-1.2..=-0.8).contains(&slope) && g_max <= 1.0 + 1e-9,
        format!("slope {slope:.4} (in [-1.2, -0.8]), sup |g_z| ≤ {g_max:.6} (≤ 1)"),
    )
}

fn ac16() -> Result<Outcome> {
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    let start = Instant::now();
    let mut manifests = Vec::new();
    for d in &dirs {
        let cfg = RunConfig {
            suites: Suite::ALL.to_vec(),
            output_dir: d.path().to_path_buf(),
            ..RunConfig::from_json(r#"{"operator": "diag-logspaced:16"}"#)?
        };
        manifests.push(run(&cfg)?);
    }
    let secs = start.elapsed().as_secs_f64() / 2.0;
    let errors: Vec<String> = manifests[0].suites.iter().filter_map(|s| s.error.clone()).collect();
    let mut identical = true;
    let mut files = 0;
    for s in &manifests[0].suites {
        for f in &s.files {
            files += 1;
            identical &= read(dirs[0].path(), f)? == read(dirs[1].path(), f)?;
        }
    }
    outcome(
        errors.is_empty() && identical && files > 0 && secs < 300.0,
        format!(
            "{files} report files byte-identical: {identical}, suite errors: {}, {secs:.1}s per run (< 300s)",
            errors.len()
        ),
    )
}

fn read(dir: &Path, f: &str) -> Result<Vec<u8>> {
    Ok(std::fs::read(dir.join(f))?)
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 16] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
        ("AC11", ac11),
        ("AC12", ac12),
        ("AC13", ac13),
        ("AC14", ac14),
        ("AC15", ac15),
        ("AC16", ac16),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_RED.contains(&id);
        let mark = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{id:<5} {mark:<13} {detail}");
        if !pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
