//! Experiments around the characterization of an R-bounded `S^α` calculus:
//! the seven operator-family conditions, the `(1)↔(2)` proof constant,
//! Paley–Littlewood frame bounds and the sectorial-to-Hörmander
//! decomposition.

mod calculus;
mod experiments;
mod theorem;

use serde::{Deserialize, Serialize};

pub use calculus::{condition_c1, sobolev_calculus_apply, sobolev_unit_corpus, CorpusSpec};
pub use experiments::{
    general_averaged_check, paley_littlewood_check, sea_to_ha_decomposition, wave_bip_round_trip,
    AveragedCheck, PaleyLittlewood, PaleyLittlewoodConfig, RoundTrip, SeaHaDecomposition,
};
pub use theorem::{
    condition_c2_to_c8, equivalence_report, AngleFit, ConditionValue, Flag, SuiteParams, SuiteReport,
};

/// Outcome column of a report row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Recorded without an assertion.
    Info,
}

impl Verdict {
    pub fn from_check(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

/// One line of the flat report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub operator: String,
    pub suite: String,
    pub condition: String,
    pub param: String,
    pub value: f64,
    pub tolerance: f64,
    pub grid: String,
    pub pass: Verdict,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.75)).collect();
        assert!((log_log_slope(&x, &y) + 0.75).abs() < 1e-12);
    }
}
