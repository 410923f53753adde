//! Stability report types and their JSON / CSV serialization.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::direct_method::{ConvergenceCheck, IterationTrace, SeriesSum};
use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::ortho::GroupPoint;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSummary {
    pub epsilon: f64,
    pub pairs_checked: usize,
    /// All diagonal derivation pairs are related on the sampled box. When
    /// false the derivation is vacuous at the diagonal.
    pub diagonal_derivation: bool,
    /// Bound on `‖f(0)‖`.
    pub f0_bound: f64,
    /// Bound on `‖f(2x) − f(−2x)‖` (additive) or `‖f(2λx) − 4λ²f(x)‖` (quadratic).
    pub derived_bound: f64,
    pub derived_bound_label: String,
}

/// The non-strict or strict parameter condition stated with the theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatedCondition {
    pub expression: String,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub stated: StatedCondition,
    pub lemma: ConvergenceCheck,
    pub alpha: Rational,
    pub gamma: Rational,
    pub omega: i64,
}

/// Lemma coefficients next to the specialized closed form printed with the
/// theorem, for `n = 1..=4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientComparison {
    pub n: usize,
    pub lemma_a: Rational,
    pub lemma_b: Rational,
    pub printed_a: Rational,
    pub printed_b: Rational,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    /// One-step defect constant `C`.
    pub c: f64,
    /// `C / ε`.
    pub defect_factor: f64,
    /// `C / ε` as an exact rational, available when `β = 1`.
    pub defect_factor_exact: Option<Rational>,
    pub s: f64,
    /// `C (S + 1)`; the asserted bound.
    pub bound: f64,
    /// Series built from the printed specialized coefficients.
    pub printed_series: f64,
    /// Bound evaluated with the printed series. Reported, not asserted.
    pub printed_bound: f64,
    pub coefficient_comparison: Vec<CoefficientComparison>,
    pub coefficients_differ: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub image_points: usize,
    pub max_fg_distance_on_image_set: f64,
    pub argmax_point: Option<GroupPoint>,
    pub max_step_norm: f64,
    pub steps_checked: usize,
    pub step_bound_violations: usize,
    pub h_difference_violations: usize,
    pub iterations: usize,
    /// Iteration trace at `argmax_point`.
    pub trace: Option<IterationTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub pairs_checked: usize,
    pub max_equation_residual: f64,
    pub residual_tol: f64,
    /// Traced `(pair, n)` where the iterate residual exceeds
    /// `(|A_n|^β + |B_n|^β) ε + 1e−9`.
    pub per_n_bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureEntry {
    pub code: String,
    pub message: String,
}

impl From<&Error> for FailureEntry {
    fn from(e: &Error) -> Self {
        FailureEntry {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassFlags {
    /// `max_fg_distance_on_image_set ≤ bound + stop.tol`.
    pub bound_respected: bool,
    pub residual_ok: bool,
    pub steps_within_envelope: bool,
    pub all: bool,
    pub failure: Option<FailureEntry>,
}

impl PassFlags {
    pub fn failed(err: &Error) -> Self {
        PassFlags {
            bound_respected: false,
            residual_ok: false,
            steps_within_envelope: false,
            all: false,
            failure: Some(err.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

/// Result of one stability pipeline run, before it is wrapped with the
/// configuration and timing.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOutcome {
    pub defect: DefectSummary,
    pub conditions: ConditionSummary,
    pub series: SeriesSum,
    pub bound: BoundSummary,
    pub distances: DistanceSummary,
    pub residuals: ResidualSummary,
    pub pass: PassFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityReport {
    pub config: ExperimentConfig,
    pub defect: Option<DefectSummary>,
    pub conditions: Option<ConditionSummary>,
    pub series: Option<SeriesSum>,
    pub bound: Option<BoundSummary>,
    pub distances: Option<DistanceSummary>,
    pub residuals: Option<ResidualSummary>,
    pub pass: PassFlags,
    pub timing: Timing,
}

impl StabilityReport {
    /// 0 when every check passed, 1 when a bound or residual check failed (or
    /// the run aborted), 2 for invalid parameters.
    pub fn exit_code(&self) -> i32 {
        match &self.pass.failure {
            Some(f) if is_parameter_code(&f.code) => 2,
            Some(_) => 1,
            None if self.pass.all => 0,
            None => 1,
        }
    }
}

fn is_parameter_code(code: &str) -> bool {
    matches!(
        code,
        "invalid-argument"
            | "dimension-mismatch"
            | "invalid-M"
            | "invalid-lambda"
            | "condition-violation"
            | "parse"
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Parse {
                what: "report format",
                input: s.to_string(),
            }),
        }
    }
}

pub const TRACE_COLUMNS: [&str; 7] = ["n", "A_num", "A_den", "B_num", "B_den", "step_norm", "h_value"];

/// Writes the trace as CSV; an absent step norm is an empty cell.
pub fn write_trace_csv<W: Write>(trace: Option<&IterationTrace>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for row in trace.map(|t| t.rows.as_slice()).unwrap_or_default() {
        w.write_record([
            row.n.to_string(),
            row.a.numer().to_string(),
            row.a.denom().to_string(),
            row.b.numer().to_string(),
            row.b.denom().to_string(),
            row.step_norm.map(|s| format!("{s:e}")).unwrap_or_default(),
            format!("{:e}", row.h_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_to<W: Write>(report: &StabilityReport, format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n")?;
            Ok(())
        }
        ReportFormat::Csv => write_trace_csv(
            report.distances.as_ref().and_then(|d| d.trace.as_ref()),
            out,
        ),
    }
}

pub fn write_report(report: &StabilityReport, path: &Path, format: ReportFormat) -> Result<()> {
    let file = fs::File::create(path)?;
    write_report_to(report, format, std::io::BufWriter::new(file))
}

pub fn read_report(path: &Path) -> Result<StabilityReport> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
