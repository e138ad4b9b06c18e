//! Run reports (TOML) and plot data (CSV).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::analysis::{log_sensitivity, ExchangeCurve, ExponentialFit, Flattop, SusceptibilityReport};
use crate::error::{Error, Result};
use crate::optimize::{DesignResult, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub layout: String,
    /// SHA-256 of the canonical spec stored next to the report.
    pub fingerprint: String,
    /// Not part of any hashed or compared payload.
    pub wall_time_s: f64,
}

/// J(v) samples and what was fitted to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    /// Hash of the layout and solver settings behind the samples.
    pub fingerprint: String,
    pub v: Vec<f64>,
    pub j_uev: Vec<f64>,
    /// Exponential fit over the samples with J > 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponential_fit: Option<ExponentialFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flattop: Option<Flattop>,
}

impl CurveSummary {
    pub fn curve(&self) -> Result<ExchangeCurve> {
        if self.v.len() != self.j_uev.len() {
            return Err(Error::InvalidInput("curve columns differ in length".into()));
        }
        ExchangeCurve::new(self.v.iter().copied().zip(self.j_uev.iter().copied()).collect(), self.fingerprint.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub threshold: f64,
    pub passes: bool,
    /// rms error / threshold.
    pub margin: f64,
}

/// J at the operating point for one CI basis size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisRow {
    pub basis_size: usize,
    pub j_uev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    /// "flat-top" or "configured".
    pub operating_point: String,
    pub point: SusceptibilityReport,
    pub verdicts: Vec<Verdict>,
    /// CI convergence diagnostic at the operating point.
    pub basis_convergence: Vec<BasisRow>,
}

impl AnalysisSummary {
    /// `basis_size,J_ueV`
    pub fn basis_csv(&self) -> String {
        let mut out = String::from("basis_size,J_ueV\n");
        for r in &self.basis_convergence {
            let _ = writeln!(out, "{},{:.16e}", r.basis_size, r.j_uev);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSummary {
    pub parameter_names: Vec<String>,
    pub initial_parameters: Vec<f64>,
    pub initial_omega_effective: f64,
    pub initial_feasible: bool,
    pub best_parameters: Vec<f64>,
    pub best_omega_effective: f64,
    pub j_star_uev: f64,
    pub termination: Termination,
    pub evaluations: usize,
    pub feasible_evaluations: usize,
}

impl From<&DesignResult> for OptimizeSummary {
    fn from(r: &DesignResult) -> Self {
        let first = &r.trace[0];
        Self {
            parameter_names: r.parameter_names.clone(),
            initial_parameters: first.parameters.clone(),
            initial_omega_effective: first.omega_effective,
            initial_feasible: first.feasible,
            best_parameters: r.best_parameters.clone(),
            best_omega_effective: r.best_omega_effective,
            j_star_uev: r.j_star_uev,
            termination: r.termination,
            evaluations: r.trace.len(),
            feasible_evaluations: r.trace.iter().filter(|e| e.feasible).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub check: String,
    pub value: f64,
    pub reference: f64,
    /// What `value` is compared against `reference` with.
    pub criterion: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationTable {
    pub all_passed: bool,
    pub rows: Vec<ValidationRow>,
}

impl ValidationTable {
    pub fn new(rows: Vec<ValidationRow>) -> Self {
        Self {
            all_passed: rows.iter().all(|r| r.passed),
            rows,
        }
    }

    /// `check,value,reference,criterion,passed`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,value,reference,criterion,passed\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.16e},{:.16e},{},{}", r.check, r.value, r.reference, r.criterion, r.passed);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub v: f64,
    pub files: Vec<String>,
    pub potential_min_mev: f64,
    pub potential_max_mev: f64,
    pub orbital_energies_mev: Vec<f64>,
}

/// Everything a run produced. Serialized as `report.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run: RunInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export: Option<ExportSummary>,
}

impl RunReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidInput(format!("report does not serialize: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The report with the wall time zeroed, for comparing runs.
    pub fn payload(&self) -> Self {
        let mut r = self.clone();
        r.run.wall_time_s = 0.0;
        r
    }
}

/// `v,omega` where omega is the signed logarithmic slope v·J′/J at each
/// interior sample. Samples where it is undefined (J ≤ 0 locally) are
/// left out.
pub fn omega_csv(curve: &ExchangeCurve) -> String {
    let mut out = String::from("v,omega\n");
    let n = curve.len();
    for &(v, _) in &curve.points[1..n - 1] {
        if let Ok(w) = log_sensitivity(curve, v) {
            let _ = writeln!(out, "{v:.16e},{w:.16e}");
        }
    }
    out
}

const PLOT_README: &str = "\
Plot data

curve.csv  columns v, J_ueV
  v      normalized control voltage; 0 is the off configuration, 1 the on configuration
  J_ueV  exchange splitting E_triplet - E_singlet in micro-electronvolts

omega.csv  columns v, omega
  omega  signed logarithmic slope v * dJ/dv / J; its magnitude is the pointwise
         susceptibility. It crosses zero at a flat-top. Rows where J <= 0 near v
         are omitted.

Plot J_ueV on a log axis to compare with an exponential (barrier-gated) response.
";

/// Writes `curve.csv`, `omega.csv` and `README` into `dir`.
pub fn emit_plot_data(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = report
        .curve
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("report has no curve to plot".into()))?;
    if summary.v.is_empty() {
        return Err(Error::InvalidInput("report curve is empty".into()));
    }
    let curve = summary.curve()?;
    let files = [
        ("curve.csv", curve.to_csv()),
        ("omega.csv", omega_csv(&curve)),
        ("README", PLOT_README.to_owned()),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(curve: Option<CurveSummary>) -> RunReport {
        RunReport {
            run: RunInfo {
                tool: "sim".into(),
                version: "0".into(),
                command: "sweep".into(),
                layout: "t".into(),
                fingerprint: "f".into(),
                wall_time_s: 1.5,
            },
            curve,
            analysis: None,
            optimize: None,
            validation: None,
            export: None,
        }
    }

    #[test]
    fn peaked_curve_omega_changes_sign() {
        let v: Vec<f64> = (0..11).map(|i| i as f64 * 0.11).collect();
        let j: Vec<f64> = v.iter().map(|x| 0.2 * (1.0 - (x - 0.66) * (x - 0.66))).collect();
        let c = ExchangeCurve::new(v.iter().copied().zip(j).collect(), "t").unwrap();
        let text = omega_csv(&c);
        let w: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(w.len(), 9);
        assert!(w[0] > 0.0 && w[8] < 0.0);
        assert!(w[5].abs() < 1e-12);
    }

    #[test]
    fn report_round_trips_and_needs_a_curve_to_plot() {
        let dir = tempfile::tempdir().unwrap();
        let r = report(None);
        assert!(emit_plot_data(&r, dir.path()).is_err());
        let r = report(Some(CurveSummary {
            fingerprint: "x".into(),
            v: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            j_uev: vec![0.1, 0.2, 0.4, 0.8, 1.6],
            exponential_fit: crate::analysis::fit_exponential(&[(0.0, 0.1), (0.5, 0.4), (1.0, 1.6)]).ok(),
            flattop: None,
        }));
        let back = RunReport::from_toml(&r.to_toml().unwrap()).unwrap();
        assert_eq!(back, r);
        let files = emit_plot_data(&r, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert!(csv.starts_with("v,J_ueV\n"));
    }
}
