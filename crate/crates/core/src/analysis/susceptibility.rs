use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::curve::ExchangeCurve;
use super::flattop::swap_time;
use crate::error::{Error, Result};

/// Relative control-voltage error ΔV/V used when none is given.
pub const DEFAULT_DELTA: f64 = 0.01;

/// Simpson nodes across the ±δ window.
pub const SIMPSON_NODES: usize = 401;

/// Pointwise susceptibility Ω = |(V/J)·∂J/∂V| at `v0`.
///
/// V is the applied control swing `v·|on − off|`, so the swing cancels and
/// Ω = |v·J′(v)/J(v)|. The derivative and value come from a least-squares
/// quadratic through the five samples nearest `v0`.
pub fn susceptibility(curve: &ExchangeCurve, v0: f64) -> Result<f64> {
    Ok(log_sensitivity(curve, v0)?.abs())
}

/// Signed v·J′/J at `v0`; changes sign at a flat-top. Same local fit as
/// [`susceptibility`].
pub fn log_sensitivity(curve: &ExchangeCurve, v0: f64) -> Result<f64> {
    let (lo, hi) = curve.domain();
    if !(v0 > lo && v0 < hi) {
        return Err(Error::Domain(format!("v0 = {v0} is not interior to [{lo}, {hi}]")));
    }
    let mut nearest: Vec<usize> = (0..curve.len()).collect();
    nearest.sort_by(|&a, &b| {
        let da = (curve.points[a].0 - v0).abs();
        let db = (curve.points[b].0 - v0).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    nearest.truncate(5);
    nearest.sort_unstable();

    let scale = nearest
        .iter()
        .map(|&i| (curve.points[i].0 - v0).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for &i in &nearest {
        let (v, j) = curve.points[i];
        let t = (v - v0) / scale;
        let row = Vector3::new(1.0, t, t * t);
        ata += row * row.transpose();
        atb += row * j;
    }
    let c = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::Fit("degenerate local quadratic fit".into()))?;
    let j0 = c[0];
    if !(j0 > 0.0) {
        return Err(Error::UndefinedSusceptibility { v0, j: j0 });
    }
    let slope = c[1] / scale;
    Ok(v0 * slope / j0)
}

/// RMS relative deviation std(J)/mean(J) for v uniform on v0·(1 ± δ).
///
/// J between samples comes from local cubic interpolation; the moments use
/// composite Simpson quadrature on [`SIMPSON_NODES`] nodes.
pub fn rms_coupling_error(curve: &ExchangeCurve, v0: f64, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) || !delta.is_finite() || !v0.is_finite() {
        return Err(Error::InvalidInput(format!("delta must be finite and non-negative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    let a = v0 * (1.0 - delta);
    let b = v0 * (1.0 + delta);
    let (lo, hi) = curve.domain();
    let slack = 1e-12 * (hi - lo);
    if a.min(b) < lo - slack || a.max(b) > hi + slack {
        return Err(Error::Domain(format!(
            "window [{}, {}] leaves the sampled range [{lo}, {hi}]",
            a.min(b),
            a.max(b)
        )));
    }
    let n = SIMPSON_NODES;
    let h = (b - a) / (n - 1) as f64;
    let values = (0..n)
        .map(|i| curve.interpolate((a + i as f64 * h).clamp(lo, hi)))
        .collect::<Result<Vec<_>>>()?;
    let weight = |i: usize| {
        if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    // the window length is (n − 1)·h, so the mean is Σw·f / (3(n − 1))
    let norm = 3.0 * (n - 1) as f64;
    let mean = values.iter().enumerate().map(|(i, f)| weight(i) * f).sum::<f64>() / norm;
    if !(mean > 0.0) {
        return Err(Error::UndefinedSusceptibility { v0, j: mean });
    }
    let var = values
        .iter()
        .enumerate()
        .map(|(i, f)| weight(i) * (f - mean) * (f - mean))
        .sum::<f64>()
        / norm;
    Ok(var.max(0.0).sqrt() / mean)
}

/// (passes, margin) for an error rate against a threshold: passes when
/// `error < threshold`, margin = error / threshold.
pub fn fault_tolerance_margin(rms_relative_error: f64, threshold: f64) -> Result<(bool, f64)> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidInput(format!("threshold must be positive, got {threshold}")));
    }
    Ok((rms_relative_error < threshold, rms_relative_error / threshold))
}

/// Error budget at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityReport {
    pub v0: f64,
    pub j0_uev: f64,
    pub omega_pointwise: f64,
    pub delta: f64,
    pub rms_relative_error: f64,
    /// rms_relative_error / delta.
    pub omega_effective: f64,
    pub fault_tolerant_1e4: bool,
    pub margin_1e4: f64,
    pub fault_tolerant_1e3: bool,
    pub margin_1e3: f64,
    pub swap_time_ns: f64,
}

/// Builds the full [`SusceptibilityReport`] at `v0` for relative error `delta > 0`.
pub fn analyze_point(curve: &ExchangeCurve, v0: f64, delta: f64) -> Result<SusceptibilityReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    let j0 = curve.interpolate(v0)?;
    let omega_pointwise = susceptibility(curve, v0)?;
    let rms = rms_coupling_error(curve, v0, delta)?;
    let (ok4, m4) = fault_tolerance_margin(rms, 1e-4)?;
    let (ok3, m3) = fault_tolerance_margin(rms, 1e-3)?;
    Ok(SusceptibilityReport {
        v0,
        j0_uev: j0,
        omega_pointwise,
        delta,
        rms_relative_error: rms,
        omega_effective: rms / delta,
        fault_tolerant_1e4: ok4,
        margin_1e4: m4,
        fault_tolerant_1e3: ok3,
        margin_1e3: m3,
        swap_time_ns: swap_time(j0)?,
    })
}
