use rayon::prelude::*;
use serde::Serialize;

use super::curve::ExchangeCurve;
use super::flattop::find_flattop;
use crate::device::{assemble_potential, ControlPoint, DeviceLayout, CONTROL_EPSILON};
use crate::error::{Error, Result};
use crate::io::sha256_hex;
use crate::twoelectron::{exchange_splitting, SolverSettings};

/// Points in the first, uniform stage of an adaptive sweep.
pub const COARSE_POINTS: usize = 11;
/// Points added around the coarse peak in the second stage.
pub const REFINED_POINTS: usize = 7;

/// `n` evenly spaced values from `a` to `b` inclusive; the last one is `b` exactly.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// The full control range [0, 1 + ε] in [`COARSE_POINTS`] steps.
pub fn coarse_grid() -> Vec<f64> {
    linspace(0.0, 1.0 + CONTROL_EPSILON, COARSE_POINTS)
}

/// Content hash of everything that determines J(v).
pub fn device_fingerprint(layout: &DeviceLayout, settings: &SolverSettings) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        settings: &'a SolverSettings,
        layout: &'a DeviceLayout,
    }
    let text = toml::to_string(&Key { settings, layout }).expect("layout and settings serialize");
    sha256_hex(text.as_bytes())
}

fn solve_points(layout: &DeviceLayout, v_values: &[f64], settings: &SolverSettings) -> Result<Vec<(f64, f64)>> {
    for (i, &v) in v_values.iter().enumerate() {
        ControlPoint::new(v)?;
        if i > 0 && !(v > v_values[i - 1]) {
            return Err(Error::InvalidInput(format!(
                "sweep values must increase strictly ({} then {v})",
                v_values[i - 1]
            )));
        }
    }
    layout.validate()?;
    let results: Vec<Result<f64>> = v_values
        .par_iter()
        .map(|&v| {
            let grid = assemble_potential(layout, ControlPoint::new(v)?, settings.nx, settings.ny)?;
            Ok(exchange_splitting(&grid, &layout.material, settings)?.j_uev)
        })
        .collect();
    let mut completed = Vec::new();
    let mut failed = Vec::new();
    for (&v, r) in v_values.iter().zip(results) {
        match r {
            Ok(j) => completed.push((v, j)),
            Err(e) => failed.push((v, e.to_string())),
        }
    }
    if failed.is_empty() {
        Ok(completed)
    } else {
        Err(Error::PartialSweep { completed, failed })
    }
}

/// One exchange evaluation per control value. Points are independent and
/// run in parallel; failures are collected into [`Error::PartialSweep`].
pub fn sweep_exchange(layout: &DeviceLayout, v_values: &[f64], settings: &SolverSettings) -> Result<ExchangeCurve> {
    let points = solve_points(layout, v_values, settings)?;
    ExchangeCurve::new(points, device_fingerprint(layout, settings))
}

/// Second-stage control values: [`REFINED_POINTS`] points spaced at 1/8 of
/// the coarse step around the coarse peak estimate, kept inside the control
/// range and away from existing samples.
pub fn refined_grid(coarse: &ExchangeCurve) -> Vec<f64> {
    let (lo, hi) = coarse.domain();
    let step = (hi - lo) / (coarse.len() - 1) as f64 / 8.0;
    let centre = match find_flattop(coarse) {
        Ok(top) => top.v_star,
        Err(_) => {
            let best = coarse
                .points
                .iter()
                .enumerate()
                .fold(0, |b, (i, p)| if p.1 > coarse.points[b].1 { i } else { b });
            coarse.points[best].0
        }
    };
    let half = (REFINED_POINTS / 2) as f64 * step;
    let centre = centre.clamp(lo + half, hi - half);
    (0..REFINED_POINTS)
        .map(|k| centre + (k as f64 - (REFINED_POINTS / 2) as f64) * step)
        .filter(|v| coarse.points.iter().all(|p| (p.0 - v).abs() > 1e-9))
        .collect()
}

/// Coarse sweep over the full control range followed by a refined cluster
/// around the peak; returns the merged curve.
pub fn adaptive_flattop_sweep(layout: &DeviceLayout, settings: &SolverSettings) -> Result<ExchangeCurve> {
    let coarse = sweep_exchange(layout, &coarse_grid(), settings)?;
    refine(layout, coarse, settings)
}

/// Sweeps `v_values`; if the result has an interior maximum, adds the
/// [`refined_grid`] cluster around it.
pub fn sweep_refined_if_peaked(layout: &DeviceLayout, v_values: &[f64], settings: &SolverSettings) -> Result<ExchangeCurve> {
    let coarse = sweep_exchange(layout, v_values, settings)?;
    if find_flattop(&coarse).is_err() {
        return Ok(coarse);
    }
    refine(layout, coarse, settings)
}

fn refine(layout: &DeviceLayout, coarse: ExchangeCurve, settings: &SolverSettings) -> Result<ExchangeCurve> {
    let extra = refined_grid(&coarse);
    let mut points = coarse.points.clone();
    points.extend(solve_points(layout, &extra, settings)?);
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    ExchangeCurve::new(points, coarse.fingerprint)
}
