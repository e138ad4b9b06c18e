use std::fs;
use std::path::Path;
use std::time::Instant;

use super::config::{Command, RunSpec};
use super::report::{
    emit_plot_data, AnalysisSummary, BasisRow, CurveSummary, ExportSummary, OptimizeSummary, RunInfo, RunReport, Verdict,
};
use super::validate::validation_table;
use super::write_atomic;
use crate::analysis::{
    analyze_point, fault_tolerance_margin, find_flattop, fit_exponential, linspace, sweep_exchange,
    sweep_refined_if_peaked, ExchangeCurve,
};
use crate::device::{assemble_potential, ControlPoint, DeviceLayout};
use crate::eigen::{build_hamiltonian, lowest_eigenpairs};
use crate::error::{Error, Result};
use crate::optimize::{optimize_design, DesignProblem};
use crate::twoelectron::{basis_convergence, BASIS_STUDY_SIZES};

pub const TOOL_NAME: &str = "sim";

fn sweep(spec: &RunSpec, layout: &DeviceLayout) -> Result<ExchangeCurve> {
    let a = &spec.analysis;
    let v = linspace(0.0, a.v_max, a.v_points);
    let settings = spec.solver.settings();
    if a.refine {
        sweep_refined_if_peaked(layout, &v, &settings)
    } else {
        sweep_exchange(layout, &v, &settings)
    }
}

fn summarize(curve: &ExchangeCurve) -> CurveSummary {
    let positive: Vec<(f64, f64)> = curve.points.iter().copied().filter(|p| p.1 > 0.0).collect();
    CurveSummary {
        fingerprint: curve.fingerprint.clone(),
        v: curve.v(),
        j_uev: curve.j(),
        exponential_fit: fit_exponential(&positive).ok(),
        flattop: find_flattop(curve).ok(),
    }
}

fn analyze(spec: &RunSpec, layout: &DeviceLayout, curve: &ExchangeCurve) -> Result<AnalysisSummary> {
    let a = &spec.analysis;
    let (v0, source) = match a.operating_point {
        Some(v) => (v, "configured"),
        None => (find_flattop(curve)?.v_star, "flat-top"),
    };
    let point = analyze_point(curve, v0, a.delta)?;
    let verdicts = a
        .thresholds
        .iter()
        .map(|&t| {
            let (passes, margin) = fault_tolerance_margin(point.rms_relative_error, t)?;
            Ok(Verdict {
                threshold: t,
                passes,
                margin,
            })
        })
        .collect::<Result<_>>()?;
    let settings = spec.solver.settings();
    let mut sizes = BASIS_STUDY_SIZES.to_vec();
    if !sizes.contains(&settings.basis_size) {
        sizes.push(settings.basis_size);
    }
    let grid = assemble_potential(layout, ControlPoint::new(v0)?, settings.nx, settings.ny)?;
    let basis_convergence = basis_convergence(&grid, &layout.material, &settings, &sizes)?
        .into_iter()
        .map(|(basis_size, j_uev)| BasisRow { basis_size, j_uev })
        .collect();
    Ok(AnalysisSummary {
        operating_point: source.into(),
        point,
        verdicts,
        basis_convergence,
    })
}

fn export(spec: &RunSpec, layout: &DeviceLayout, out: &Path) -> Result<ExportSummary> {
    let e = &spec.export;
    let s = spec.solver.settings();
    let grid = assemble_potential(layout, ControlPoint::new(e.v)?, s.nx, s.ny)?;
    write_atomic(&out.join("potential.txt"), grid.to_text().as_bytes())?;
    let mut files = vec!["potential.txt".to_owned()];
    let mut energies = Vec::new();
    if e.orbitals > 0 {
        let h = build_hamiltonian(&grid, &layout.material)?;
        let orbitals = lowest_eigenpairs(&h, e.orbitals, &s.eigen)?;
        for i in 0..orbitals.len() {
            let name = format!("orbital_{i}.txt");
            write_atomic(&out.join(&name), orbitals.orbital_text(i).as_bytes())?;
            files.push(name);
        }
        energies = orbitals.energies;
    }
    Ok(ExportSummary {
        v: e.v,
        files,
        potential_min_mev: grid.min(),
        potential_max_mev: grid.max(),
        orbital_energies_mev: energies,
    })
}

/// Executes `spec` and writes its outputs into `spec.output_dir`:
/// `spec.toml` (the canonical spec, whose SHA-256 is the fingerprint),
/// `report.toml` and the command's data files. Every file is written
/// atomically.
///
/// A `validate` run whose checks fail still returns `Ok`; inspect
/// `report.validation`. An infeasible optimization writes its trace before
/// returning [`Error::Infeasible`].
pub fn run(spec: &RunSpec) -> Result<RunReport> {
    let start = Instant::now();
    spec.validate()?;
    let layout = spec.layout.resolve()?;
    let out = spec.output_dir.as_path();
    fs::create_dir_all(out)?;
    write_atomic(&out.join("spec.toml"), spec.canonical_toml().as_bytes())?;

    let mut report = RunReport {
        run: RunInfo {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: spec.command.name().into(),
            layout: layout.name.clone(),
            fingerprint: spec.fingerprint(),
            wall_time_s: 0.0,
        },
        curve: None,
        analysis: None,
        optimize: None,
        validation: None,
        export: None,
    };

    match spec.command {
        Command::Sweep => {
            report.curve = Some(summarize(&sweep(spec, &layout)?));
        }
        Command::Analyze => {
            let curve = sweep(spec, &layout)?;
            let analysis = analyze(spec, &layout, &curve)?;
            write_atomic(&out.join("basis_convergence.csv"), analysis.basis_csv().as_bytes())?;
            report.analysis = Some(analysis);
            report.curve = Some(summarize(&curve));
        }
        Command::Optimize => {
            let o = spec.optimize.as_ref().expect("validated spec has an optimize section");
            let params = o.parameters.iter().map(|p| p.to_parameter()).collect::<Result<Vec<_>>>()?;
            let mut problem = DesignProblem::new(layout.clone(), params, o.j_min, o.budget)?;
            problem.delta = spec.analysis.delta;
            problem.solver = spec.solver.settings();
            let names: Vec<String> = problem.parameters.iter().map(|p| p.name.clone()).collect();
            match optimize_design(&problem) {
                Ok(result) => {
                    write_atomic(&out.join("trace.csv"), result.trace_csv().as_bytes())?;
                    report.optimize = Some(OptimizeSummary::from(&result));
                }
                Err(Error::Infeasible { trace }) => {
                    let partial = crate::optimize::DesignResult {
                        parameter_names: names,
                        best_parameters: vec![],
                        best_omega_effective: f64::NAN,
                        j_star_uev: f64::NAN,
                        termination: crate::optimize::Termination::Budget,
                        trace,
                    };
                    write_atomic(&out.join("trace.csv"), partial.trace_csv().as_bytes())?;
                    return Err(Error::Infeasible { trace: partial.trace });
                }
                Err(e) => return Err(e),
            }
        }
        Command::Validate => {
            let table = validation_table(&spec.validate)?;
            write_atomic(&out.join("validation.csv"), table.to_csv().as_bytes())?;
            report.validation = Some(table);
        }
        Command::ExportPotential => {
            report.export = Some(export(spec, &layout, out)?);
        }
    }

    if report.curve.is_some() {
        emit_plot_data(&report, out)?;
    }
    report.run.wall_time_s = start.elapsed().as_secs_f64();
    write_atomic(&out.join("report.toml"), report.to_toml()?.as_bytes())?;
    Ok(report)
}
