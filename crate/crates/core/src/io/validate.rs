//! Oracle checks behind the `validate` command.
//!
//! Each check compares a solver result with something known independently:
//! a closed form, an exact spectrum or the brute-force two-electron solver.

use super::config::ValidateSpec;
use super::report::{ValidationRow, ValidationTable};
use crate::analysis::{fault_tolerance_margin, swap_time, J_FLOOR_UEV};
use crate::device::{model_double_well, MaterialParams, Rect};
use crate::eigen::{build_hamiltonian, lowest_eigenpairs, EigenSettings};
use crate::error::Result;
use crate::twoelectron::{
    brute_force_two_electron, ci_spectrum, hubbard_exchange, hubbard_exchange_closed_form, CoulombKernel,
};
use crate::units::UEV_PER_MEV;

/// Side of the square domain used for the harmonic-well checks, nm.
pub const HARMONIC_DOMAIN_NM: f64 = 240.0;
/// Grid of the harmonic-well energy check.
pub const HARMONIC_GRID: usize = 161;
/// Grids of the convergence-order estimate; each halves the spacing.
pub const CONVERGENCE_GRIDS: [usize; 3] = [40, 81, 163];

fn row(check: &str, value: f64, reference: f64, criterion: &str, passed: bool) -> ValidationRow {
    ValidationRow {
        check: check.into(),
        value,
        reference,
        criterion: criterion.into(),
        passed,
    }
}

fn relative(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Lowest `k` energies (meV) of the single well with level spacing `hw`.
pub fn harmonic_energies(hw: f64, n: usize, k: usize) -> Result<Vec<f64>> {
    let material = MaterialParams::silicon();
    let half = 0.5 * HARMONIC_DOMAIN_NM;
    let domain = Rect::new(-half, half, -half, half)?;
    let grid = model_double_well(0.0, hw, 1.0, &material, &domain, n, n)?;
    let h = build_hamiltonian(&grid, &material)?;
    Ok(lowest_eigenpairs(&h, k, &EigenSettings::default())?.energies)
}

/// Observed order log₂(e_h / e_{h/2}) of the ground-state error, averaged
/// over the two successive halvings of [`CONVERGENCE_GRIDS`].
pub fn convergence_order(hw: f64) -> Result<f64> {
    let errors = CONVERGENCE_GRIDS
        .iter()
        .map(|&n| Ok((harmonic_energies(hw, n, 1)?[0] - hw).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let p1 = (errors[0] / errors[1]).log2();
    let p2 = (errors[1] / errors[2]).log2();
    Ok(0.5 * (p1 + p2))
}

/// (CI J, brute-force J) in μeV on the model double well, with the Coulomb
/// strength scaled by `strength`.
pub fn double_well_exchange(spec: &ValidateSpec, basis: usize, strength: f64) -> Result<(f64, f64, f64)> {
    let material = MaterialParams::silicon();
    let d = spec.half_width;
    let domain = Rect::new(-d, d, -d, d)?;
    let grid = model_double_well(spec.separation, spec.confinement, 1.0, &material, &domain, spec.grid_points, spec.grid_points)?;
    let kernel = CoulombKernel::from_material(&material).scaled(strength);
    let h = build_hamiltonian(&grid, &material)?;
    let orbitals = lowest_eigenpairs(&h, basis, &EigenSettings::default())?;
    let ci = ci_spectrum(&orbitals, &kernel)?.j_uev;
    let exact = brute_force_two_electron(&grid, &material, &kernel)?.j_uev;
    let gap = (orbitals.energies[1] - orbitals.energies[0]) * UEV_PER_MEV;
    Ok((ci, exact, gap))
}

/// Runs every check. Fails only on solver errors; a failed comparison is a
/// row with `passed = false`.
pub fn validation_table(spec: &ValidateSpec) -> Result<ValidationTable> {
    let mut rows = Vec::new();

    let tau = swap_time(0.4)?;
    rows.push(row("swap-time-0.4ueV-ns", tau, 5.0, "in [4.9, 5.4]", (4.9..=5.4).contains(&tau)));

    let (ok4, m4) = fault_tolerance_margin(5e-4, 1e-4)?;
    rows.push(row("margin-5e-4-vs-1e-4", m4, 5.0, "exact, fails", !ok4 && m4 == 5.0));
    let (ok3, m3) = fault_tolerance_margin(5e-4, 1e-3)?;
    rows.push(row("margin-5e-4-vs-1e-3", m3, 0.5, "exact, passes", ok3 && m3 == 0.5));

    let mut worst: f64 = 0.0;
    for (t, u) in [(0.1, 5.0), (1.0, 1.0), (0.01, 20.0), (3.0, 0.5)] {
        worst = worst.max(relative(hubbard_exchange(t, u)?, hubbard_exchange_closed_form(t, u)));
    }
    rows.push(row("hubbard-two-site-rel-error", worst, 0.0, "<= 1e-10", worst <= 1e-10));

    let hw = spec.confinement;
    let e = harmonic_energies(hw, HARMONIC_GRID, 3)?;
    for (i, (&got, n)) in e.iter().zip([1.0, 2.0, 2.0]).enumerate() {
        let want = hw * n;
        rows.push(row(
            &format!("harmonic-level-{i}-meV"),
            got,
            want,
            "relative error <= 5e-3",
            relative(got, want) <= 5e-3,
        ));
    }
    let p = convergence_order(hw)?;
    rows.push(row("grid-convergence-order", p, 2.0, "in [1.7, 2.3]", (1.7..=2.3).contains(&p)));

    let (ci, exact, _) = double_well_exchange(spec, 8, 1.0)?;
    rows.push(row("ci-vs-brute-force-J-ueV", ci, exact, "relative error <= 5e-2", relative(ci, exact) <= 5e-2));
    rows.push(row("singlet-ground-J-ueV", ci, J_FLOOR_UEV, ">= reference", ci >= J_FLOOR_UEV));

    let (ci0, exact0, gap) = double_well_exchange(spec, 8, 0.0)?;
    rows.push(row("non-interacting-ci-J-ueV", ci0, gap, "relative error <= 1e-9", relative(ci0, gap) <= 1e-9));
    rows.push(row(
        "non-interacting-brute-force-J-ueV",
        exact0,
        gap,
        "relative error <= 1e-6",
        relative(exact0, gap) <= 1e-6,
    ));

    Ok(ValidationTable::new(rows))
}
