use super::coulomb::{Convolver, CoulombKernel};
use crate::eigen::{lowest_eigenpairs, DiscretizedHamiltonian, EigenSettings, OrbitalSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HartreeFockSettings {
    pub max_iter: usize,
    /// Density damping in (0, 1]; 1 takes the new density outright.
    pub mix: f64,
}

impl Default for HartreeFockSettings {
    fn default() -> Self {
        Self { max_iter: 60, mix: 0.5 }
    }
}

/// Orbital energy change below which the mean-field loop stops, meV.
pub const HF_ENERGY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct HartreeFockOutcome {
    pub orbitals: OrbitalSet,
    pub iterations: usize,
}

/// Mean-field refinement of the CI basis.
///
/// Each iteration re-solves the single-particle problem in `V + Φ[ρ]`, where
/// ρ = (|ψ₀|² + |ψ₁|²)/2 (damped) is the charge "the other electron"
/// presents: half the two-electron density with one electron per dot. It
/// depends only on the span of the two lowest orbitals, so a near-degenerate
/// pair swapping character between iterations does not make ρ oscillate.
/// The returned orbitals carry the bare one-body matrix so CI still uses the
/// unscreened Hamiltonian.
pub fn hartree_fock_refine(
    h: &DiscretizedHamiltonian,
    initial: &OrbitalSet,
    kernel: &CoulombKernel,
    settings: &HartreeFockSettings,
    eigen: &EigenSettings,
) -> Result<HartreeFockOutcome> {
    let n = initial.len();
    if n < 2 {
        return Err(Error::InvalidInput("Hartree-Fock refinement needs at least two orbitals".into()));
    }
    if !(settings.mix > 0.0 && settings.mix <= 1.0) {
        return Err(Error::InvalidInput(format!("mix {} outside (0, 1]", settings.mix)));
    }
    let area = initial.geometry.cell_area();
    let convolver = Convolver::new(&h.geometry, kernel);
    let mut rho = pair_density(initial, area);
    let mut energies = initial.energies.clone();
    let mut last_change = f64::INFINITY;
    let mut growing = 0;
    for iteration in 1..=settings.max_iter.max(1) {
        let hartree = convolver.potential(&rho);
        let fock = h.with_extra_potential(&hartree);
        let mut orbitals = lowest_eigenpairs(&fock, n, eigen)?;
        let change = orbitals
            .energies
            .iter()
            .zip(&energies)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        energies.clone_from(&orbitals.energies);
        if change < HF_ENERGY_TOL {
            orbitals.one_body = Some(one_body_matrix(h, &orbitals));
            return Ok(HartreeFockOutcome {
                orbitals,
                iterations: iteration,
            });
        }
        growing = if change > last_change { growing + 1 } else { 0 };
        last_change = change;
        if growing >= 5 {
            return Err(oscillation(iteration, change));
        }
        for (r, p) in rho.iter_mut().zip(pair_density(&orbitals, area)) {
            *r = (1.0 - settings.mix) * *r + settings.mix * p;
        }
    }
    Err(oscillation(settings.max_iter, last_change))
}

fn pair_density(orbitals: &OrbitalSet, area: f64) -> Vec<f64> {
    let w = &orbitals.wavefunctions;
    w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a * a + b * b) * area).collect()
}

fn oscillation(iterations: usize, change: f64) -> Error {
    Error::Convergence {
        what: "Hartree-Fock refinement".into(),
        iterations,
        residual: change,
        hint: "; try a smaller mix".into(),
    }
}

/// ⟨ψᵢ|H|ψⱼ⟩ with the grid measure, symmetrized.
pub(crate) fn one_body_matrix(h: &DiscretizedHamiltonian, orbitals: &OrbitalSet) -> Vec<f64> {
    let n = orbitals.len();
    let area = orbitals.geometry.cell_area();
    let mut hpsi = vec![vec![0.0; h.len()]; n];
    for (w, out) in orbitals.wavefunctions.iter().zip(hpsi.iter_mut()) {
        h.apply(w, out);
    }
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let a: f64 = orbitals.wavefunctions[i].iter().zip(&hpsi[j]).map(|(x, y)| x * y).sum();
            let b: f64 = orbitals.wavefunctions[j].iter().zip(&hpsi[i]).map(|(x, y)| x * y).sum();
            let v = 0.5 * (a + b) * area;
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}
