use super::ci::{build_ci_sectors, diagonalize_ci, TwoElectronSpectrum};
use super::coulomb::{CoulombKernel, CoulombTensor};
use super::hartree_fock::{hartree_fock_refine, HartreeFockSettings};
use crate::device::{MaterialParams, PotentialGrid};
use crate::eigen::{build_hamiltonian, lowest_eigenpairs, EigenSettings, OrbitalSet};
use crate::error::{Error, Result};

/// Numerical settings of one exchange evaluation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverSettings {
    pub nx: usize,
    pub ny: usize,
    /// CI orbital count N.
    pub basis_size: usize,
    pub eigen: EigenSettings,
    /// Mean-field basis refinement; off by default.
    pub hartree_fock: Option<HartreeFockSettings>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            nx: 49,
            ny: 49,
            basis_size: 20,
            eigen: EigenSettings::default(),
            hartree_fock: None,
        }
    }
}

/// CI spectrum for a given orbital basis.
pub fn ci_spectrum(orbitals: &OrbitalSet, kernel: &CoulombKernel) -> Result<TwoElectronSpectrum> {
    let coulomb = CoulombTensor::compute(orbitals, kernel);
    let (singlet, triplet) = build_ci_sectors(orbitals, &coulomb)?;
    Ok(TwoElectronSpectrum::from_energies(diagonalize_ci(&singlet), diagonalize_ci(&triplet)))
}

/// Orbitals → (optional mean-field refinement) → Coulomb tensor → CI → J.
pub fn exchange_splitting(grid: &PotentialGrid, material: &MaterialParams, settings: &SolverSettings) -> Result<TwoElectronSpectrum> {
    exchange_splitting_with(grid, material, &CoulombKernel::from_material(material), settings)
}

/// [`exchange_splitting`] with an explicit interaction kernel.
pub fn exchange_splitting_with(
    grid: &PotentialGrid,
    material: &MaterialParams,
    kernel: &CoulombKernel,
    settings: &SolverSettings,
) -> Result<TwoElectronSpectrum> {
    if settings.basis_size < 2 {
        return Err(Error::InvalidInput("CI basis size must be at least 2".into()));
    }
    let h = build_hamiltonian(grid, material)?;
    let mut orbitals = lowest_eigenpairs(&h, settings.basis_size, &settings.eigen)?;
    if let Some(hf) = &settings.hartree_fock {
        orbitals = hartree_fock_refine(&h, &orbitals, kernel, hf, &settings.eigen)?.orbitals;
    }
    ci_spectrum(&orbitals, kernel)
}

/// Basis sizes of the CI convergence diagnostic.
pub const BASIS_STUDY_SIZES: [usize; 5] = [4, 6, 8, 10, 12];

/// (N, J in μeV) for each basis size, from one orbital solve truncated to
/// each size. Uses the bare orbitals even when `settings` enables
/// Hartree-Fock, so the rows differ only in N.
pub fn basis_convergence(
    grid: &PotentialGrid,
    material: &MaterialParams,
    settings: &SolverSettings,
    sizes: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let largest = sizes.iter().copied().max().unwrap_or(0);
    if sizes.iter().any(|&n| n < 2) {
        return Err(Error::InvalidInput("CI basis size must be at least 2".into()));
    }
    if largest == 0 {
        return Ok(Vec::new());
    }
    let h = build_hamiltonian(grid, material)?;
    let orbitals = lowest_eigenpairs(&h, largest, &settings.eigen)?;
    let kernel = CoulombKernel::from_material(material);
    sizes
        .iter()
        .map(|&n| Ok((n, ci_spectrum(&orbitals.truncated(n), &kernel)?.j_uev)))
        .collect()
}
