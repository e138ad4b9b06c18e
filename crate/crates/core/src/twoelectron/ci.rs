use nalgebra::DMatrix;

use super::coulomb::CoulombTensor;
use crate::eigen::OrbitalSet;
use crate::error::{Error, Result};
use crate::units::UEV_PER_MEV;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinSector {
    Singlet,
    Triplet,
}

/// One spin sector of the two-electron CI problem.
///
/// The basis holds spatial pair functions
/// Φ±_ab = (ψ_a ψ_b ± ψ_b ψ_a)/norm, with a ≤ b for the singlet and a < b for
/// the triplet.
#[derive(Debug, Clone)]
pub struct CISector {
    pub sector: SpinSector,
    pub basis: Vec<(usize, usize)>,
    pub hamiltonian: DMatrix<f64>,
}

impl CISector {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Singlet and triplet energies with J = (E_T0 − E_S0) in μeV.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TwoElectronSpectrum {
    pub singlet: Vec<f64>,
    pub triplet: Vec<f64>,
    pub j_uev: f64,
}

impl TwoElectronSpectrum {
    pub fn from_energies(singlet: Vec<f64>, triplet: Vec<f64>) -> Self {
        let j_uev = (triplet[0] - singlet[0]) * UEV_PER_MEV;
        Self {
            singlet,
            triplet,
            j_uev,
        }
    }
}

/// ⟨ab|H|cd⟩ for product states with one-body matrix `h`.
fn product_element(orbitals: &OrbitalSet, coulomb: &CoulombTensor, a: usize, b: usize, c: usize, d: usize) -> f64 {
    let mut e = coulomb.get(a, b, c, d);
    if b == d {
        e += orbitals.one_body_element(a, c);
    }
    if a == c {
        e += orbitals.one_body_element(b, d);
    }
    e
}

fn sector(orbitals: &OrbitalSet, coulomb: &CoulombTensor, sector: SpinSector) -> CISector {
    let n = orbitals.len();
    let basis: Vec<(usize, usize)> = match sector {
        SpinSector::Singlet => (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect(),
        SpinSector::Triplet => (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
    };
    let sign = match sector {
        SpinSector::Singlet => 1.0,
        SpinSector::Triplet => -1.0,
    };
    // ⟨ab±|H|cd±⟩ = 2·N_ab·N_cd·(⟨ab|H|cd⟩ ± ⟨ab|H|dc⟩), N = 1/√2 or 1/2 on the diagonal pair
    let norm = |a: usize, b: usize| if a == b { 0.5 } else { std::f64::consts::FRAC_1_SQRT_2 };
    let dim = basis.len();
    let mut h = DMatrix::zeros(dim, dim);
    for (r, &(a, b)) in basis.iter().enumerate() {
        for (c_idx, &(c, d)) in basis.iter().enumerate().skip(r) {
            let direct = product_element(orbitals, coulomb, a, b, c, d);
            let exchanged = product_element(orbitals, coulomb, a, b, d, c);
            let v = 2.0 * norm(a, b) * norm(c, d) * (direct + sign * exchanged);
            h[(r, c_idx)] = v;
            h[(c_idx, r)] = v;
        }
    }
    CISector {
        sector,
        basis,
        hamiltonian: h,
    }
}

/// Builds the singlet and triplet CI matrices.
pub fn build_ci_sectors(orbitals: &OrbitalSet, coulomb: &CoulombTensor) -> Result<(CISector, CISector)> {
    if orbitals.len() != coulomb.len() {
        return Err(Error::Config(format!(
            "{} orbitals but a Coulomb tensor for {}",
            orbitals.len(),
            coulomb.len()
        )));
    }
    if orbitals.len() < 2 {
        return Err(Error::InvalidInput("CI needs at least two orbitals".into()));
    }
    Ok((
        sector(orbitals, coulomb, SpinSector::Singlet),
        sector(orbitals, coulomb, SpinSector::Triplet),
    ))
}

/// Exact diagonalization; energies ascending in meV.
pub fn diagonalize_ci(sector: &CISector) -> Vec<f64> {
    symmetric_eigenvalues(&sector.hamiltonian)
}

pub(crate) fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |r, c| rows[r][c])
    }

    fn sector_of(m: DMatrix<f64>) -> CISector {
        CISector {
            sector: SpinSector::Singlet,
            basis: vec![(0, 0); m.nrows()],
            hamiltonian: m,
        }
    }

    #[test]
    fn one_by_one_and_diagonal() {
        assert_eq!(diagonalize_ci(&sector_of(mat(&[&[2.5]]))), vec![2.5]);
        let d = mat(&[&[3.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 2.0]]);
        assert_eq!(diagonalize_ci(&sector_of(d)), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigenvalue_sum_equals_trace() {
        let n = 10;
        let m = DMatrix::from_fn(n, n, |r, c| {
            let (a, b) = (r.min(c) as f64, r.max(c) as f64);
            ((a * 1.7 + b * 0.31).sin() * 3.0).round() / 3.0 + if r == c { r as f64 } else { 0.0 }
        });
        let trace: f64 = (0..n).map(|k| m[(k, k)]).sum();
        let sum: f64 = diagonalize_ci(&sector_of(m)).iter().sum();
        assert!((sum - trace).abs() <= 1e-10 * trace.abs());
    }
}
