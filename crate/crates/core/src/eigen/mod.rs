//! Single-particle effective-mass eigenproblem on the potential grid.

mod hamiltonian;
mod solver;

use std::fmt::Write as _;

use crate::device::GridGeometry;

pub use hamiltonian::{build_hamiltonian, DiscretizedHamiltonian};
pub use solver::{lowest_eigenpairs, EigenSettings};

/// Lowest single-particle states. Wavefunctions are real and normalized so
/// that Σ ψ²·h² = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalSet {
    pub geometry: GridGeometry,
    /// Ascending, meV.
    pub energies: Vec<f64>,
    pub wavefunctions: Vec<Vec<f64>>,
    /// One-body matrix ⟨ψᵢ|H|ψⱼ⟩ (row-major, meV) when the orbitals are not
    /// eigenstates of the bare Hamiltonian; `None` means `diag(energies)`.
    pub one_body: Option<Vec<f64>>,
}

impl OrbitalSet {
    pub fn len(&self) -> usize {
        self.wavefunctions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavefunctions.is_empty()
    }

    /// ⟨ψᵢ|ψⱼ⟩ with the grid measure.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        let area = self.geometry.cell_area();
        self.wavefunctions[i]
            .iter()
            .zip(&self.wavefunctions[j])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * area
    }

    /// One-body matrix element in meV.
    pub fn one_body_element(&self, i: usize, j: usize) -> f64 {
        match &self.one_body {
            Some(m) => m[i * self.len() + j],
            None if i == j => self.energies[i],
            None => 0.0,
        }
    }

    /// Keeps the first `n` orbitals.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            geometry: self.geometry,
            energies: self.energies[..n].to_vec(),
            wavefunctions: self.wavefunctions[..n].to_vec(),
            one_body: self.one_body.as_ref().map(|m| {
                let full = self.len();
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| m[i * full + j]))
                    .collect()
            }),
        }
    }

    /// Plain-text matrix for orbital `i`, header `# orbital i energy_meV E`.
    pub fn orbital_text(&self, i: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# orbital {i} energy_meV {:.16e}", self.energies[i]);
        crate::device::write_rows(&mut out, &self.geometry, &self.wavefunctions[i]);
        out
    }
}

/// Largest |⟨ψᵢ|ψⱼ⟩ − δᵢⱼ| over all pairs.
pub fn check_orthonormality(orbitals: &OrbitalSet) -> f64 {
    let n = orbitals.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((orbitals.overlap(i, j) - target).abs());
        }
    }
    worst
}
