use crate::device::{GridGeometry, MaterialParams, PotentialGrid};
use crate::error::{Error, Result};

/// `H = −(ħ²/2m*)·Δ₅ + diag(V)` on the interior nodes of a grid with
/// Dirichlet walls.
#[derive(Debug, Clone)]
pub struct DiscretizedHamiltonian {
    pub geometry: GridGeometry,
    /// ħ²/(2m*) in meV·nm².
    pub kinetic_prefactor: f64,
    pub potential: Vec<f64>,
    diagnostics: Vec<String>,
}

/// Builds the finite-difference Hamiltonian. Cells too coarse for the local
/// potential variation are reported through [`DiscretizedHamiltonian::diagnostics`].
pub fn build_hamiltonian(grid: &PotentialGrid, material: &MaterialParams) -> Result<DiscretizedHamiltonian> {
    material.validate()?;
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("potential grid contains non-finite values".into()));
    }
    let g = grid.geometry;
    let kin = material.kinetic_prefactor();
    let hop = kin / (g.spacing * g.spacing);

    let mut max_step: f64 = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let v = grid.at(i, j);
            if i + 1 < g.nx {
                max_step = max_step.max((grid.at(i + 1, j) - v).abs());
            }
            if j + 1 < g.ny {
                max_step = max_step.max((grid.at(i, j + 1) - v).abs());
            }
        }
    }
    let mut diagnostics = Vec::new();
    if hop < max_step {
        diagnostics.push(format!(
            "accuracy risk: kinetic cell scale {hop:.3} meV is below the largest potential step {max_step:.3} meV; refine the grid"
        ));
    }
    Ok(DiscretizedHamiltonian {
        geometry: g,
        kinetic_prefactor: kin,
        potential: grid.values.clone(),
        diagnostics,
    })
}

impl DiscretizedHamiltonian {
    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    /// Off-diagonal coupling ħ²/(2m*h²) (enters with a minus sign).
    pub fn hopping(&self) -> f64 {
        self.kinetic_prefactor / (self.geometry.spacing * self.geometry.spacing)
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    /// y = H·x
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nx = self.geometry.nx;
        let ny = self.geometry.ny;
        let t = self.hopping();
        let d = 4.0 * t;
        for j in 0..ny {
            let row = j * nx;
            for i in 0..nx {
                let p = row + i;
                let mut nb = 0.0;
                if i > 0 {
                    nb += x[p - 1];
                }
                if i + 1 < nx {
                    nb += x[p + 1];
                }
                if j > 0 {
                    nb += x[p - nx];
                }
                if j + 1 < ny {
                    nb += x[p + nx];
                }
                y[p] = (d + self.potential[p]) * x[p] - t * nb;
            }
        }
    }

    /// Same operator with an extra diagonal term.
    pub fn with_extra_potential(&self, extra: &[f64]) -> Self {
        let mut h = self.clone();
        for (v, e) in h.potential.iter_mut().zip(extra) {
            *v += e;
        }
        h
    }

    /// Dense matrix, row-major. Only sensible for small grids.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for c in 0..n {
            e[c] = 1.0;
            self.apply(&e, &mut col);
            for r in 0..n {
                out[r * n + c] = col[r];
            }
            e[c] = 0.0;
        }
        out
    }
}

/// Cholesky factor of `H − σ` stored by rows over the band of half-width nx.
pub(crate) struct BandCholesky {
    n: usize,
    band: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub(crate) fn factor(h: &DiscretizedHamiltonian, shift: f64) -> Result<Self> {
        let n = h.len();
        let b = h.geometry.nx;
        let w = b + 1;
        let t = h.hopping();
        let mut l = vec![0.0; n * w];
        let nx = h.geometry.nx;
        for i in 0..n {
            // A(i, i−b..=i) in local storage, then eliminate in place
            let base = i * w;
            l[base + b] = 4.0 * t + h.potential[i] - shift;
            if i % nx > 0 {
                l[base + b - 1] = -t;
            }
            if i >= nx {
                l[base] = -t;
            }
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let jb = j * w;
                let mut s = l[base + j + b - i];
                let klo = lo.max(j.saturating_sub(b));
                for k in klo..j {
                    s -= l[base + k + b - i] * l[jb + k + b - j];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::InvalidInput(format!(
                            "shifted Hamiltonian is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    l[base + b] = s.sqrt();
                } else {
                    l[base + j + b - i] = s / l[jb + b];
                }
            }
        }
        Ok(Self { n, band: b, l })
    }

    /// Solves (H − σ)·x = rhs in place.
    pub(crate) fn solve(&self, x: &mut [f64]) {
        let b = self.band;
        let w = b + 1;
        for i in 0..self.n {
            let base = i * w;
            let lo = i.saturating_sub(b);
            let mut s = x[i];
            for k in lo..i {
                s -= self.l[base + k + b - i] * x[k];
            }
            x[i] = s / self.l[base + b];
        }
        for i in (0..self.n).rev() {
            let base = i * w;
            x[i] /= self.l[base + b];
            let xi = x[i];
            let lo = i.saturating_sub(b);
            for k in lo..i {
                x[k] -= self.l[base + k + b - i] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{GridGeometry, Provenance};
    use std::f64::consts::PI;

    fn flat(n: usize, h: f64, v: f64) -> PotentialGrid {
        let g = GridGeometry::centered((0.0, 0.0), n, n, h);
        PotentialGrid::new(g, vec![v; n * n], Provenance::File).unwrap()
    }

    fn dense_eigenvalues(h: &DiscretizedHamiltonian) -> Vec<f64> {
        let n = h.len();
        let m = nalgebra::DMatrix::from_row_slice(n, n, &h.to_dense());
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn box_spectrum_matches_closed_form() {
        let m = MaterialParams::silicon();
        let h = build_hamiltonian(&flat(3, 2.0, 0.0), &m).unwrap();
        let got = dense_eigenvalues(&h);
        let t = m.kinetic_prefactor() / 4.0;
        let mut want = Vec::new();
        for p in 1..=3 {
            for q in 1..=3 {
                let s = |k: usize| (k as f64 * PI / 8.0).sin().powi(2);
                want.push(4.0 * t * (s(p) + s(q)));
            }
        }
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_shift_moves_spectrum() {
        let m = MaterialParams::silicon();
        let a = dense_eigenvalues(&build_hamiltonian(&flat(4, 3.0, 0.0), &m).unwrap());
        let b = dense_eigenvalues(&build_hamiltonian(&flat(4, 3.0, 2.5), &m).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn stencil_row_sums_vanish_in_interior() {
        let m = MaterialParams::silicon();
        let h = build_hamiltonian(&flat(6, 1.0, 0.0), &m).unwrap();
        let ones = vec![1.0; 36];
        let mut out = vec![0.0; 36];
        h.apply(&ones, &mut out);
        for j in 0..6 {
            for i in 0..6 {
                let boundary = i == 0 || j == 0 || i == 5 || j == 5;
                let v = out[j * 6 + i];
                if boundary {
                    assert!(v > 0.0);
                } else {
                    assert!(v.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dense_matrix_is_symmetric() {
        let m = MaterialParams::silicon();
        let g = GridGeometry::centered((0.0, 0.0), 5, 4, 2.0);
        let vals: Vec<f64> = (0..20).map(|k| (k as f64 * 0.7).sin()).collect();
        let h = build_hamiltonian(&PotentialGrid::new(g, vals, Provenance::File).unwrap(), &m).unwrap();
        let d = h.to_dense();
        for r in 0..20 {
            for c in 0..20 {
                assert_eq!(d[r * 20 + c], d[c * 20 + r]);
            }
        }
    }

    #[test]
    fn band_cholesky_solves() {
        let m = MaterialParams::silicon();
        let g = GridGeometry::centered((0.0, 0.0), 7, 5, 2.0);
        let vals: Vec<f64> = (0..35).map(|k| (k as f64 * 0.3).cos()).collect();
        let h = build_hamiltonian(&PotentialGrid::new(g, vals, Provenance::File).unwrap(), &m).unwrap();
        let chol = BandCholesky::factor(&h, -2.0).unwrap();
        let x: Vec<f64> = (0..35).map(|k| 1.0 + k as f64 * 0.1).collect();
        let mut rhs = vec![0.0; 35];
        h.apply(&x, &mut rhs);
        for (r, xi) in rhs.iter_mut().zip(&x) {
            *r += 2.0 * xi;
        }
        chol.solve(&mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coarse_grid_warns() {
        let m = MaterialParams::silicon();
        let g = GridGeometry::centered((0.0, 0.0), 4, 4, 10.0);
        let mut vals = vec![0.0; 16];
        vals[5] = 500.0;
        let h = build_hamiltonian(&PotentialGrid::new(g, vals, Provenance::File).unwrap(), &m).unwrap();
        assert_eq!(h.diagnostics().len(), 1);
    }
}
