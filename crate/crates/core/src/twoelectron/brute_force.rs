use rayon::prelude::*;

use super::ci::TwoElectronSpectrum;
use super::coulomb::CoulombKernel;
use crate::device::{MaterialParams, PotentialGrid};
use crate::eigen::{build_hamiltonian, lowest_eigenpairs, DiscretizedHamiltonian, EigenSettings};
use crate::error::{Error, Result};

/// Largest two-particle product dimension (nx·ny)² accepted; a 32×32 grid fits.
pub const MAX_PRODUCT_DIM: usize = 1 << 20;

const MAX_LANCZOS: usize = 6000;

/// Two-particle Hamiltonian `h⊗1 + 1⊗h + K(|r₁ − r₂|)` on the full product grid.
struct ProductHamiltonian<'a> {
    h: &'a DiscretizedHamiltonian,
    interaction: Vec<f64>,
}

impl ProductHamiltonian<'_> {
    fn n(&self) -> usize {
        self.h.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        let g = self.h.geometry;
        let t = self.h.hopping();
        y.par_chunks_mut(n).enumerate().for_each(|(p1, out)| {
            let row = &x[p1 * n..(p1 + 1) * n];
            // second particle: h acting along the row
            self.h.apply(row, out);
            // first particle: stencil across rows
            let diag = 4.0 * t + self.h.potential[p1];
            let (i, j) = (p1 % g.nx, p1 / g.nx);
            let mut neighbours = [usize::MAX; 4];
            if i > 0 {
                neighbours[0] = p1 - 1;
            }
            if i + 1 < g.nx {
                neighbours[1] = p1 + 1;
            }
            if j > 0 {
                neighbours[2] = p1 - g.nx;
            }
            if j + 1 < g.ny {
                neighbours[3] = p1 + g.nx;
            }
            let inter = &self.interaction[p1 * n..(p1 + 1) * n];
            for p2 in 0..n {
                let mut acc = (diag + inter[p2]) * row[p2];
                for &q in &neighbours {
                    if q != usize::MAX {
                        acc -= t * x[q * n + p2];
                    }
                }
                out[p2] += acc;
            }
        });
    }
}

fn project(x: &mut [f64], n: usize, sign: f64) {
    for a in 0..n {
        for b in a..n {
            let (p, q) = (a * n + b, b * n + a);
            let v = 0.5 * (x[p] + sign * x[q]);
            x[p] = v;
            x[q] = sign * v;
        }
    }
}

/// Fixed-size chunks keep the reduction order independent of the thread count.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(4096)
        .zip(b.par_chunks(4096))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = alpha[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = f64::EPSILON * (alpha[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn lowest_tridiagonal(alpha: &[f64], beta: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..alpha.len() {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < alpha.len() { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sector_ground(op: &ProductHamiltonian, start: Vec<f64>, sign: f64) -> Result<f64> {
    let n = op.n();
    let dim = n * n;
    let mut v = start;
    project(&mut v, n, sign);
    let nrm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    let mut v_prev = vec![0.0; dim];
    let mut w = vec![0.0; dim];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut stable = 0;
    for it in 0..MAX_LANCZOS {
        op.apply(&v, &mut w);
        let a = dot(&w, &v);
        let b_prev = beta.last().copied().unwrap_or(0.0);
        w.par_iter_mut()
            .zip(v.par_iter().zip(v_prev.par_iter()))
            .for_each(|(wi, (vi, pi))| *wi -= a * vi + b_prev * pi);
        project(&mut w, n, sign);
        let b = dot(&w, &w).sqrt();
        alpha.push(a);
        if it % 10 == 9 || b < 1e-300 {
            let theta = lowest_tridiagonal(&alpha, &beta);
            if let Some(&prev) = history.last() {
                let change: f64 = theta - prev;
                if change.abs() <= 1e-13 * theta.abs().max(1.0) {
                    stable += 1;
                } else {
                    stable = 0;
                }
            }
            history.push(theta);
            if stable >= 3 || b < 1e-300 {
                return Ok(theta);
            }
        }
        beta.push(b);
        std::mem::swap(&mut v_prev, &mut v);
        v.par_iter_mut().zip(w.par_iter()).for_each(|(vi, wi)| *vi = wi / b);
    }
    let n_hist = history.len();
    let residual = if n_hist >= 2 {
        (history[n_hist - 1] - history[n_hist - 2]).abs()
    } else {
        f64::NAN
    };
    Err(Error::Convergence {
        what: "two-particle Lanczos".into(),
        iterations: MAX_LANCZOS,
        residual,
        hint: String::new(),
    })
}

/// Exact two-electron singlet and triplet ground energies on a coarse grid,
/// with no basis truncation.
///
/// Each sector is solved by Lanczos on the full product grid, restricted by
/// projecting onto symmetric (singlet) or antisymmetric (triplet) spatial
/// functions. Only the sector ground states are returned.
pub fn brute_force_two_electron(grid: &PotentialGrid, material: &MaterialParams, kernel: &CoulombKernel) -> Result<TwoElectronSpectrum> {
    let n = grid.geometry.len();
    if n.saturating_mul(n) > MAX_PRODUCT_DIM {
        return Err(Error::Resource(format!(
            "product grid of dimension {} exceeds the {MAX_PRODUCT_DIM} budget; use a grid of at most 32x32",
            n.saturating_mul(n)
        )));
    }
    let h = build_hamiltonian(grid, material)?;
    let g = grid.geometry;
    let mut interaction = vec![0.0; n * n];
    for p1 in 0..n {
        let (x1, y1) = (g.x(p1 % g.nx), g.y(p1 / g.nx));
        for p2 in 0..n {
            let (dx, dy) = (x1 - g.x(p2 % g.nx), y1 - g.y(p2 / g.nx));
            interaction[p1 * n + p2] = kernel.at((dx * dx + dy * dy).sqrt());
        }
    }
    let op = ProductHamiltonian { h: &h, interaction };

    // start from products of the two lowest orbitals plus a fixed Weyl term
    let orb = lowest_eigenpairs(&h, 2, &EigenSettings::default())?;
    let (f0, f1) = (&orb.wavefunctions[0], &orb.wavefunctions[1]);
    let weyl = |p: usize| ((p as f64 + 1.0) * 0.754_877_666_246_692_8).fract() - 0.5;
    let mut sym = vec![0.0; n * n];
    let mut anti = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let p = a * n + b;
            sym[p] = f0[a] * f0[b] + 1e-3 * weyl(p);
            anti[p] = f0[a] * f1[b] - f1[a] * f0[b] + 1e-3 * weyl(p);
        }
    }
    let (singlet, triplet) = rayon::join(|| sector_ground(&op, sym, 1.0), || sector_ground(&op, anti, -1.0));
    Ok(TwoElectronSpectrum::from_energies(vec![singlet?], vec![triplet?]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_bisection() {
        // 2x2 [[1, 2], [2, 1]] has eigenvalues −1 and 3
        let e = lowest_tridiagonal(&[1.0, 1.0], &[2.0]);
        assert!((e + 1.0).abs() < 1e-13);
    }

    #[test]
    fn oversized_grid_is_rejected() {
        use crate::device::{GridGeometry, Provenance};
        let g = GridGeometry::centered((0.0, 0.0), 40, 40, 5.0);
        let grid = PotentialGrid::new(g, vec![0.0; 1600], Provenance::File).unwrap();
        let m = MaterialParams::silicon();
        let r = brute_force_two_electron(&grid, &m, &CoulombKernel::from_material(&m));
        assert!(matches!(r, Err(Error::Resource(_))));
    }
}
