use nalgebra::DMatrix;

use super::hamiltonian::{BandCholesky, DiscretizedHamiltonian};
use super::OrbitalSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EigenSettings {
    /// Residual bound ‖Hψ − Eψ‖ ≤ tol·max(|E|, 1 meV) for unit ψ.
    pub tol: f64,
    /// Cap on operator applications (solves plus H products).
    pub max_applications: usize,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_applications: 100_000,
        }
    }
}

/// Grids at or below this many nodes are diagonalized densely.
const DENSE_LIMIT: usize = 400;

/// Lowest `k` eigenpairs of `h`.
///
/// Uses block Krylov iteration on `(H − σ)⁻¹` with σ just below min(V), so
/// the wanted end of the spectrum is the dominant one. The starting block is
/// fixed: box modes `sin(aπ(i+1)/(nx+1))·sin(bπ(j+1)/(ny+1))` plus a Weyl
/// sequence term that breaks every lattice symmetry. Degenerate clusters are
/// ordered lexicographically by grid values after fixing each sign so the
/// largest-magnitude entry is positive.
pub fn lowest_eigenpairs(h: &DiscretizedHamiltonian, k: usize, settings: &EigenSettings) -> Result<OrbitalSet> {
    let n = h.len();
    if k == 0 || k > n / 2 {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs from a {n}-node grid"
        )));
    }
    let (energies, vectors) = if n <= DENSE_LIMIT {
        dense_lowest(h, k)
    } else {
        krylov_lowest(h, k, settings)?
    };
    Ok(finish(h, energies, vectors, settings.tol))
}

fn dense_lowest(h: &DiscretizedHamiltonian, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = h.len();
    let m = DMatrix::from_row_slice(n, n, &h.to_dense());
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order[..k].iter().map(|&c| eig.eigenvalues[c]).collect();
    let vectors = order[..k]
        .iter()
        .map(|&c| eig.eigenvectors.column(c).iter().copied().collect())
        .collect();
    (energies, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = dot(v, v).sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Orthonormalizes the columns of `w` against the first `m` columns of `q`
/// and against each other, appending the survivors to `q`. Returns the new
/// column count.
///
/// Projection is repeated while a pass removes more than half of a column's
/// norm; columns that shrink below round-off relative to their input are
/// dropped.
fn extend_basis(q: &mut DMatrix<f64>, m: usize, mut w: DMatrix<f64>) -> usize {
    let start_norms: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    for _ in 0..3 {
        if m == 0 {
            break;
        }
        let basis = q.columns(0, m);
        let before: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
        let coeffs = basis.tr_mul(&w);
        w.gemm(-1.0, &basis, &coeffs, 1.0);
        let settled = w
            .column_iter()
            .zip(&before)
            .all(|(c, &b)| b == 0.0 || c.norm() > 0.5 * b);
        if settled {
            break;
        }
    }
    let mut count = m;
    for (c, &n0) in start_norms.iter().enumerate() {
        if n0 == 0.0 || count == q.ncols() {
            continue;
        }
        let mut v = w.column(c).into_owned();
        for _ in 0..2 {
            let before = v.norm();
            for prev in m..count {
                let col = q.column(prev);
                let proj = col.dot(&v);
                v.axpy(-proj, &col, 1.0);
            }
            if v.norm() > 0.5 * before {
                break;
            }
        }
        let nrm = v.norm();
        if nrm < 1e-13 * n0 {
            continue;
        }
        q.set_column(count, &(v / nrm));
        count += 1;
    }
    count
}

fn seed_block(h: &DiscretizedHamiltonian, m: usize) -> Vec<Vec<f64>> {
    let g = h.geometry;
    // box modes in order of increasing a² + b²
    let mut modes: Vec<(usize, usize)> = (1..=m + 1)
        .flat_map(|a| (1..=m + 1).map(move |b| (a, b)))
        .collect();
    modes.sort_by_key(|&(a, b)| (a * a + b * b, a, b));
    let golden = 0.618_033_988_749_894_9_f64;
    modes
        .iter()
        .take(m)
        .enumerate()
        .map(|(c, &(a, b))| {
            let alpha = (golden * (c as f64 + 1.0) + 2f64.sqrt() * c as f64).fract();
            let mut v = Vec::with_capacity(g.len());
            for j in 0..g.ny {
                let sy = (b as f64 * std::f64::consts::PI * (j + 1) as f64 / (g.ny + 1) as f64).sin();
                for i in 0..g.nx {
                    let sx = (a as f64 * std::f64::consts::PI * (i + 1) as f64 / (g.nx + 1) as f64).sin();
                    let p = j * g.nx + i;
                    let weyl = ((p as f64 + 1.0) * (0.5 + alpha)).fract() - 0.5;
                    v.push(sx * sy + 0.3 * weyl);
                }
            }
            v
        })
        .collect()
}

fn krylov_lowest(
    h: &DiscretizedHamiltonian,
    k: usize,
    settings: &EigenSettings,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = h.len();
    let block = (k + (k / 8).max(2)).min(n / 2);
    let max_basis = (4 * block).max(32).min(n);
    let vmin = h.potential.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = vmin - 0.01 * vmin.abs().max(1.0);
    let chol = BandCholesky::factor(h, shift)?;

    let mut applications = 0usize;
    let seeds = seed_block(h, block);
    let mut start = DMatrix::from_fn(n, block, |r, c| seeds[c][r]);
    let mut q = DMatrix::zeros(n, max_basis);
    let mut hq = DMatrix::zeros(n, max_basis);
    let mut hv = vec![0.0; n];
    loop {
        let mut dim = extend_basis(&mut q, 0, start);
        let mut last = 0..dim;
        while dim + last.len() <= max_basis && !last.is_empty() {
            let mut w = q.columns(last.start, last.len()).into_owned();
            for mut col in w.column_iter_mut() {
                chol.solve(col.as_mut_slice());
                applications += 1;
            }
            let grown = extend_basis(&mut q, dim, w);
            last = dim..grown;
            dim = grown;
        }
        for c in 0..dim {
            h.apply(q.column(c).as_slice(), &mut hv);
            applications += 1;
            hq.column_mut(c).copy_from_slice(&hv);
        }
        let basis = q.columns(0, dim);
        let h_basis = hq.columns(0, dim);
        let g = basis.tr_mul(&h_basis);
        let g = (&g + g.transpose()) * 0.5;
        let eig = g.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let keep = block.min(dim);
        let y = DMatrix::from_fn(dim, keep, |r, c| eig.eigenvectors[(r, order[c])]);
        let values: Vec<f64> = order[..keep].iter().map(|&c| eig.eigenvalues[c]).collect();
        let ritz = &basis * &y;
        let mut resid = &h_basis * &y;
        let mut worst = 0.0f64;
        for (c, theta) in values.iter().enumerate().take(k) {
            let mut col = resid.column_mut(c);
            col.axpy(-theta, &ritz.column(c), 1.0);
            worst = worst.max(col.norm() / theta.abs().max(1.0));
        }
        if worst <= settings.tol {
            let vectors = (0..k).map(|c| ritz.column(c).iter().copied().collect()).collect();
            return Ok((values[..k].to_vec(), vectors));
        }
        if applications >= settings.max_applications {
            return Err(Error::Convergence {
                what: "lowest_eigenpairs".into(),
                iterations: applications,
                residual: worst,
                hint: String::new(),
            });
        }
        start = ritz;
    }
}

/// Sign-fixes, orders degenerate clusters, and rescales to Σψ²h² = 1.
fn finish(h: &DiscretizedHamiltonian, energies: Vec<f64>, mut vectors: Vec<Vec<f64>>, tol: f64) -> OrbitalSet {
    for v in vectors.iter_mut() {
        normalize(v);
        let mut best = 0;
        let mut best_abs = 0.0;
        for (p, x) in v.iter().enumerate() {
            // first index within round-off of the maximum
            if x.abs() > best_abs * (1.0 + 1e-9) {
                best = p;
                best_abs = x.abs();
            }
        }
        if v[best] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    // Ritz values sit within the residual bound of the true eigenvalues, so
    // only pairs closer than a few residuals are indistinguishable.
    let scale_tol = 10.0 * tol.max(1e-14);
    let mut order: Vec<usize> = (0..energies.len()).collect();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && (energies[end] - energies[end - 1]).abs() <= scale_tol * energies[end].abs().max(1.0)
        {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| {
            vectors[a]
                .iter()
                .zip(&vectors[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        start = end;
    }
    let inv_h = 1.0 / h.geometry.spacing;
    let energies_sorted = order.iter().map(|&c| energies[c]).collect();
    let wavefunctions = order
        .iter()
        .map(|&c| {
            let mut v = std::mem::take(&mut vectors[c]);
            v.iter_mut().for_each(|x| *x *= inv_h);
            v
        })
        .collect();
    OrbitalSet {
        geometry: h.geometry,
        energies: energies_sorted,
        wavefunctions,
        one_body: None,
    }
}
