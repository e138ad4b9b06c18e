use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use sha2::{Digest, Sha256};

use crate::device::{GridGeometry, MaterialParams};
use crate::eigen::OrbitalSet;
use crate::error::{Error, Result};

/// Softened in-plane Coulomb interaction `C/√(r² + λ²)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoulombKernel {
    /// C = e²/(4πε₀εr)·strength, meV·nm.
    pub prefactor: f64,
    pub softening_nm: f64,
}

impl CoulombKernel {
    pub fn from_material(material: &MaterialParams) -> Self {
        Self {
            prefactor: material.coulomb_prefactor(),
            softening_nm: material.softening_length_nm,
        }
    }

    /// Same kernel with the interaction scaled by `strength`.
    pub fn scaled(self, strength: f64) -> Self {
        Self {
            prefactor: self.prefactor * strength,
            ..self
        }
    }

    pub fn at(&self, r: f64) -> f64 {
        self.prefactor / (r * r + self.softening_nm * self.softening_nm).sqrt()
    }
}

/// Discrete Coulomb potential of a grid density, Φ(r₂) = Σ_{r₁} K(|r₁ − r₂|)·ρ(r₁),
/// computed by zero-padded FFT convolution.
pub struct Convolver {
    nx: usize,
    ny: usize,
    px: usize,
    py: usize,
    kernel_hat: Vec<Complex64>,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl Convolver {
    pub fn new(geometry: &GridGeometry, kernel: &CoulombKernel) -> Self {
        let (nx, ny) = (geometry.nx, geometry.ny);
        let px = (2 * nx - 1).next_power_of_two();
        let py = (2 * ny - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(px);
        let fwd_y = planner.plan_fft_forward(py);
        let inv_x = planner.plan_fft_inverse(px);
        let inv_y = planner.plan_fft_inverse(py);
        let h = geometry.spacing;
        let mut table = vec![Complex64::new(0.0, 0.0); px * py];
        for dy in -(ny as isize - 1)..=(ny as isize - 1) {
            let row = dy.rem_euclid(py as isize) as usize;
            for dx in -(nx as isize - 1)..=(nx as isize - 1) {
                let col = dx.rem_euclid(px as isize) as usize;
                let r = h * ((dx * dx + dy * dy) as f64).sqrt();
                table[row * px + col] = Complex64::new(kernel.at(r), 0.0);
            }
        }
        let mut c = Self {
            nx,
            ny,
            px,
            py,
            kernel_hat: Vec::new(),
            fwd_x,
            fwd_y,
            inv_x,
            inv_y,
        };
        c.transform(&mut table, false);
        c.kernel_hat = table;
        c
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (fx, fy) = if inverse {
            (&self.inv_x, &self.inv_y)
        } else {
            (&self.fwd_x, &self.fwd_y)
        };
        for row in data.chunks_mut(self.px) {
            fx.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.py];
        for c in 0..self.px {
            for (r, slot) in col.iter_mut().enumerate() {
                *slot = data[r * self.px + c];
            }
            fy.process(&mut col);
            for (r, v) in col.iter().enumerate() {
                data[r * self.px + c] = *v;
            }
        }
    }

    /// Φ = K ⋆ ρ; `rho` already carries the h² measure.
    pub fn potential(&self, rho: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.px * self.py];
        for j in 0..self.ny {
            for i in 0..self.nx {
                buf[j * self.px + i] = Complex64::new(rho[j * self.nx + i], 0.0);
            }
        }
        self.transform(&mut buf, false);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.transform(&mut buf, true);
        let norm = 1.0 / (self.px * self.py) as f64;
        let mut out = vec![0.0; self.nx * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                out[j * self.nx + i] = buf[j * self.px + i].re * norm;
            }
        }
        out
    }
}

/// ⟨ij|kl⟩ = ∬ ψᵢ(r₁)ψⱼ(r₂) K(|r₁ − r₂|) ψₖ(r₁)ψₗ(r₂) by direct double sum
/// over grid cells. The r₁ = r₂ term is finite because K is softened.
pub fn coulomb_element(orbitals: &OrbitalSet, i: usize, j: usize, k: usize, l: usize, material: &MaterialParams) -> Result<f64> {
    coulomb_element_with(orbitals, [i, j, k, l], &CoulombKernel::from_material(material))
}

pub fn coulomb_element_with(orbitals: &OrbitalSet, idx: [usize; 4], kernel: &CoulombKernel) -> Result<f64> {
    let n = orbitals.len();
    if idx.iter().any(|&q| q >= n) {
        return Err(Error::InvalidInput(format!("orbital index {idx:?} out of range for {n} orbitals")));
    }
    let g = orbitals.geometry;
    let area = g.cell_area();
    let w = &orbitals.wavefunctions;
    let rho1: Vec<f64> = w[idx[0]].iter().zip(&w[idx[2]]).map(|(a, b)| a * b * area).collect();
    let rho2: Vec<f64> = w[idx[1]].iter().zip(&w[idx[3]]).map(|(a, b)| a * b * area).collect();
    let nodes: Vec<(f64, f64, f64)> = (0..g.len())
        .filter(|&p| rho2[p] != 0.0)
        .map(|p| (g.x(p % g.nx), g.y(p / g.nx), rho2[p]))
        .collect();
    // per-node terms are summed sequentially so the result does not depend
    // on the thread count
    let terms: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|p| {
            if rho1[p] == 0.0 {
                return 0.0;
            }
            let (x1, y1) = (g.x(p % g.nx), g.y(p / g.nx));
            let inner: f64 = nodes
                .iter()
                .map(|&(x2, y2, r2)| {
                    let (dx, dy) = (x1 - x2, y1 - y2);
                    kernel.at((dx * dx + dy * dy).sqrt()) * r2
                })
                .sum();
            rho1[p] * inner
        })
        .collect();
    Ok(terms.iter().sum())
}

/// All ⟨ij|kl⟩ for N orbitals, stored over unordered pair indices:
/// ⟨ij|kl⟩ = M[pair(i,k)][pair(j,l)].
#[derive(Debug, Clone, PartialEq)]
pub struct CoulombTensor {
    n: usize,
    pairs: usize,
    m: Vec<f64>,
}

fn pair_index(a: usize, b: usize) -> usize {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    hi * (hi + 1) / 2 + lo
}

impl CoulombTensor {
    /// Pair potentials via FFT convolution, then grid inner products. Both
    /// triangles of M are computed independently.
    pub fn compute(orbitals: &OrbitalSet, kernel: &CoulombKernel) -> Self {
        let convolver = Convolver::new(&orbitals.geometry, kernel);
        Self::compute_with(orbitals, &convolver)
    }

    pub fn compute_with(orbitals: &OrbitalSet, convolver: &Convolver) -> Self {
        let n = orbitals.len();
        let area = orbitals.geometry.cell_area();
        let w = &orbitals.wavefunctions;
        let pair_list: Vec<(usize, usize)> = (0..n).flat_map(|hi| (0..=hi).map(move |lo| (lo, hi))).collect();
        let pairs = pair_list.len();
        let densities: Vec<Vec<f64>> = pair_list
            .par_iter()
            .map(|&(a, b)| w[a].iter().zip(&w[b]).map(|(x, y)| x * y * area).collect())
            .collect();
        let potentials: Vec<Vec<f64>> = densities.par_iter().map(|rho| convolver.potential(rho)).collect();
        let m: Vec<f64> = (0..pairs * pairs)
            .into_par_iter()
            .map(|idx| {
                let (p, q) = (idx / pairs, idx % pairs);
                potentials[p].iter().zip(&densities[q]).map(|(a, b)| a * b).sum()
            })
            .collect();
        Self { n, pairs, m }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// ⟨ij|kl⟩ in meV.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.m[pair_index(i, k) * self.pairs + pair_index(j, l)]
    }

    /// Largest violation of the eight real-orbital permutation symmetries.
    pub fn max_symmetry_violation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let base = self.get(i, j, k, l);
                        for other in [
                            self.get(j, i, l, k),
                            self.get(k, l, i, j),
                            self.get(l, k, j, i),
                            self.get(k, j, i, l),
                            self.get(i, l, k, j),
                        ] {
                            worst = worst.max((base - other).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.m.len());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.pairs as u64).to_le_bytes());
        for v in &self.m {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let word = |k: usize| bytes.get(8 * k..8 * k + 8).map(|b| u64::from_le_bytes(b.try_into().unwrap()));
        let n = word(0)? as usize;
        let pairs = word(1)? as usize;
        if pairs != n * (n + 1) / 2 || bytes.len() != 16 + 8 * pairs * pairs {
            return None;
        }
        let m = (0..pairs * pairs)
            .map(|k| f64::from_le_bytes(bytes[16 + 8 * k..24 + 8 * k].try_into().unwrap()))
            .collect();
        Some(Self { n, pairs, m })
    }
}

/// Content hash of an orbital set and kernel, used as the tensor cache key.
pub fn orbital_fingerprint(orbitals: &OrbitalSet, kernel: &CoulombKernel) -> String {
    let mut h = Sha256::new();
    let g = orbitals.geometry;
    for v in [g.spacing, g.x0, g.y0, kernel.prefactor, kernel.softening_nm] {
        h.update(v.to_le_bytes());
    }
    h.update((g.nx as u64).to_le_bytes());
    h.update((g.ny as u64).to_le_bytes());
    for w in &orbitals.wavefunctions {
        for v in w {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Directory-backed store of Coulomb tensors keyed by [`orbital_fingerprint`].
#[derive(Debug, Clone)]
pub struct TensorCache {
    dir: PathBuf,
}

impl TensorCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        Self {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("coulomb-{key}.bin"))
    }

    pub fn load(&self, key: &str) -> Option<CoulombTensor> {
        std::fs::read(self.path(key)).ok().and_then(|b| CoulombTensor::from_bytes(&b))
    }

    pub fn store(&self, key: &str, tensor: &CoulombTensor) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        crate::io::write_atomic(&self.path(key), &tensor.to_bytes())
    }

    pub fn get_or_compute(&self, orbitals: &OrbitalSet, kernel: &CoulombKernel) -> Result<CoulombTensor> {
        let key = orbital_fingerprint(orbitals, kernel);
        if let Some(t) = self.load(&key) {
            if t.len() == orbitals.len() {
                return Ok(t);
            }
        }
        let t = CoulombTensor::compute(orbitals, kernel);
        self.store(&key, &t)?;
        Ok(t)
    }
}
