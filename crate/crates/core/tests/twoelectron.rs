use std::f64::consts::PI;

use flattop::device::{model_double_well, GridGeometry, MaterialParams, PotentialGrid, Rect};
use flattop::eigen::{build_hamiltonian, lowest_eigenpairs, EigenSettings, OrbitalSet};
use flattop::twoelectron::{
    brute_force_two_electron, build_ci_sectors, ci_spectrum, coulomb_element_with, diagonalize_ci,
    hartree_fock_refine, orbital_fingerprint, CoulombKernel, CoulombTensor, HartreeFockSettings, TensorCache,
};
use flattop::units::UEV_PER_MEV;
use proptest::prelude::*;

fn silicon() -> MaterialParams {
    MaterialParams::silicon()
}

/// Two Gaussian orbitals with density variance `var` per axis, centred at
/// (±d/2, 0), on a grid of spacing `h` spanning x in ±`half_x`, y in ±`half_y`.
fn gaussian_pair(d: f64, var: f64, h: f64, half_x: f64, half_y: f64) -> OrbitalSet {
    let nx = (2.0 * half_x / h).round() as usize + 1;
    let ny = (2.0 * half_y / h).round() as usize + 1;
    let g = GridGeometry::centered((0.0, 0.0), nx, ny, h);
    let orbital = |cx: f64| {
        let mut w: Vec<f64> = (0..g.len())
            .map(|p| {
                let (x, y) = (g.x(p % nx) - cx, g.y(p / nx));
                (-(x * x + y * y) / (4.0 * var)).exp()
            })
            .collect();
        let norm = (w.iter().map(|v| v * v).sum::<f64>() * g.cell_area()).sqrt();
        w.iter_mut().for_each(|v| *v /= norm);
        w
    };
    OrbitalSet {
        geometry: g,
        energies: vec![0.0, 0.0],
        wavefunctions: vec![orbital(-0.5 * d), orbital(0.5 * d)],
        one_body: None,
    }
}

/// ∫ d²s ρ(s) K(|s|) with ρ a normalized Gaussian of variance `var` per axis
/// centred at distance `d`, in polar coordinates about s = 0: composite
/// Simpson in r, trapezoid (spectrally accurate for periodic integrands) in θ.
fn polar_oracle(kernel: &CoulombKernel, d: f64, var: f64) -> f64 {
    let (nr, nt) = (6000, 256);
    let r_max = d + 12.0 * var.sqrt();
    let hr = r_max / nr as f64;
    let mut total = 0.0;
    for i in 0..=nr {
        let r = i as f64 * hr;
        let w = if i == 0 || i == nr { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let mut ring = 0.0;
        for k in 0..nt {
            let t = 2.0 * PI * k as f64 / nt as f64;
            let (dx, dy) = (r * t.cos() - d, r * t.sin());
            ring += (-(dx * dx + dy * dy) / (2.0 * var)).exp();
        }
        ring *= 2.0 * PI / nt as f64 / (2.0 * PI * var);
        total += w * r * ring * kernel.at(r);
    }
    total * hr / 3.0
}

#[test]
fn gaussian_direct_coulomb_matches_polar_quadrature() {
    let kernel = CoulombKernel::from_material(&silicon());
    // each density has variance 50 nm², so the relative coordinate has 100 nm²
    let o = gaussian_pair(60.0, 50.0, 2.0, 90.0, 50.0);
    let got = coulomb_element_with(&o, [0, 1, 0, 1], &kernel).unwrap();
    let want = polar_oracle(&kernel, 60.0, 100.0);
    assert!(((got - want) / want).abs() < 1e-4, "{got} vs {want}");

    let t = CoulombTensor::compute(&o, &kernel);
    for idx in [[0, 1, 0, 1], [0, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]] {
        let direct = coulomb_element_with(&o, idx, &kernel).unwrap();
        let fft = t.get(idx[0], idx[1], idx[2], idx[3]);
        assert!((fft - direct).abs() <= 1e-10 * direct.abs().max(1e-12), "{idx:?}: {fft} vs {direct}");
    }
    assert!(t.max_symmetry_violation() < 1e-12);
}

#[test]
fn distant_charges_interact_like_points() {
    let kernel = CoulombKernel::from_material(&silicon());
    let d = 200.0;
    let o = gaussian_pair(d, 50.0, 2.5, 140.0, 40.0);
    let got = CoulombTensor::compute(&o, &kernel).get(0, 1, 0, 1);
    let want = kernel.prefactor / d;
    assert!(((got - want) / want).abs() < 0.02, "{got} vs {want}");
}

#[test]
fn disjoint_orbitals_have_zero_exchange_integral() {
    let g = GridGeometry::centered((0.0, 0.0), 20, 10, 2.0);
    let boxed = |left: bool| -> Vec<f64> {
        (0..g.len()).map(|p| if ((p % 20) < 10) == left { 1.0 / (100.0f64 * 4.0).sqrt() } else { 0.0 }).collect()
    };
    let o = OrbitalSet {
        geometry: g,
        energies: vec![0.0, 0.0],
        wavefunctions: vec![boxed(true), boxed(false)],
        one_body: None,
    };
    let kernel = CoulombKernel::from_material(&silicon());
    assert_eq!(coulomb_element_with(&o, [0, 1, 1, 0], &kernel).unwrap(), 0.0);
    assert!(coulomb_element_with(&o, [0, 1, 0, 1], &kernel).unwrap() > 0.0);
}

fn double_well(sep: f64, n: usize, half: f64) -> PotentialGrid {
    let d = Rect::new(-half, half, -half, half).unwrap();
    model_double_well(sep, 3.0, 1.0, &silicon(), &d, n, n).unwrap()
}

fn orbitals(grid: &PotentialGrid, k: usize) -> OrbitalSet {
    let h = build_hamiltonian(grid, &silicon()).unwrap();
    lowest_eigenpairs(&h, k, &EigenSettings::default()).unwrap()
}

#[test]
fn two_orbital_ci_matches_hand_assembled_matrices() {
    let o = orbitals(&double_well(40.0, 33, 80.0), 2);
    let kernel = CoulombKernel::from_material(&silicon());
    let c = CoulombTensor::compute(&o, &kernel);
    let (e0, e1) = (o.energies[0], o.energies[1]);
    let v = |i, j, k, l| c.get(i, j, k, l);
    let s2 = std::f64::consts::SQRT_2;
    // basis |00⟩, |11⟩, (|01⟩ + |10⟩)/√2
    let h = nalgebra::Matrix3::new(
        2.0 * e0 + v(0, 0, 0, 0),
        v(0, 0, 1, 1),
        s2 * v(0, 0, 0, 1),
        v(1, 1, 0, 0),
        2.0 * e1 + v(1, 1, 1, 1),
        s2 * v(1, 1, 0, 1),
        s2 * v(0, 1, 0, 0),
        s2 * v(0, 1, 1, 1),
        e0 + e1 + v(0, 1, 0, 1) + v(0, 1, 1, 0),
    );
    let mut want: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    want.sort_by(f64::total_cmp);
    let triplet = e0 + e1 + v(0, 1, 0, 1) - v(0, 1, 1, 0);

    let (s, t) = build_ci_sectors(&o, &c).unwrap();
    assert_eq!((s.dim(), t.dim()), (3, 1));
    let got = diagonalize_ci(&s);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10 * b.abs(), "{got:?} vs {want:?}");
    }
    assert!((diagonalize_ci(&t)[0] - triplet).abs() < 1e-10 * triplet.abs());
}

#[test]
fn sector_dimensions() {
    let o = orbitals(&double_well(40.0, 25, 80.0), 8);
    let c = CoulombTensor::compute(&o, &CoulombKernel::from_material(&silicon()));
    let (s, t) = build_ci_sectors(&o, &c).unwrap();
    assert_eq!((s.dim(), t.dim()), (36, 28));
}

#[test]
fn non_interacting_j_is_the_orbital_gap_and_continuous_in_strength() {
    let o = orbitals(&double_well(45.0, 33, 80.0), 6);
    let kernel = CoulombKernel::from_material(&silicon());
    let gap = (o.energies[1] - o.energies[0]) * UEV_PER_MEV;
    let j = |s: f64| ci_spectrum(&o, &kernel.scaled(s)).unwrap().j_uev;
    let j0 = j(0.0);
    assert!((j0 - gap).abs() < 1e-9 * gap);
    let (d1, d2) = (j(2e-4) - j0, j(4e-4) - j0);
    assert!(d1.abs() > 0.0);
    assert!((d2 / d1 - 2.0).abs() < 0.05, "{d1} {d2}");
}

#[test]
fn rotating_a_degenerate_shell_leaves_the_spectrum_unchanged() {
    let d = Rect::new(-80.0, 80.0, -80.0, 80.0).unwrap();
    let grid = model_double_well(0.0, 6.0, 1.0, &silicon(), &d, 41, 41).unwrap();
    let o = orbitals(&grid, 3);
    let kernel = CoulombKernel::from_material(&silicon());
    let base = ci_spectrum(&o, &kernel).unwrap();
    let (c, s) = (0.6f64, 0.8f64);
    let w = &o.wavefunctions;
    let r1: Vec<f64> = w[1].iter().zip(&w[2]).map(|(a, b)| c * a + s * b).collect();
    let r2: Vec<f64> = w[1].iter().zip(&w[2]).map(|(a, b)| -s * a + c * b).collect();
    let (e1, e2) = (o.energies[1], o.energies[2]);
    let h12 = c * (-s) * e1 + s * c * e2;
    let one_body = vec![
        o.energies[0], 0.0, 0.0,
        0.0, c * c * e1 + s * s * e2, h12,
        0.0, h12, s * s * e1 + c * c * e2,
    ];
    let rotated = OrbitalSet {
        wavefunctions: vec![w[0].clone(), r1, r2],
        one_body: Some(one_body),
        ..o.clone()
    };
    let spun = ci_spectrum(&rotated, &kernel).unwrap();
    for (a, b) in base.singlet.iter().chain(&base.triplet).zip(spun.singlet.iter().chain(&spun.triplet)) {
        assert!((a - b).abs() < 1e-9 * a.abs(), "{a} vs {b}");
    }
}

#[test]
fn hartree_fock_without_interaction_stops_immediately() {
    let grid = double_well(40.0, 33, 80.0);
    let h = build_hamiltonian(&grid, &silicon()).unwrap();
    let o = lowest_eigenpairs(&h, 4, &EigenSettings::default()).unwrap();
    let kernel = CoulombKernel::from_material(&silicon()).scaled(0.0);
    let out = hartree_fock_refine(&h, &o, &kernel, &HartreeFockSettings::default(), &EigenSettings::default()).unwrap();
    assert_eq!(out.iterations, 1);
    for (a, b) in out.orbitals.energies.iter().zip(&o.energies) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn hartree_fock_is_idempotent() {
    let grid = double_well(40.0, 33, 80.0);
    let h = build_hamiltonian(&grid, &silicon()).unwrap();
    let o = lowest_eigenpairs(&h, 4, &EigenSettings::default()).unwrap();
    let kernel = CoulombKernel::from_material(&silicon());
    let s = HartreeFockSettings::default();
    let e = EigenSettings::default();
    let once = hartree_fock_refine(&h, &o, &kernel, &s, &e).unwrap();
    let twice = hartree_fock_refine(&h, &once.orbitals, &kernel, &s, &e).unwrap();
    let a = ci_spectrum(&once.orbitals, &kernel).unwrap().j_uev;
    let b = ci_spectrum(&twice.orbitals, &kernel).unwrap().j_uev;
    assert!(twice.iterations <= once.iterations);
    assert!(((a - b) / a).abs() < 1e-5, "{a} vs {b}");
}

#[test]
fn hartree_fock_basis_agrees_in_the_large_basis_limit() {
    let grid = double_well(60.0, 41, 90.0);
    let h = build_hamiltonian(&grid, &silicon()).unwrap();
    let o = lowest_eigenpairs(&h, 30, &EigenSettings::default()).unwrap();
    let kernel = CoulombKernel::from_material(&silicon());
    let hf = hartree_fock_refine(&h, &o, &kernel, &HartreeFockSettings::default(), &EigenSettings::default()).unwrap();
    assert!(flattop::eigen::check_orthonormality(&hf.orbitals) < 1e-8);
    let plain = ci_spectrum(&o, &kernel).unwrap().j_uev;
    let refined = ci_spectrum(&hf.orbitals, &kernel).unwrap().j_uev;
    assert!(((refined - plain) / plain).abs() < 0.05, "{refined} vs {plain}");
}

#[test]
fn merged_well_ci_approaches_brute_force() {
    let d = Rect::new(-60.0, 60.0, -60.0, 60.0).unwrap();
    let grid = model_double_well(0.0, 10.0, 1.0, &silicon(), &d, 28, 28).unwrap();
    let kernel = CoulombKernel::from_material(&silicon());
    let exact = brute_force_two_electron(&grid, &silicon(), &kernel).unwrap();
    let o = orbitals(&grid, 10);
    let mut last = f64::INFINITY;
    for n in [6, 8, 10] {
        let ci = ci_spectrum(&o.truncated(n), &kernel).unwrap();
        let err = ((ci.j_uev - exact.j_uev) / exact.j_uev).abs();
        assert!(err < 0.05, "N = {n}: {} vs {}", ci.j_uev, exact.j_uev);
        // variational in each sector
        assert!(ci.singlet[0] >= exact.singlet[0] - 1e-9);
        assert!(ci.triplet[0] >= exact.triplet[0] - 1e-9);
        assert!(ci.singlet[0] <= last + 1e-12);
        last = ci.singlet[0];
    }
}

#[test]
fn tensor_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = TensorCache::new(dir.path());
    let o = orbitals(&double_well(40.0, 21, 80.0), 4);
    let kernel = CoulombKernel::from_material(&silicon());
    let key = orbital_fingerprint(&o, &kernel);
    assert!(cache.load(&key).is_none());
    let fresh = cache.get_or_compute(&o, &kernel).unwrap();
    assert_eq!(cache.load(&key).unwrap(), fresh);
    assert_eq!(cache.get_or_compute(&o, &kernel).unwrap(), CoulombTensor::compute(&o, &kernel));
    assert_ne!(key, orbital_fingerprint(&o, &kernel.scaled(0.5)));
}

#[test]
fn exchange_falls_with_separation() {
    let js: Vec<f64> = [40.0, 50.0, 60.0]
        .iter()
        .map(|&s| {
            let o = orbitals(&double_well(s, 41, 90.0), 8);
            ci_spectrum(&o, &CoulombKernel::from_material(&silicon())).unwrap().j_uev
        })
        .collect();
    assert!(js[0] > js[1] && js[1] > js[2] && js[2] > 0.0, "{js:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn coulomb_tensor_has_pair_symmetry(sep in 20.0..70.0f64) {
        let o = orbitals(&double_well(sep, 21, 80.0), 4);
        let t = CoulombTensor::compute(&o, &CoulombKernel::from_material(&silicon()));
        prop_assert!(t.max_symmetry_violation() < 1e-12);
        let scale = t.get(0, 0, 0, 0);
        for (i, j, k, l) in [(0, 1, 2, 3), (1, 2, 0, 3), (3, 3, 1, 1)] {
            let a = t.get(i, j, k, l);
            prop_assert!((a - t.get(j, i, l, k)).abs() <= 1e-12 * scale);
            prop_assert!((a - t.get(k, l, i, j)).abs() <= 1e-12 * scale);
        }
    }
}
