use flattop::device::{model_double_well, MaterialParams, PotentialGrid, Rect};
use flattop::eigen::{build_hamiltonian, lowest_eigenpairs, check_orthonormality, EigenSettings, OrbitalSet};
use flattop::io::{convergence_order, harmonic_energies, HARMONIC_GRID};

fn double_well(sep: f64, n: usize) -> (PotentialGrid, MaterialParams) {
    let m = MaterialParams::silicon();
    let d = Rect::new(-90.0, 90.0, -60.0, 60.0).unwrap();
    (model_double_well(sep, 3.0, 1.0, &m, &d, n, n).unwrap(), m)
}

fn solve(grid: &PotentialGrid, m: &MaterialParams, k: usize) -> OrbitalSet {
    let h = build_hamiltonian(grid, m).unwrap();
    lowest_eigenpairs(&h, k, &EigenSettings::default()).unwrap()
}

#[test]
fn merged_well_matches_oscillator_levels() {
    let e = harmonic_energies(3.0, HARMONIC_GRID, 6).unwrap();
    for (got, want) in e.iter().zip([3.0, 6.0, 6.0, 9.0, 9.0, 9.0]) {
        assert!((got - want).abs() / want < 5e-3, "{e:?}");
    }
}

#[test]
fn second_order_grid_convergence() {
    let p = convergence_order(3.0).unwrap();
    assert!((1.7..=2.3).contains(&p), "{p}");
}

#[test]
fn double_well_parity() {
    let (g, m) = double_well(50.0, 59);
    let o = solve(&g, &m, 2);
    let nx = g.nx();
    for (k, sign) in [(0, 1.0), (1, -1.0)] {
        let w = &o.wavefunctions[k];
        let scale = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for j in 0..g.ny() {
            for i in 0..nx {
                let a = w[j * nx + i];
                let b = w[j * nx + nx - 1 - i];
                assert!((a - sign * b).abs() < 1e-6 * scale, "orbital {k} at ({i},{j})");
            }
        }
    }
}

#[test]
fn orthonormal_and_variational() {
    let (g, m) = double_well(40.0, 45);
    let o = solve(&g, &m, 8);
    assert!(check_orthonormality(&o) < 1e-8);
    assert!(o.energies.windows(2).all(|w| w[0] <= w[1]));
    assert!(o.energies[0] >= g.min());
    let one = solve(&g, &m, 1);
    assert!((one.energies[0] - o.energies[0]).abs() < 1e-9 * o.energies[0].abs().max(1.0));
}

#[test]
fn overlap_diagnostic() {
    let (g, m) = double_well(40.0, 21);
    let o = solve(&g, &m, 2);
    let dup = OrbitalSet {
        wavefunctions: vec![o.wavefunctions[0].clone(), o.wavefunctions[0].clone()],
        ..o.clone()
    };
    assert!((check_orthonormality(&dup) - 1.0).abs() < 1e-10);
    let doubled = OrbitalSet {
        wavefunctions: vec![o.wavefunctions[0].iter().map(|x| 2.0 * x).collect(), o.wavefunctions[1].clone()],
        ..o
    };
    assert!((check_orthonormality(&doubled) - 3.0).abs() < 1e-10);
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let (g, m) = double_well(45.0, 49);
    let a = solve(&g, &m, 10);
    let b = solve(&g, &m, 10);
    assert_eq!(a, b);
}

#[test]
fn orbital_export_format() {
    let (g, m) = double_well(45.0, 21);
    let o = solve(&g, &m, 2);
    let text = o.orbital_text(1);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# orbital 1 energy_meV "));
    let e: f64 = header.rsplit(' ').next().unwrap().parse().unwrap();
    assert_eq!(e, o.energies[1]);
    assert_eq!(lines.count(), g.ny());
}

#[test]
fn iteration_cap_is_a_convergence_error() {
    let (g, m) = double_well(45.0, 41);
    let h = build_hamiltonian(&g, &m).unwrap();
    let s = EigenSettings {
        tol: 1e-12,
        max_applications: 3,
    };
    let e = lowest_eigenpairs(&h, 6, &s).unwrap_err();
    assert_eq!(e.exit_code(), 3, "{e}");
}
