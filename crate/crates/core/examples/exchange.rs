//! Exchange splitting of a model double well from configuration
//! interaction, against the two-site Hubbard estimate built from the same
//! orbitals.
//!
//! cargo run --release --example exchange

use flattop::device::{model_double_well, MaterialParams, Rect};
use flattop::eigen::{build_hamiltonian, lowest_eigenpairs, EigenSettings, OrbitalSet};
use flattop::twoelectron::{ci_spectrum, coulomb_element_with, hubbard_exchange_closed_form, CoulombKernel};

fn main() -> flattop::Result<()> {
    let material = MaterialParams::silicon();
    let domain = Rect::new(-100.0, 100.0, -100.0, 100.0)?;
    // weakened interaction keeps U below the orbital spacing, where the
    // single-band Hubbard picture applies
    let kernel = CoulombKernel::from_material(&material).scaled(0.1);
    println!("separation_nm  t_meV       U-V_meV   J_CI_ueV    J_Hubbard_ueV");
    for sep in [50.0, 60.0, 70.0] {
        let grid = model_double_well(sep, 3.0, 1.0, &material, &domain, 61, 61)?;
        let h = build_hamiltonian(&grid, &material)?;
        let o = lowest_eigenpairs(&h, 20, &EigenSettings::default())?;
        let t = 0.5 * (o.energies[1] - o.energies[0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = &o.wavefunctions;
        let lr = OrbitalSet {
            geometry: o.geometry,
            energies: vec![0.0; 2],
            wavefunctions: vec![
                w[0].iter().zip(&w[1]).map(|(a, b)| s * (a + b)).collect(),
                w[0].iter().zip(&w[1]).map(|(a, b)| s * (a - b)).collect(),
            ],
            one_body: None,
        };
        let u = coulomb_element_with(&lr, [0, 0, 0, 0], &kernel)? - coulomb_element_with(&lr, [0, 1, 0, 1], &kernel)?;
        let ci = ci_spectrum(&o, &kernel)?.j_uev;
        println!("{sep:>13.0}  {t:<10.4e}  {u:<8.4}  {ci:<10.4e}  {:.4e}", hubbard_exchange_closed_form(t, u));
    }
    Ok(())
}
