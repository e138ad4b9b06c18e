//! Lowest single-particle states of a model double well: energies,
//! tunnel splitting and orthonormality.
//!
//! cargo run --release --example orbitals

use flattop::device::{model_double_well, MaterialParams, Rect};
use flattop::eigen::{build_hamiltonian, check_orthonormality, lowest_eigenpairs, EigenSettings};

fn main() -> flattop::Result<()> {
    let material = MaterialParams::silicon();
    let domain = Rect::new(-90.0, 90.0, -90.0, 90.0)?;
    println!("separation_nm  E0_meV     E1_meV     2t_ueV");
    for sep in [0.0, 30.0, 45.0, 60.0, 75.0] {
        let grid = model_double_well(sep, 3.0, 1.0, &material, &domain, 61, 61)?;
        let h = build_hamiltonian(&grid, &material)?;
        let o = lowest_eigenpairs(&h, 4, &EigenSettings::default())?;
        assert!(check_orthonormality(&o) < 1e-8);
        println!(
            "{sep:>13.0}  {:<9.5}  {:<9.5}  {:.4e}",
            o.energies[0],
            o.energies[1],
            (o.energies[1] - o.energies[0]) * 1e3
        );
    }
    Ok(())
}
