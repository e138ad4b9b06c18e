//! Two-electron configuration interaction and the exchange splitting J.

mod brute_force;
mod ci;
mod coulomb;
mod exchange;
mod hartree_fock;
mod hubbard;

pub use brute_force::{brute_force_two_electron, MAX_PRODUCT_DIM};
pub use ci::{build_ci_sectors, diagonalize_ci, CISector, SpinSector, TwoElectronSpectrum};
pub use coulomb::{
    coulomb_element, coulomb_element_with, orbital_fingerprint, Convolver, CoulombKernel, CoulombTensor, TensorCache,
};
pub use exchange::{
    basis_convergence, ci_spectrum, exchange_splitting, exchange_splitting_with, SolverSettings, BASIS_STUDY_SIZES,
};
pub use hartree_fock::{hartree_fock_refine, HartreeFockOutcome, HartreeFockSettings, HF_ENERGY_TOL};
pub use hubbard::{hubbard_exchange, hubbard_exchange_closed_form};
