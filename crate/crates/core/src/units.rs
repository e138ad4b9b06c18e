//! Physical constants in the internal unit system (nm, meV, mV, ns).

/// ħ²/(2mₑ) in meV·nm².
pub const HBAR2_OVER_2ME: f64 = 38.099_821;

/// e²/(4πε₀) in meV·nm.
pub const COULOMB_MEV_NM: f64 = 1_439.964_548;

/// Planck constant h in μeV·ns.
pub const PLANCK_UEV_NS: f64 = 4.135_667_696;

pub const UEV_PER_MEV: f64 = 1_000.0;
