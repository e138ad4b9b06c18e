//! Exchange curves J(v) and the error budget built on them.

mod curve;
mod flattop;
mod susceptibility;
mod sweep;

pub use curve::{ExchangeCurve, J_FLOOR_UEV};
pub use flattop::{find_flattop, fit_exponential, swap_time, ExponentialFit, Flattop};
pub use susceptibility::{
    analyze_point, fault_tolerance_margin, log_sensitivity, rms_coupling_error, susceptibility, SusceptibilityReport, DEFAULT_DELTA,
    SIMPSON_NODES,
};
pub use sweep::{
    adaptive_flattop_sweep, coarse_grid, device_fingerprint, linspace, refined_grid, sweep_exchange, sweep_refined_if_peaked, COARSE_POINTS,
    REFINED_POINTS,
};
