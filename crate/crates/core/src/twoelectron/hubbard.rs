use nalgebra::DMatrix;

use super::ci::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::units::UEV_PER_MEV;

/// Closed-form two-site Hubbard exchange `(U/2)(√(1 + 16t²/U²) − 1)` in μeV.
pub fn hubbard_exchange_closed_form(t_mev: f64, u_mev: f64) -> f64 {
    let r = 16.0 * t_mev * t_mev / (u_mev * u_mev);
    // √(1+r) − 1 = r/(√(1+r) + 1) avoids cancellation when t ≪ U
    0.5 * u_mev * r / ((1.0 + r).sqrt() + 1.0) * UEV_PER_MEV
}

/// Two-site Hubbard exchange by diagonalizing the singlet sector
/// {(|LR⟩+|RL⟩)/√2, |LL⟩, |RR⟩}. The triplet sits at zero energy.
pub fn hubbard_exchange(t_mev: f64, u_mev: f64) -> Result<f64> {
    if !(u_mev > 0.0) || !t_mev.is_finite() {
        return Err(Error::InvalidInput(format!("Hubbard model needs U > 0 (t = {t_mev}, U = {u_mev})")));
    }
    let hop = -std::f64::consts::SQRT_2 * t_mev;
    let h = DMatrix::from_row_slice(3, 3, &[0.0, hop, hop, hop, u_mev, 0.0, hop, 0.0, u_mev]);
    let singlet = symmetric_eigenvalues(&h);
    Ok((0.0 - singlet[0]) * UEV_PER_MEV)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point() {
        let closed = hubbard_exchange_closed_form(0.1, 5.0);
        assert!((closed - 7.987_240_796_890_616).abs() < 1e-9);
        let numeric = hubbard_exchange(0.1, 5.0).unwrap();
        assert!(((numeric - closed) / closed).abs() < 1e-10);
    }

    #[test]
    fn superexchange_limit() {
        let j = hubbard_exchange_closed_form(0.01, 5.0);
        assert!((j - 4.0 * 0.01 * 0.01 / 5.0 * 1000.0).abs() / j < 1e-4);
    }
}
