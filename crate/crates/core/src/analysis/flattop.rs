use serde::{Deserialize, Serialize};

use super::curve::ExchangeCurve;
use crate::error::{Error, Result};
use crate::units::PLANCK_UEV_NS;

/// Stationary maximum of J(v).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flattop {
    pub v_star: f64,
    pub j_star_uev: f64,
    /// a in J ≈ J*(1 − a((v − v*)/v*)²).
    pub curvature: f64,
}

/// Locates the interior maximum by a parabola through the discrete argmax
/// and its two neighbours.
pub fn find_flattop(curve: &ExchangeCurve) -> Result<Flattop> {
    let p = &curve.points;
    let mut best = 0;
    for (i, q) in p.iter().enumerate() {
        if q.1 > p[best].1 {
            best = i;
        }
    }
    if best == 0 || best == p.len() - 1 {
        return Err(Error::NoFlattop { v: p[best].0 });
    }
    let (v0, j0) = p[best - 1];
    let (v1, j1) = p[best];
    let (v2, j2) = p[best + 1];
    // J = j1 + c1·t + c2·t² with t = v − v1
    let (ta, tb) = (v0 - v1, v2 - v1);
    let (da, db) = ((j0 - j1) / ta, (j2 - j1) / tb);
    let c2 = (db - da) / (tb - ta);
    let c1 = da - c2 * ta;
    let (v_star, j_star) = if c2 < 0.0 {
        (v1 - c1 / (2.0 * c2), j1 - c1 * c1 / (4.0 * c2))
    } else {
        (v1, j1)
    };
    let curvature = if j_star != 0.0 { -c2 * v_star * v_star / j_star } else { 0.0 };
    Ok(Flattop {
        v_star,
        j_star_uev: j_star,
        curvature,
    })
}

/// SWAP duration τ = h/(2J) in ns for J in μeV.
pub fn swap_time(j_uev: f64) -> Result<f64> {
    if !(j_uev > 0.0) || !j_uev.is_finite() {
        return Err(Error::InvalidInput(format!("SWAP time undefined for J = {j_uev} ueV")));
    }
    Ok(PLANCK_UEV_NS / (2.0 * j_uev))
}

/// Least-squares fit ln J = ln A + s·x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    /// s, the logarithmic slope per unit x.
    pub slope: f64,
    /// 1/|s|; absent for a flat curve.
    pub decay_length: Option<f64>,
    /// A, the value of the fitted line at x = 0.
    pub prefactor: f64,
    /// Coefficient of determination on ln J; absent when ln J is constant.
    pub r_squared: Option<f64>,
}

/// Fits an exponential to (x, J) pairs, J > 0.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExponentialFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, j)) = points.iter().find(|p| !(p.1 > 0.0) || !p.0.is_finite()) {
        return Err(Error::Fit(format!("log fit needs J > 0 (J({x}) = {j})")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_tot: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(ExponentialFit {
        slope,
        decay_length: (slope != 0.0).then(|| 1.0 / slope.abs()),
        prefactor: intercept.exp(),
        r_squared: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
    })
}

impl ExchangeCurve {
    /// [`fit_exponential`] over the whole curve.
    pub fn fit_exponential(&self) -> Result<ExponentialFit> {
        fit_exponential(&self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_vertex_is_exact() {
        let f = |v: f64| 3.0 - 3.0 * (v - 0.987_654).powi(2);
        let pts = [0.0, 0.3, 0.55, 0.8, 0.97, 1.02, 1.1].iter().map(|&v| (v, f(v))).collect();
        let top = find_flattop(&ExchangeCurve::new(pts, "t").unwrap()).unwrap();
        assert!((top.v_star - 0.987_654).abs() < 1e-8);
        assert!((top.j_star_uev - 3.0).abs() < 1e-12);
        assert!((top.curvature - top.v_star.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn monotone_curve_has_no_flattop() {
        let pts = (0..11).map(|i| (i as f64 * 0.1, (i as f64).exp())).collect();
        let c = ExchangeCurve::new(pts, "t").unwrap();
        assert!(matches!(find_flattop(&c), Err(Error::NoFlattop { v }) if v == 1.0));
    }

    #[test]
    fn swap_time_convention() {
        assert!((swap_time(0.4).unwrap() - 5.17).abs() < 5e-3);
        assert!((swap_time(0.8).unwrap() * 2.0 - swap_time(0.4).unwrap()).abs() < 1e-15);
        assert!((swap_time(2067.83).unwrap() - 1e-3).abs() < 1e-8);
        assert!(swap_time(0.0).is_err());
    }

    #[test]
    fn exponential_fit_recovers_parameters() {
        let pts: Vec<_> = (0..7).map(|i| {
            let x = 10.0 * i as f64;
            (x, 3.5 * (-x / 12.0).exp())
        }).collect();
        let fit = fit_exponential(&pts).unwrap();
        assert!((fit.decay_length.unwrap() - 12.0).abs() < 1e-10 * 12.0);
        assert!((fit.prefactor - 3.5).abs() < 1e-10 * 3.5);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits() {
        let flat: Vec<_> = (0..5).map(|i| (i as f64, 2.0)).collect();
        let fit = fit_exponential(&flat).unwrap();
        assert_eq!(fit.decay_length, None);
        assert_eq!(fit.r_squared, None);
        assert!(matches!(fit_exponential(&flat[..2]), Err(Error::Fit(_))));
        assert!(fit_exponential(&[(0.0, 1.0), (1.0, 0.0), (2.0, 1.0)]).is_err());
    }
}
