use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Most negative J accepted as round-off around a true J ≥ 0, in μeV.
pub const J_FLOOR_UEV: f64 = -1e-4;

/// Sampled exchange coupling J(v) in μeV over the normalized control v.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeCurve {
    /// (v, J) pairs with strictly increasing v.
    pub points: Vec<(f64, f64)>,
    /// Content hash of the layout and solver settings that produced the curve.
    pub fingerprint: String,
}

impl ExchangeCurve {
    pub fn new(points: Vec<(f64, f64)>, fingerprint: impl Into<String>) -> Result<Self> {
        if points.len() < 5 {
            return Err(Error::InvalidInput(format!(
                "an exchange curve needs at least 5 points, got {}",
                points.len()
            )));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidInput(format!(
                    "curve abscissae must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(v, j) in &points {
            if !v.is_finite() || !j.is_finite() {
                return Err(Error::Invariant(format!("non-finite curve point ({v}, {j})")));
            }
            if j < J_FLOOR_UEV {
                return Err(Error::Invariant(format!(
                    "J({v}) = {j:e} ueV is below the {J_FLOOR_UEV:e} ueV floor; the triplet would be the ground state"
                )));
            }
        }
        Ok(Self {
            points,
            fingerprint: fingerprint.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn v(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn j(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// (first v, last v).
    pub fn domain(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Union of two curves with the same fingerprint. Where both sample the
    /// same v, `self` wins.
    pub fn merged(&self, other: &ExchangeCurve) -> Result<ExchangeCurve> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::InvalidInput("cannot merge curves of different devices".into()));
        }
        let mut points = self.points.clone();
        for &p in &other.points {
            if !points.iter().any(|q| (q.0 - p.0).abs() <= 1e-12) {
                points.push(p);
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        ExchangeCurve::new(points, self.fingerprint.clone())
    }

    /// Local cubic interpolation through the four nodes around `v`.
    pub fn interpolate(&self, v: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (hi - lo);
        if !(v >= lo - slack && v <= hi + slack) {
            return Err(Error::Domain(format!("v = {v} outside the sampled range [{lo}, {hi}]")));
        }
        let n = self.points.len();
        let upper = self.points.partition_point(|p| p.0 <= v).clamp(1, n - 1);
        let first = upper.saturating_sub(2).min(n - 4);
        let nodes = &self.points[first..first + 4];
        let mut acc = 0.0;
        for (a, &(va, ja)) in nodes.iter().enumerate() {
            let mut weight = 1.0;
            for (b, &(vb, _)) in nodes.iter().enumerate() {
                if a != b {
                    weight *= (v - vb) / (va - vb);
                }
            }
            acc += weight * ja;
        }
        Ok(acc)
    }

    /// `v,J_ueV` with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,J_ueV\n");
        for (v, j) in &self.points {
            out.push_str(&format!("{v:.16e},{j:.16e}\n"));
        }
        out
    }
}
