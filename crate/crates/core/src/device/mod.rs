//! Gate layouts, material parameters and the 2D confinement potential.

mod gates;
mod grid;
pub mod reference;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{COULOMB_MEV_NM, HBAR2_OVER_2ME};

pub use gates::{assemble_potential, gate_potential, interpolate_controls, model_double_well};
pub use grid::{GridGeometry, PotentialGrid, Provenance};
pub(crate) use grid::write_rows;

/// Upper slack on the normalized control voltage, so peak refinement can
/// bracket a maximum at v = 1.
pub const CONTROL_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Effective mass in units of the free-electron mass.
    pub effective_mass: f64,
    pub relative_permittivity: f64,
    /// Distance from the gate plane to the electron plane.
    pub dot_depth_nm: f64,
    /// Regularization length of the in-plane Coulomb kernel.
    pub softening_length_nm: f64,
}

impl MaterialParams {
    pub fn new(
        effective_mass: f64,
        relative_permittivity: f64,
        dot_depth_nm: f64,
        softening_length_nm: f64,
    ) -> Result<Self> {
        let m = Self {
            effective_mass,
            relative_permittivity,
            dot_depth_nm,
            softening_length_nm,
        };
        m.validate()?;
        Ok(m)
    }

    /// Silicon-like defaults: m* = 0.19, εr = 11.9, 40 nm depth, 6 nm softening.
    pub fn silicon() -> Self {
        Self {
            effective_mass: 0.19,
            relative_permittivity: 11.9,
            dot_depth_nm: 40.0,
            softening_length_nm: 6.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.effective_mass > 0.0
            && self.relative_permittivity >= 1.0
            && self.dot_depth_nm > 0.0
            && self.softening_length_nm > 0.0
            && [
                self.effective_mass,
                self.relative_permittivity,
                self.dot_depth_nm,
                self.softening_length_nm,
            ]
            .iter()
            .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "material parameters out of range: {self:?}"
            )))
        }
    }

    /// ħ²/(2m*) in meV·nm².
    pub fn kinetic_prefactor(&self) -> f64 {
        HBAR2_OVER_2ME / self.effective_mass
    }

    /// e²/(4πε₀εr) in meV·nm.
    pub fn coulomb_prefactor(&self) -> f64 {
        COULOMB_MEV_NM / self.relative_permittivity
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::silicon()
    }
}

/// Axis-aligned rectangle in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|x| x.is_finite());
        if finite && self.x_min < self.x_max && self.y_min < self.y_max {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate rectangle {self:?}")))
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_min < other.x_max
            && other.x_min < self.x_max
            && self.y_min < other.y_max
            && other.y_min < self.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateRole {
    Plunger,
    Channel,
    Barrier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateElement {
    pub name: String,
    pub role: GateRole,
    pub footprint: Rect,
    pub voltage_off_mv: f64,
    pub voltage_on_mv: f64,
}

impl GateElement {
    pub fn new(
        name: impl Into<String>,
        role: GateRole,
        footprint: Rect,
        voltage_off_mv: f64,
        voltage_on_mv: f64,
    ) -> Result<Self> {
        let g = Self {
            name: name.into(),
            role,
            footprint,
            voltage_off_mv,
            voltage_on_mv,
        };
        g.validate()?;
        Ok(g)
    }

    /// A fixed-voltage gate (off == on).
    pub fn fixed(name: impl Into<String>, role: GateRole, footprint: Rect, mv: f64) -> Result<Self> {
        Self::new(name, role, footprint, mv, mv)
    }

    pub fn validate(&self) -> Result<()> {
        self.footprint.validate()?;
        if !self.voltage_off_mv.is_finite() || !self.voltage_on_mv.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gate {} has non-finite voltage",
                self.name
            )));
        }
        if self.role == GateRole::Channel && self.voltage_off_mv != self.voltage_on_mv {
            return Err(Error::InvalidInput(format!(
                "channel gate {} must hold a constant voltage (off {} mV != on {} mV)",
                self.name, self.voltage_off_mv, self.voltage_on_mv
            )));
        }
        Ok(())
    }

    /// |voltage_on − voltage_off| in mV.
    pub fn swing_mv(&self) -> f64 {
        (self.voltage_on_mv - self.voltage_off_mv).abs()
    }

    pub fn is_controlled(&self) -> bool {
        self.role != GateRole::Channel && self.voltage_on_mv != self.voltage_off_mv
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceLayout {
    pub name: String,
    pub material: MaterialParams,
    pub domain: Rect,
    /// Uniform offset; far from all gates the potential energy is −e times this.
    pub background_offset_mv: f64,
    pub gates: Vec<GateElement>,
}

impl DeviceLayout {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.domain.validate()?;
        if !self.background_offset_mv.is_finite() {
            return Err(Error::InvalidInput("non-finite background offset".into()));
        }
        for g in &self.gates {
            g.validate()?;
            if !g.footprint.overlaps(&self.domain) {
                return Err(Error::Config(format!(
                    "gate {} lies entirely outside the simulation domain",
                    g.name
                )));
            }
        }
        Ok(())
    }

    pub fn gates_with_role(&self, role: GateRole) -> impl Iterator<Item = &GateElement> {
        self.gates.iter().filter(move |g| g.role == role)
    }

    /// Largest controlled swing |on − off|: the voltage reference used for Ω.
    pub fn control_swing_mv(&self) -> f64 {
        self.gates
            .iter()
            .filter(|g| g.is_controlled())
            .map(GateElement::swing_mv)
            .fold(0.0, f64::max)
    }
}

/// Normalized control voltage: 0 is the "off" configuration, 1 the "on"
/// configuration, and values up to 1 + [`CONTROL_EPSILON`] are accepted.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ControlPoint(f64);

impl ControlPoint {
    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && (0.0..=1.0 + CONTROL_EPSILON + 1e-12).contains(&v) {
            Ok(Self(v))
        } else {
            Err(Error::InvalidInput(format!(
                "control voltage v = {v} outside [0, {}]",
                1.0 + CONTROL_EPSILON
            )))
        }
    }

    pub const OFF: ControlPoint = ControlPoint(0.0);
    pub const ON: ControlPoint = ControlPoint(1.0);

    pub fn value(self) -> f64 {
        self.0
    }
}
