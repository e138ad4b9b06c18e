//! Built-in reference devices.
//!
//! `channel-reference` is the bistable channel layout: two vertical
//! accumulation rails (channel gates, fixed voltage) 90 nm apart. Each rail
//! is flanked on its outer side by an opposing pair of plungers covering its
//! upper and lower halves. At v = 0 the plungers pull the left electron up
//! and the right electron down; at v = 1 they are balanced and the electrons
//! sit side by side. The layout is mirror symmetric about v = 1, so J peaks
//! there.
//!
//! `barrier-reference` is a conventional pair: one horizontal rail cut by a
//! depletion barrier whose voltage is swept, with fixed outer plungers.
//!
//! Gate voltages are empirical choices that realize these configurations in
//! the frozen pinned-surface model; they are not measured device values.

use serde::{Deserialize, Serialize};

use super::{DeviceLayout, GateElement, GateRole, MaterialParams, Rect};
use crate::error::{Error, Result};

pub const CHANNEL_REFERENCE: &str = "channel-reference";
pub const BARRIER_REFERENCE: &str = "barrier-reference";

/// Looks up a built-in layout by name.
pub fn builtin(name: &str) -> Result<DeviceLayout> {
    match name {
        CHANNEL_REFERENCE => ChannelDesign::default().layout(),
        BARRIER_REFERENCE => BarrierDesign::default().layout(),
        other => Err(Error::Config(format!(
            "unknown built-in layout {other:?} (known: {CHANNEL_REFERENCE}, {BARRIER_REFERENCE})"
        ))),
    }
}

pub fn builtin_names() -> [&'static str; 2] {
    [CHANNEL_REFERENCE, BARRIER_REFERENCE]
}

/// Geometry and voltages of the channel layout. Lengths nm, voltages mV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelDesign {
    pub rail_width: f64,
    /// Centre-to-centre rail separation (on-state qubit separation).
    pub rail_pitch: f64,
    pub rail_length: f64,
    pub rail_mv: f64,
    pub plunger_width: f64,
    pub plunger_length: f64,
    /// Gap between a rail's outer edge and its plungers.
    pub plunger_gap: f64,
    /// Distance from y = 0 to the near edge of each plunger.
    pub plunger_inset: f64,
    /// Plunger voltage in the balanced (v = 1) configuration.
    pub plunger_on_mv: f64,
    /// Imbalance applied at v = 0: the attracting plunger sits at
    /// `on + swing`, the repelling one at `on − swing`.
    pub plunger_swing_mv: f64,
    pub half_extent: f64,
    pub background_mv: f64,
}

impl Default for ChannelDesign {
    fn default() -> Self {
        Self {
            rail_width: 45.0,
            rail_pitch: 90.0,
            rail_length: 100.0,
            rail_mv: 30.0,
            plunger_width: 30.0,
            plunger_length: 50.0,
            plunger_gap: 15.0,
            plunger_inset: 0.0,
            plunger_on_mv: -20.0,
            plunger_swing_mv: 120.0,
            half_extent: 150.0,
            background_mv: 0.0,
        }
    }
}

impl ChannelDesign {
    pub fn layout(&self) -> Result<DeviceLayout> {
        let mut gates = Vec::new();
        let half_len = 0.5 * self.rail_length;
        for (side, name) in [(-1.0, "L"), (1.0, "R")] {
            let xc = side * 0.5 * self.rail_pitch;
            let rail = Rect::new(xc - 0.5 * self.rail_width, xc + 0.5 * self.rail_width, -half_len, half_len)?;
            gates.push(GateElement::fixed(format!("C{name}"), GateRole::Channel, rail, self.rail_mv)?);
            let near = xc + side * (0.5 * self.rail_width + self.plunger_gap);
            let far = near + side * self.plunger_width;
            let (x0, x1) = (near.min(far), near.max(far));
            let (y0, y1) = (self.plunger_inset, self.plunger_inset + self.plunger_length);
            let top = Rect::new(x0, x1, y0, y1)?;
            let bottom = Rect::new(x0, x1, -y1, -y0)?;
            // left electron starts at the top, right electron at the bottom
            let (top_off, bottom_off) = if side < 0.0 {
                (self.plunger_on_mv + self.plunger_swing_mv, self.plunger_on_mv - self.plunger_swing_mv)
            } else {
                (self.plunger_on_mv - self.plunger_swing_mv, self.plunger_on_mv + self.plunger_swing_mv)
            };
            gates.push(GateElement::new(format!("P{name}T"), GateRole::Plunger, top, top_off, self.plunger_on_mv)?);
            gates.push(GateElement::new(format!("P{name}B"), GateRole::Plunger, bottom, bottom_off, self.plunger_on_mv)?);
        }
        let e = self.half_extent;
        let layout = DeviceLayout {
            name: CHANNEL_REFERENCE.into(),
            material: MaterialParams::silicon(),
            domain: Rect::new(-e, e, -e, e)?,
            background_offset_mv: self.background_mv,
            gates,
        };
        layout.validate()?;
        Ok(layout)
    }
}

/// Geometry and voltages of the conventional barrier-gated pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierDesign {
    pub rail_width: f64,
    pub rail_length: f64,
    pub rail_mv: f64,
    pub barrier_width: f64,
    pub barrier_off_mv: f64,
    pub barrier_on_mv: f64,
    pub plunger_width: f64,
    /// Distance from the centre to the inner edge of each outer plunger.
    pub plunger_offset: f64,
    pub plunger_off_mv: f64,
    pub plunger_on_mv: f64,
    pub half_extent: f64,
    pub background_mv: f64,
}

impl Default for BarrierDesign {
    fn default() -> Self {
        Self {
            rail_width: 30.0,
            rail_length: 240.0,
            rail_mv: 60.0,
            barrier_width: 30.0,
            barrier_off_mv: -40.0,
            barrier_on_mv: -10.0,
            plunger_width: 30.0,
            plunger_offset: 75.0,
            plunger_off_mv: -20.0,
            plunger_on_mv: -20.0,
            half_extent: 150.0,
            background_mv: 0.0,
        }
    }
}

impl BarrierDesign {
    pub fn layout(&self) -> Result<DeviceLayout> {
        let hw = 0.5 * self.rail_width;
        let hl = 0.5 * self.rail_length;
        let mut gates = vec![
            GateElement::fixed("C", GateRole::Channel, Rect::new(-hl, hl, -hw, hw)?, self.rail_mv)?,
            GateElement::new(
                "B",
                GateRole::Barrier,
                Rect::new(-0.5 * self.barrier_width, 0.5 * self.barrier_width, -3.0 * hw, 3.0 * hw)?,
                self.barrier_off_mv,
                self.barrier_on_mv,
            )?,
        ];
        for (side, name) in [(-1.0, "PL"), (1.0, "PR")] {
            let inner = side * self.plunger_offset;
            let outer = side * (self.plunger_offset + self.plunger_width);
            let r = Rect::new(inner.min(outer), inner.max(outer), -3.0 * hw, 3.0 * hw)?;
            gates.push(GateElement::new(name, GateRole::Plunger, r, self.plunger_off_mv, self.plunger_on_mv)?);
        }
        let e = self.half_extent;
        let layout = DeviceLayout {
            name: BARRIER_REFERENCE.into(),
            material: MaterialParams::silicon(),
            domain: Rect::new(-e, e, -e, e)?,
            background_offset_mv: self.background_mv,
            gates,
        };
        layout.validate()?;
        Ok(layout)
    }
}
