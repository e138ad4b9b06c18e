use std::f64::consts::PI;

use rayon::prelude::*;

use super::{ControlPoint, DeviceLayout, GateElement, GateRole, GridGeometry, MaterialParams, PotentialGrid, Provenance, Rect};
use crate::error::{Error, Result};

/// Corner term of the pinned-surface solution for a rectangular gate.
fn corner(u: f64, w: f64, d: f64) -> f64 {
    (u * w / (d * (u * u + w * w + d * d).sqrt())).atan()
}

/// Potential energy (meV) at `(x, y)` in a plane `depth` nm below a
/// rectangular gate held at `applied_mv`, with the rest of the surface
/// pinned at zero.
///
/// The electrostatic potential is `(V/2π)·Σ g(u, w)` over the four corner
/// terms; the electron energy is its negative.
pub fn gate_potential(gate: &GateElement, applied_mv: f64, point: (f64, f64), depth: f64) -> Result<f64> {
    let (x, y) = point;
    if !x.is_finite() || !y.is_finite() || !applied_mv.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite gate potential input ({x}, {y}) at {applied_mv} mV"
        )));
    }
    if !(depth > 0.0) {
        return Err(Error::InvalidInput(format!("depth must be positive, got {depth}")));
    }
    Ok(-rect_potential(&gate.footprint, applied_mv, x, y, depth))
}

/// Electrostatic potential (mV) of a rectangle at voltage `v`.
pub(crate) fn rect_potential(r: &Rect, v: f64, x: f64, y: f64, d: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let l = x - r.x_min;
    let rr = r.x_max - x;
    let b = y - r.y_min;
    let t = r.y_max - y;
    v / (2.0 * PI) * (corner(l, b, d) + corner(l, t, d) + corner(rr, b, d) + corner(rr, t, d))
}

/// Applied voltage for every gate at control point `v`.
///
/// Plunger and barrier gates move affinely from `voltage_off` to
/// `voltage_on`; channel gates hold their fixed voltage.
pub fn interpolate_controls(layout: &DeviceLayout, control: ControlPoint) -> Vec<(&GateElement, f64)> {
    let v = control.value();
    layout
        .gates
        .iter()
        .map(|g| {
            let mv = match g.role {
                GateRole::Plunger | GateRole::Barrier => g.voltage_off_mv + v * (g.voltage_on_mv - g.voltage_off_mv),
                GateRole::Channel => g.voltage_off_mv,
            };
            (g, mv)
        })
        .collect()
}

/// Superposes all gate contributions on an `nx × ny` grid covering the
/// layout domain.
pub fn assemble_potential(layout: &DeviceLayout, control: ControlPoint, nx: usize, ny: usize) -> Result<PotentialGrid> {
    if nx < 16 || ny < 16 {
        return Err(Error::Config(format!("grid {nx}x{ny} below the 16x16 minimum")));
    }
    layout.validate()?;
    let geometry = GridGeometry::covering(&layout.domain, nx, ny)?;
    Ok(potential_on(layout, control, geometry))
}

pub(crate) fn potential_on(layout: &DeviceLayout, control: ControlPoint, geometry: GridGeometry) -> PotentialGrid {
    let applied = interpolate_controls(layout, control);
    let depth = layout.material.dot_depth_nm;
    let offset = -layout.background_offset_mv;
    let mut values = vec![0.0; geometry.len()];
    values
        .par_chunks_mut(geometry.nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = geometry.y(j);
            for (i, out) in row.iter_mut().enumerate() {
                let x = geometry.x(i);
                let mut e = offset;
                for (gate, mv) in &applied {
                    e -= rect_potential(&gate.footprint, *mv, x, y, depth);
                }
                *out = e;
            }
        });
    PotentialGrid {
        geometry,
        values,
        provenance: Provenance::GateModel,
    }
}

/// Biquadratic double well `(m*ω²/2)·(b·(x² − a²)²/(4a²) + y²)` centred on the
/// domain, with `ħω = confinement_mev` and `2a = separation_nm`.
///
/// `separation_nm == 0` gives the merged single harmonic well `(m*ω²/2)(x² + y²)`.
pub fn model_double_well(
    separation_nm: f64,
    confinement_mev: f64,
    barrier_scale: f64,
    material: &MaterialParams,
    domain: &Rect,
    nx: usize,
    ny: usize,
) -> Result<PotentialGrid> {
    if !(separation_nm >= 0.0) || !(confinement_mev > 0.0) || !barrier_scale.is_finite() {
        return Err(Error::InvalidInput(format!(
            "double well needs separation >= 0 and confinement > 0 (got {separation_nm} nm, {confinement_mev} meV)"
        )));
    }
    material.validate()?;
    let geometry = GridGeometry::covering(domain, nx, ny)?;
    // m*ω²/2 = (ħω)² / (4 ħ²/2m*)
    let k = confinement_mev * confinement_mev / (4.0 * material.kinetic_prefactor());
    let a = 0.5 * separation_nm;
    let (cx, cy) = domain.center();
    let mut values = Vec::with_capacity(geometry.len());
    for j in 0..geometry.ny {
        let y = geometry.y(j) - cy;
        for i in 0..geometry.nx {
            let x = geometry.x(i) - cx;
            let lateral = if a > 0.0 {
                let q = x * x - a * a;
                barrier_scale * q * q / (4.0 * a * a)
            } else {
                x * x
            };
            values.push(k * (lateral + y * y));
        }
    }
    PotentialGrid::new(geometry, values, Provenance::BiquadraticModel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::MaterialParams;

    fn gate(r: Rect, off: f64, on: f64) -> GateElement {
        GateElement::new("g", GateRole::Plunger, r, off, on).unwrap()
    }

    fn layout(gates: Vec<GateElement>) -> DeviceLayout {
        DeviceLayout {
            name: "t".into(),
            material: MaterialParams::silicon(),
            domain: Rect::new(-100.0, 100.0, -100.0, 100.0).unwrap(),
            background_offset_mv: 5.0,
            gates,
        }
    }

    #[test]
    fn infinite_gate_limit() {
        let g = gate(Rect::new(-1e10, 1e10, -1e10, 1e10).unwrap(), -80.0, -80.0);
        let e = gate_potential(&g, -80.0, (3.0, -7.0), 40.0).unwrap();
        assert!((e - 80.0).abs() < 1e-4, "{e}");
    }

    #[test]
    fn zero_voltage_and_bad_inputs() {
        let g = gate(Rect::new(-10.0, 10.0, -10.0, 10.0).unwrap(), 0.0, 0.0);
        assert_eq!(gate_potential(&g, 0.0, (1.0, 2.0), 40.0).unwrap(), 0.0);
        assert!(gate_potential(&g, 1.0, (f64::NAN, 2.0), 40.0).is_err());
        assert!(gate_potential(&g, 1.0, (0.0, 2.0), 0.0).is_err());
    }

    #[test]
    fn control_endpoints_and_midpoint() {
        let mut l = layout(vec![gate(Rect::new(-10.0, 10.0, 20.0, 40.0).unwrap(), -200.0, -100.0)]);
        l.gates.push(GateElement::fixed("c", GateRole::Channel, Rect::new(-5.0, 5.0, -5.0, 5.0).unwrap(), 50.0).unwrap());
        let at = |v| {
            interpolate_controls(&l, ControlPoint::new(v).unwrap())
                .into_iter()
                .map(|(_, mv)| mv)
                .collect::<Vec<_>>()
        };
        assert_eq!(at(0.0), vec![-200.0, 50.0]);
        assert_eq!(at(1.0), vec![-100.0, 50.0]);
        assert_eq!(at(0.5), vec![-150.0, 50.0]);
    }

    #[test]
    fn empty_layout_is_uniform_offset() {
        let grid = assemble_potential(&layout(vec![]), ControlPoint::ON, 16, 16).unwrap();
        assert!(grid.values.iter().all(|&v| v == -5.0));
    }

    #[test]
    fn rejects_small_or_uncovering_grids() {
        let l = layout(vec![]);
        assert!(matches!(assemble_potential(&l, ControlPoint::ON, 8, 16), Err(Error::Config(_))));
        assert!(matches!(assemble_potential(&l, ControlPoint::ON, 40, 20), Err(Error::Config(_))));
    }

    #[test]
    fn coincident_nodes_survive_refinement() {
        let l = layout(vec![gate(Rect::new(-30.0, 10.0, -20.0, 45.0).unwrap(), -120.0, 60.0)]);
        let c = ControlPoint::new(0.3).unwrap();
        let coarse = assemble_potential(&l, c, 31, 31).unwrap();
        let fine = assemble_potential(&l, c, 63, 63).unwrap();
        for j in 0..31 {
            for i in 0..31 {
                let a = coarse.at(i, j);
                let b = fine.at(2 * i + 1, 2 * j + 1);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn double_well_identities() {
        let m = MaterialParams::silicon();
        let dom = Rect::new(-100.0, 100.0, -100.0, 100.0).unwrap();
        let grid = model_double_well(60.0, 3.0, 1.5, &m, &dom, 199, 199).unwrap();
        let k = 9.0 / (4.0 * m.kinetic_prefactor());
        // node 99 is the centre, node 99 ± 30 sits at ±a
        assert!((grid.at(99, 99) - k * 30.0 * 30.0 * 1.5 / 4.0).abs() < 1e-12);
        assert!(grid.at(69, 99).abs() < 1e-12 && grid.at(129, 99).abs() < 1e-12);
        assert!(grid.at(99, 99) > 0.0);
    }
}
