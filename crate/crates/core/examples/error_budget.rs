//! Channel-gated flat-top against barrier-gated exponential control:
//! J(v), susceptibility and the fault-tolerance verdicts at matched J.
//!
//! cargo run --release --example error_budget

use flattop::analysis::{analyze_point, find_flattop, linspace, susceptibility, sweep_exchange, sweep_refined_if_peaked};
use flattop::device::reference::builtin;
use flattop::twoelectron::SolverSettings;

fn main() -> flattop::Result<()> {
    let settings = SolverSettings::default();
    let v = linspace(0.0, 1.1, 11);
    let channel = sweep_refined_if_peaked(&builtin("channel-reference")?, &v, &settings)?;
    let barrier = sweep_exchange(&builtin("barrier-reference")?, &v, &settings)?;

    println!("v      J_channel_ueV  J_barrier_ueV  omega_barrier");
    for &x in &v[1..v.len() - 1] {
        println!(
            "{x:<5.2}  {:<13.4e}  {:<13.4e}  {}",
            channel.interpolate(x)?,
            barrier.interpolate(x)?,
            // undefined where the stencil reaches J ≤ 0 near v = 0
            susceptibility(&barrier, x).map_or("-".into(), |w| format!("{w:.2}"))
        );
    }

    let top = find_flattop(&channel)?;
    println!("\nflat-top at v = {:.4}, J* = {:.4} ueV", top.v_star, top.j_star_uev);
    for delta in [0.005, 0.01, 0.02] {
        let r = analyze_point(&channel, top.v_star, delta)?;
        println!(
            "delta {delta:<5}  rms dJ/J {:.3e}  omega_eff {:.4}  1e-4 {} (margin {:.2})  1e-3 {} (margin {:.2})",
            r.rms_relative_error,
            r.omega_effective,
            if r.fault_tolerant_1e4 { "pass" } else { "fail" },
            r.margin_1e4,
            if r.fault_tolerant_1e3 { "pass" } else { "fail" },
            r.margin_1e3
        );
    }
    let r = analyze_point(&barrier, 0.99, 0.01)?;
    println!("barrier at v = 0.99: omega {:.2}, rms dJ/J {:.3e}", r.omega_pointwise, r.rms_relative_error);
    Ok(())
}
