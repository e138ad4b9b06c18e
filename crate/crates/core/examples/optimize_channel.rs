//! Tunes the channel-gate voltage of the channel-reference device to
//! flatten the flat-top while keeping J* above 0.1 ueV.
//!
//! cargo run --release --example optimize_channel

use flattop::device::reference::builtin;
use flattop::optimize::{optimize_design, DesignProblem, FreeParameter, ParameterKind};

fn main() -> flattop::Result<()> {
    let params = vec![FreeParameter::new("channel", ParameterKind::ChannelVoltage, 20.0, 40.0)?];
    let problem = DesignProblem::new(builtin("channel-reference")?, params, 0.1, 40)?;
    let result = optimize_design(&problem)?;
    print!("{}", result.trace_csv());
    println!(
        "best: channel = {:.3} mV, omega_eff = {:.5}, J* = {:.4} ueV ({:?})",
        result.best_parameters[0], result.best_omega_effective, result.j_star_uev, result.termination
    );
    Ok(())
}
