//! Coarse text map of the channel-reference potential in the off (v = 0)
//! and on (v = 1) configurations.
//!
//! cargo run --release --example potential_map

use flattop::device::reference::builtin;
use flattop::device::{assemble_potential, ControlPoint};

fn main() -> flattop::Result<()> {
    let layout = builtin("channel-reference")?;
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for v in [0.0, 1.0] {
        let grid = assemble_potential(&layout, ControlPoint::new(v)?, 61, 61)?;
        let (lo, hi) = (grid.min(), grid.max());
        println!("v = {v}: potential {lo:.2} .. {hi:.2} meV (dark = low)");
        for j in (0..grid.ny()).rev().step_by(3) {
            let row: String = (0..grid.nx())
                .step_by(2)
                .map(|i| {
                    let t = (hi - grid.at(i, j)) / (hi - lo);
                    shades[((t * 9.0).round() as usize).min(9)]
                })
                .collect();
            println!("  {row}");
        }
    }
    Ok(())
}
