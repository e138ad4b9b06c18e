//! Drives the run pipeline from a TOML configuration, as the `sim` binary
//! does, and reads the report back.
//!
//! cargo run --release --example run_config

use flattop::io::{parse_config, run, RunReport};

const CONFIG: &str = r#"
command = "validate"
layout = "channel-reference"

[validate]
separation = "40 nm"
confinement = "3 meV"
grid_points = 28
half_width = "80 nm"
"#;

fn main() -> flattop::Result<()> {
    let dir = std::env::temp_dir().join("flattop-run-config");
    let mut spec = parse_config(CONFIG)?;
    spec.output_dir = dir.clone();
    let report = run(&spec)?;
    let back = RunReport::from_toml(&std::fs::read_to_string(dir.join("report.toml"))?)?;
    assert_eq!(back.payload(), report.payload());
    for row in &report.validation.as_ref().expect("validate writes a table").rows {
        println!("{:<36} {:>12.5e}  {}", row.check, row.value, if row.passed { "pass" } else { "FAIL" });
    }
    println!("fingerprint {} ; files in {}", report.run.fingerprint, dir.display());
    Ok(())
}
