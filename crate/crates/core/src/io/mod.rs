//! Configuration, run dispatch and result files.

mod config;
pub mod quantity;
mod report;
mod run;
mod validate;

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;

pub use config::{
    parse_config, AnalysisSpec, Command, ExportSpec, GateSpec, LayoutSource, LayoutSpec, MaterialSpec, OptimizeSpec,
    ParameterSpec, RectSpec, RunSpec, SolverSpec, ValidateSpec,
};
pub use report::{
    emit_plot_data, omega_csv, AnalysisSummary, BasisRow, CurveSummary, ExportSummary, OptimizeSummary, RunInfo, RunReport,
    ValidationRow, ValidationTable, Verdict,
};
pub use run::{run, TOOL_NAME};
pub use validate::{
    convergence_order, double_well_exchange, harmonic_energies, validation_table, CONVERGENCE_GRIDS, HARMONIC_DOMAIN_NM,
    HARMONIC_GRID,
};

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes to a sibling temporary file and renames it over `path`, so the
/// final path never holds a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
