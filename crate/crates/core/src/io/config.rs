//! Run configuration: a TOML document with unit-suffixed physical values.
//!
//! ```toml
//! command = "analyze"
//! layout = "channel-reference"
//!
//! [solver]
//! nx = 49
//! ny = 49
//! basis_size = 20
//!
//! [analysis]
//! delta = 0.01
//! ```
//!
//! Every key is optional except `command` and `layout`. Unknown keys are
//! rejected. `layout` is either the name of a built-in device or a table
//! describing one (see [`LayoutSpec`]).

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::quantity::{mev, mv, nm, parse_quantity, uev};
use crate::analysis::DEFAULT_DELTA;
use crate::device::reference::builtin;
use crate::device::{DeviceLayout, GateElement, GateRole, MaterialParams, Rect, CONTROL_EPSILON};
use crate::eigen::EigenSettings;
use crate::error::{Error, Result};
use crate::optimize::{FreeParameter, ParameterKind};
use crate::twoelectron::{HartreeFockSettings, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sweep,
    Analyze,
    Optimize,
    Validate,
    ExportPotential,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Analyze => "analyze",
            Command::Optimize => "optimize",
            Command::Validate => "validate",
            Command::ExportPotential => "export-potential",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub effective_mass: f64,
    pub relative_permittivity: f64,
    #[serde(with = "nm")]
    pub dot_depth: f64,
    #[serde(with = "nm")]
    pub softening_length: f64,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        MaterialParams::silicon().into()
    }
}

impl From<MaterialParams> for MaterialSpec {
    fn from(m: MaterialParams) -> Self {
        Self {
            effective_mass: m.effective_mass,
            relative_permittivity: m.relative_permittivity,
            dot_depth: m.dot_depth_nm,
            softening_length: m.softening_length_nm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectSpec {
    #[serde(with = "nm")]
    pub x_min: f64,
    #[serde(with = "nm")]
    pub x_max: f64,
    #[serde(with = "nm")]
    pub y_min: f64,
    #[serde(with = "nm")]
    pub y_max: f64,
}

impl From<Rect> for RectSpec {
    fn from(r: Rect) -> Self {
        Self {
            x_min: r.x_min,
            x_max: r.x_max,
            y_min: r.y_min,
            y_max: r.y_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub name: String,
    pub role: GateRole,
    pub footprint: RectSpec,
    #[serde(with = "mv")]
    pub voltage_off: f64,
    #[serde(with = "mv")]
    pub voltage_on: f64,
}

/// A device written out in the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub name: String,
    #[serde(default)]
    pub material: MaterialSpec,
    pub domain: RectSpec,
    #[serde(with = "mv", default)]
    pub background: f64,
    pub gates: Vec<GateSpec>,
}

impl LayoutSpec {
    pub fn to_layout(&self) -> Result<DeviceLayout> {
        let rect = |r: &RectSpec| Rect::new(r.x_min, r.x_max, r.y_min, r.y_max);
        let m = &self.material;
        let layout = DeviceLayout {
            name: self.name.clone(),
            material: MaterialParams::new(m.effective_mass, m.relative_permittivity, m.dot_depth, m.softening_length)?,
            domain: rect(&self.domain)?,
            background_offset_mv: self.background,
            gates: self
                .gates
                .iter()
                .map(|g| GateElement::new(g.name.clone(), g.role, rect(&g.footprint)?, g.voltage_off, g.voltage_on))
                .collect::<Result<_>>()?,
        };
        layout.validate()?;
        Ok(layout)
    }
}

impl From<&DeviceLayout> for LayoutSpec {
    fn from(l: &DeviceLayout) -> Self {
        Self {
            name: l.name.clone(),
            material: l.material.into(),
            domain: l.domain.into(),
            background: l.background_offset_mv,
            gates: l
                .gates
                .iter()
                .map(|g| GateSpec {
                    name: g.name.clone(),
                    role: g.role,
                    footprint: g.footprint.into(),
                    voltage_off: g.voltage_off_mv,
                    voltage_on: g.voltage_on_mv,
                })
                .collect(),
        }
    }
}

/// `layout = "<built-in>"` or `[layout]` with a full device.
#[derive(Debug, Clone, PartialEq)]
pub enum LayoutSource {
    Builtin(String),
    Custom(LayoutSpec),
}

impl LayoutSource {
    pub fn resolve(&self) -> Result<DeviceLayout> {
        match self {
            LayoutSource::Builtin(name) => builtin(name),
            LayoutSource::Custom(spec) => spec.to_layout(),
        }
    }
}

impl Serialize for LayoutSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LayoutSource::Builtin(name) => s.serialize_str(name),
            LayoutSource::Custom(spec) => spec.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for LayoutSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LayoutSource;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a built-in layout name or a layout table")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<LayoutSource, E> {
                builtin(v).map_err(E::custom)?;
                Ok(LayoutSource::Builtin(v.to_owned()))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> std::result::Result<LayoutSource, A::Error> {
                LayoutSpec::deserialize(de::value::MapAccessDeserializer::new(map)).map(LayoutSource::Custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub nx: usize,
    pub ny: usize,
    pub basis_size: usize,
    /// Relative eigen-residual tolerance.
    pub eigen_tolerance: f64,
    pub max_applications: usize,
    pub hartree_fock: bool,
    pub hartree_fock_max_iter: usize,
    pub hartree_fock_mix: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let s = SolverSettings::default();
        let hf = HartreeFockSettings::default();
        Self {
            nx: s.nx,
            ny: s.ny,
            basis_size: s.basis_size,
            eigen_tolerance: s.eigen.tol,
            max_applications: s.eigen.max_applications,
            hartree_fock: false,
            hartree_fock_max_iter: hf.max_iter,
            hartree_fock_mix: hf.mix,
        }
    }
}

impl SolverSpec {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            nx: self.nx,
            ny: self.ny,
            basis_size: self.basis_size,
            eigen: EigenSettings {
                tol: self.eigen_tolerance,
                max_applications: self.max_applications,
            },
            hartree_fock: self.hartree_fock.then_some(HartreeFockSettings {
                max_iter: self.hartree_fock_max_iter,
                mix: self.hartree_fock_mix,
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        range("solver.nx", self.nx as f64, 5.0, 401.0)?;
        range("solver.ny", self.ny as f64, 5.0, 401.0)?;
        range("solver.basis_size", self.basis_size as f64, 2.0, 64.0)?;
        range("solver.eigen_tolerance", self.eigen_tolerance, 1e-14, 1e-4)?;
        range("solver.max_applications", self.max_applications as f64, 10.0, 1e8)?;
        range("solver.hartree_fock_max_iter", self.hartree_fock_max_iter as f64, 1.0, 1e4)?;
        range("solver.hartree_fock_mix", self.hartree_fock_mix, 1e-3, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    /// Relative control-voltage error ΔV/V.
    pub delta: f64,
    /// Error-rate thresholds each reported with a verdict and margin.
    pub thresholds: Vec<f64>,
    /// Uniform sweep points on [0, v_max].
    pub v_points: usize,
    pub v_max: f64,
    /// Add a cluster of points around an interior maximum.
    pub refine: bool,
    /// Where `analyze` evaluates the error budget; defaults to the flat-top.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<f64>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            thresholds: vec![1e-4, 1e-3],
            v_points: 11,
            v_max: 1.0 + CONTROL_EPSILON,
            refine: true,
            operating_point: None,
        }
    }
}

impl AnalysisSpec {
    fn validate(&self) -> Result<()> {
        range("analysis.delta", self.delta, 1e-6, 0.2)?;
        range("analysis.v_points", self.v_points as f64, 5.0, 1001.0)?;
        range("analysis.v_max", self.v_max, 0.1, 1.0 + CONTROL_EPSILON)?;
        if self.thresholds.is_empty() {
            return Err(Error::Parse("analysis.thresholds must not be empty".into()));
        }
        for &t in &self.thresholds {
            range("analysis.thresholds", t, 1e-12, 1.0)?;
        }
        if let Some(v) = self.operating_point {
            range("analysis.operating_point", v, 0.0, self.v_max)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSpec {
    pub name: String,
    pub kind: ParameterKind,
    /// Bound with the unit of `kind` (mV for voltages, nm for widths).
    pub lower: String,
    pub upper: String,
}

impl ParameterSpec {
    pub fn to_parameter(&self) -> Result<FreeParameter> {
        let unit = match self.kind {
            ParameterKind::ChannelVoltage | ParameterKind::PlungerSwing => mv::UNIT,
            ParameterKind::ChannelWidth => nm::UNIT,
        };
        let bound = |key: &str, text: &str| {
            parse_quantity(text, unit).map_err(|e| Error::Parse(format!("optimize.parameters.{}.{key}: {e}", self.name)))
        };
        FreeParameter::new(self.name.clone(), self.kind, bound("lower", &self.lower)?, bound("upper", &self.upper)?)
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    /// Minimum flat-top coupling for a design to count as feasible.
    #[serde(with = "uev")]
    pub j_min: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    pub parameters: Vec<ParameterSpec>,
}

fn default_budget() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportSpec {
    /// Control point of the exported potential.
    pub v: f64,
    /// Number of single-particle orbitals written next to the potential.
    pub orbitals: usize,
}

impl Default for ExportSpec {
    fn default() -> Self {
        Self { v: 1.0, orbitals: 0 }
    }
}

/// Model double well used by `validate`; see [`crate::device::model_double_well`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSpec {
    #[serde(with = "nm")]
    pub separation: f64,
    #[serde(with = "mev")]
    pub confinement: f64,
    /// Points per side of the brute-force comparison grid (at most 32).
    pub grid_points: usize,
    #[serde(with = "nm")]
    pub half_width: f64,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        Self {
            separation: 40.0,
            confinement: 3.0,
            grid_points: 28,
            half_width: 80.0,
        }
    }
}

impl ValidateSpec {
    fn validate(&self) -> Result<()> {
        range("validate.separation", self.separation, 0.0, 1e3)?;
        range("validate.confinement", self.confinement, 1e-2, 100.0)?;
        range("validate.grid_points", self.grid_points as f64, 8.0, 32.0)?;
        range("validate.half_width", self.half_width, 10.0, 1e3)
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Everything that defines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    pub layout: LayoutSource,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSpec>,
    #[serde(default)]
    pub export: ExportSpec,
    #[serde(default)]
    pub validate: ValidateSpec,
}

fn range(key: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::Parse(format!("{key} = {v} is outside the valid range [{lo}, {hi}]")))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    let spec: RunSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

impl RunSpec {
    /// A spec with every optional section at its default.
    pub fn new(command: Command, layout: LayoutSource) -> Self {
        Self {
            command,
            layout,
            output_dir: default_output_dir(),
            solver: SolverSpec::default(),
            analysis: AnalysisSpec::default(),
            optimize: None,
            export: ExportSpec::default(),
            validate: ValidateSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.analysis.validate()?;
        self.validate.validate()?;
        range("export.v", self.export.v, 0.0, 1.0 + CONTROL_EPSILON)?;
        range("export.orbitals", self.export.orbitals as f64, 0.0, 64.0)?;
        let layout = self.layout.resolve().map_err(|e| Error::Parse(format!("layout: {e}")))?;
        if let Some(opt) = &self.optimize {
            range("optimize.j_min", opt.j_min, 0.0, 1e6)?;
            if opt.parameters.is_empty() {
                return Err(Error::Parse("optimize.parameters must not be empty".into()));
            }
            let params = opt.parameters.iter().map(|p| p.to_parameter()).collect::<Result<Vec<_>>>()?;
            crate::optimize::DesignProblem::new(layout, params, opt.j_min, opt.budget)
                .map_err(|e| Error::Parse(format!("optimize: {e}")))?;
        }
        if self.command == Command::Optimize && self.optimize.is_none() {
            return Err(Error::Parse("command \"optimize\" needs an [optimize] section".into()));
        }
        Ok(())
    }

    /// The full document, defaults included; [`parse_config`] reproduces `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run spec serializes")
    }

    /// The document without `output_dir`, which does not affect results.
    /// Its SHA-256 is the run fingerprint.
    pub fn canonical_toml(&self) -> String {
        let mut doc: toml::Table = toml::from_str(&self.to_toml()).expect("run spec reparses");
        doc.remove("output_dir");
        toml::to_string(&doc).expect("table serializes")
    }

    pub fn fingerprint(&self) -> String {
        super::sha256_hex(self.canonical_toml().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_fully_defaulted() {
        let s = parse_config("command = \"analyze\"\nlayout = \"channel-reference\"\n").unwrap();
        assert_eq!(s.command, Command::Analyze);
        assert_eq!(s.solver, SolverSpec::default());
        assert_eq!(s.analysis, AnalysisSpec::default());
        assert_eq!(s.output_dir, PathBuf::from("out"));
        assert_eq!(s, RunSpec::new(Command::Analyze, LayoutSource::Builtin("channel-reference".into())));
    }

    #[test]
    fn unitless_voltage_is_rejected() {
        let text = r#"
command = "optimize"
layout = "channel-reference"
[optimize]
j_min = 0.1
parameters = []
"#;
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("missing unit"), "{e}");
        assert!(e.to_string().contains("j_min"), "{e}");
    }

    #[test]
    fn unknown_keys_and_ranges() {
        let unknown = parse_config("command = \"sweep\"\nlayout = \"barrier-reference\"\nvoltage = \"100 mV\"\n");
        assert!(unknown.unwrap_err().to_string().contains("voltage"));
        let bad = parse_config("command = \"sweep\"\nlayout = \"barrier-reference\"\n[solver]\nbasis_size = 1\n");
        assert!(bad.unwrap_err().to_string().contains("basis_size"));
        let missing = parse_config("command = \"sweep\"\nlayout = \"nowhere\"\n");
        assert!(missing.unwrap_err().to_string().contains("nowhere"));
    }

    #[test]
    fn custom_layout_round_trips() {
        let layout = builtin("channel-reference").unwrap();
        let mut spec = RunSpec::new(Command::Sweep, LayoutSource::Custom((&layout).into()));
        spec.optimize = Some(OptimizeSpec {
            j_min: 0.1,
            budget: 12,
            parameters: vec![ParameterSpec {
                name: "vc".into(),
                kind: ParameterKind::ChannelVoltage,
                lower: "20 mV".into(),
                upper: "40 mV".into(),
            }],
        });
        let text = spec.to_toml();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.layout.resolve().unwrap(), layout);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn fingerprint_ignores_output_dir() {
        let mut a = RunSpec::new(Command::Sweep, LayoutSource::Builtin("barrier-reference".into()));
        let f = a.fingerprint();
        a.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.fingerprint(), f);
        a.analysis.v_points = 21;
        assert_ne!(a.fingerprint(), f);
        assert_eq!(crate::io::sha256_hex(a.canonical_toml().as_bytes()), a.fingerprint());
    }
}
