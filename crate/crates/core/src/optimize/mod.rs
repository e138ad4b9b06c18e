//! Derivative-free design search minimizing omega_effective at the flat-top
//! subject to J* ≥ J_min.

mod simplex;

use serde::{Deserialize, Serialize};

use crate::analysis::{adaptive_flattop_sweep, find_flattop, rms_coupling_error, DEFAULT_DELTA};
use crate::device::{DeviceLayout, GateRole, Rect};
use crate::error::{Error, Result};
use crate::twoelectron::SolverSettings;

pub use simplex::{minimize, SimplexSettings, PENALTY};

/// What a free parameter changes in the layout template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterKind {
    /// Voltage of every channel gate, mV.
    ChannelVoltage,
    /// |on − off| of every controlled plunger, mV; the on voltage and the
    /// direction of the swing are kept.
    PlungerSwing,
    /// Narrow dimension of every channel gate about its centre line, nm.
    ChannelWidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeParameter {
    pub name: String,
    pub kind: ParameterKind,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParameter {
    pub fn new(name: impl Into<String>, kind: ParameterKind, lower: f64, upper: f64) -> Result<Self> {
        let p = Self {
            name: name.into(),
            kind,
            lower,
            upper,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lower.is_finite() || !self.upper.is_finite() || !(self.lower < self.upper) {
            return Err(Error::InvalidInput(format!(
                "parameter {} needs finite bounds with lower < upper (got [{}, {}])",
                self.name, self.lower, self.upper
            )));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Minimize omega_effective at the flat-top over the free parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub template: DeviceLayout,
    pub parameters: Vec<FreeParameter>,
    /// Smallest acceptable peak coupling, μeV.
    pub j_min_uev: f64,
    pub delta: f64,
    /// Maximum number of design evaluations.
    pub budget: usize,
    pub solver: SolverSettings,
}

impl DesignProblem {
    pub fn new(template: DeviceLayout, parameters: Vec<FreeParameter>, j_min_uev: f64, budget: usize) -> Result<Self> {
        let p = Self {
            template,
            parameters,
            j_min_uev,
            delta: DEFAULT_DELTA,
            budget,
            solver: SolverSettings::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.parameters.is_empty() {
            return Err(Error::InvalidInput("design problem has no free parameters".into()));
        }
        for p in &self.parameters {
            p.validate()?;
        }
        if !(self.j_min_uev > 0.0) || !self.j_min_uev.is_finite() {
            return Err(Error::InvalidInput(format!("J_min must be positive, got {}", self.j_min_uev)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.budget < self.parameters.len() + 2 {
            return Err(Error::InvalidInput(format!(
                "budget {} is below dimension + 2 = {}",
                self.budget,
                self.parameters.len() + 2
            )));
        }
        self.template.validate()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.parameters.iter().map(|p| (p.lower, p.upper)).collect()
    }
}

/// Outcome of one design evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignEvaluation {
    /// NaN when the curve has no flat-top.
    pub omega_effective: f64,
    /// Peak J in μeV (largest sample when there is no flat-top; NaN when the
    /// curve itself was unusable).
    pub j_star_uev: f64,
    pub feasible: bool,
}

impl DesignEvaluation {
    pub fn infeasible(j_star_uev: f64) -> Self {
        Self {
            omega_effective: f64::NAN,
            j_star_uev,
            feasible: false,
        }
    }
}

/// One row of the optimization trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based evaluation counter.
    pub eval: usize,
    pub parameters: Vec<f64>,
    pub omega_effective: f64,
    pub j_star_uev: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    /// The evaluation budget ran out.
    Budget,
    /// The simplex shrank below the diameter tolerance.
    Converged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub parameter_names: Vec<String>,
    pub best_parameters: Vec<f64>,
    pub best_omega_effective: f64,
    pub j_star_uev: f64,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

impl DesignResult {
    /// `eval,param_<name>...,omega_eff,J_star_ueV,feasible`
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("eval");
        for name in &self.parameter_names {
            out.push_str(&format!(",param_{name}"));
        }
        out.push_str(",omega_eff,J_star_ueV,feasible\n");
        for e in &self.trace {
            out.push_str(&e.eval.to_string());
            for p in &e.parameters {
                out.push_str(&format!(",{p:.16e}"));
            }
            out.push_str(&format!(",{:.16e},{:.16e},{}\n", e.omega_effective, e.j_star_uev, e.feasible));
        }
        out
    }
}

/// Applies parameter values to a copy of the template layout.
pub fn apply_parameters(template: &DeviceLayout, parameters: &[FreeParameter], values: &[f64]) -> Result<DeviceLayout> {
    if parameters.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "{} values for {} parameters",
            values.len(),
            parameters.len()
        )));
    }
    let mut layout = template.clone();
    for (p, &x) in parameters.iter().zip(values) {
        if !(x >= p.lower && x <= p.upper) {
            return Err(Error::InvalidInput(format!(
                "{} = {x} outside [{}, {}]",
                p.name, p.lower, p.upper
            )));
        }
        for g in layout.gates.iter_mut() {
            match (p.kind, g.role) {
                (ParameterKind::ChannelVoltage, GateRole::Channel) => {
                    g.voltage_off_mv = x;
                    g.voltage_on_mv = x;
                }
                (ParameterKind::PlungerSwing, GateRole::Plunger) if g.is_controlled() => {
                    let dir = (g.voltage_off_mv - g.voltage_on_mv).signum();
                    g.voltage_off_mv = g.voltage_on_mv + dir * x;
                }
                (ParameterKind::ChannelWidth, GateRole::Channel) => {
                    let r = g.footprint;
                    let (cx, cy) = r.center();
                    g.footprint = if r.width() <= r.height() {
                        Rect::new(cx - 0.5 * x, cx + 0.5 * x, r.y_min, r.y_max)?
                    } else {
                        Rect::new(r.x_min, r.x_max, cy - 0.5 * x, cy + 0.5 * x)?
                    };
                }
                _ => {}
            }
        }
    }
    layout.validate()?;
    Ok(layout)
}

/// Adaptive sweep, flat-top search and RMS error for one parameter vector.
///
/// A curve without an interior maximum, or one that violates the curve
/// invariants, is an infeasible design rather than a failure.
pub fn evaluate_design(values: &[f64], problem: &DesignProblem) -> Result<DesignEvaluation> {
    let layout = apply_parameters(&problem.template, &problem.parameters, values)?;
    let curve = match adaptive_flattop_sweep(&layout, &problem.solver) {
        Ok(c) => c,
        Err(Error::Invariant(_)) => return Ok(DesignEvaluation::infeasible(f64::NAN)),
        Err(e) => return Err(e),
    };
    let top = match find_flattop(&curve) {
        Ok(t) => t,
        Err(Error::NoFlattop { .. }) => {
            let peak = curve.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            return Ok(DesignEvaluation::infeasible(peak));
        }
        Err(e) => return Err(e),
    };
    let rms = match rms_coupling_error(&curve, top.v_star, problem.delta) {
        Ok(r) => r,
        Err(Error::Domain(_) | Error::UndefinedSusceptibility { .. }) => {
            return Ok(DesignEvaluation::infeasible(top.j_star_uev))
        }
        Err(e) => return Err(e),
    };
    Ok(DesignEvaluation {
        omega_effective: rms / problem.delta,
        j_star_uev: top.j_star_uev,
        feasible: top.j_star_uev >= problem.j_min_uev,
    })
}

/// Nelder–Mead search over the problem's parameters with the physics
/// evaluator.
pub fn optimize_design(problem: &DesignProblem) -> Result<DesignResult> {
    problem.validate()?;
    let names = problem.parameters.iter().map(|p| p.name.clone()).collect();
    minimize(
        &problem.bounds(),
        names,
        problem.j_min_uev,
        &SimplexSettings::with_budget(problem.budget),
        |x| evaluate_design(x, problem),
    )
}
