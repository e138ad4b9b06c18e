use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    /// A computed result breaks a physical invariant (e.g. triplet ground state).
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e}){hint}")]
    Convergence {
        what: String,
        iterations: usize,
        residual: f64,
        hint: String,
    },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("susceptibility undefined: J({v0}) = {j} is not positive")]
    UndefinedSusceptibility { v0: f64, j: f64 },

    #[error("no flat-top: maximum of J lies at the sweep endpoint v = {v}")]
    NoFlattop { v: f64 },

    #[error("outside curve domain: {0}")]
    Domain(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("sweep failed at {} point(s): {}", failed.len(), summarize(failed))]
    PartialSweep {
        /// (v, J in μeV) for the points that succeeded.
        completed: Vec<(f64, f64)>,
        failed: Vec<(f64, String)>,
    },

    #[error("no feasible design among {} evaluations", trace.len())]
    Infeasible {
        trace: Vec<crate::optimize::TraceEntry>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn summarize(failed: &[(f64, String)]) -> String {
    failed
        .iter()
        .map(|(v, msg)| format!("v={v}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Process exit status associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Config(_) | Error::InvalidInput(_) => 2,
            Error::Convergence { .. } | Error::PartialSweep { .. } => 3,
            Error::Infeasible { .. } | Error::NoFlattop { .. } => 4,
            Error::Resource(_) | Error::Io(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
