use std::path::PathBuf;

use crate::model::VehicleKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{kind} vehicle{} needs `{field}` in its spacing context", .vehicle.map(|v| format!(" #{v}")).unwrap_or_default())]
    MissingContext {
        kind: VehicleKind,
        vehicle: Option<usize>,
        field: &'static str,
    },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("collision at step {step}: vehicle #{vehicle} has spacing {spacing:.6} m")]
    Collision { step: usize, vehicle: usize, spacing: f64 },

    #[error("run {run} (seed {seed:#018x}) failed: {source}")]
    RunFailed {
        run: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error("malformed csv {path}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Innermost error, looking through [`Error::RunFailed`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::RunFailed { source, .. } => source.root(),
            other => other,
        }
    }
}
