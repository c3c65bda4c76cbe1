use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("degenerate element {element}: measure {measure:e}")]
    DegenerateElement { element: usize, measure: f64 },

    /// The saddle-point system has a nontrivial null space. Each connected
    /// component without a natural boundary condition contributes one
    /// piecewise-constant null vector in (pressure, multiplier).
    #[error(
        "singular system: {reason} (inertia so far: {positive} positive, {negative} negative, \
         {remaining} unresolved)"
    )]
    Singular {
        reason: String,
        positive: usize,
        negative: usize,
        remaining: usize,
    },

    /// Local constraints do not remove the null space of a substructure.
    #[error("substructure {substructure}: insufficient coarse constraints ({detail})")]
    InsufficientConstraints { substructure: usize, detail: String },

    #[error("{operator} is not positive definite (curvature {value:e} at iteration {iteration})")]
    Indefinite {
        operator: &'static str,
        value: f64,
        iteration: usize,
    },

    #[error("PCG did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
