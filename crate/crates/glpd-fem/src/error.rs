//! Error type shared by mesh handling, assembly, and the Newton loop.

use glpd_core::GlpdError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    /// Mesh or input text could not be parsed; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Mesh fails a structural invariant (indices, Jacobians, sets).
    #[error("mesh: {0}")]
    Mesh(String),

    /// Zero pivot while factoring the constrained system.
    #[error("singular system: zero pivot at global dof {dof}")]
    Singular { dof: usize },

    /// Material integration failed at a Gauss point.
    #[error("element {elem}, gauss point {gp}: {source}")]
    Material {
        elem: usize,
        gp: usize,
        source: GlpdError,
    },

    /// A load step did not converge even after the allowed halvings.
    #[error("step {step}: no convergence after {halvings} halvings")]
    StepFailed { step: usize, halvings: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FemError>;
