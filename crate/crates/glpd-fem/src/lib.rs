//! Minimal 2D plane-strain finite elements for the GLPD second-gradient
//! model. Displacements carry the usual two DOFs per node; a nodal symmetric
//! tensor field W supplies the strain gradients through C0 interpolation and
//! is tied to eps(u) at the Gauss points by a penalty. 8-node serendipity
//! quadrilaterals with 2x2 sub-integration, a banded direct solver, and a
//! Newton loop switchable between consistent, elastic, and explicit-plastic
//! tangent modes.

pub mod band;
pub mod dof;
pub mod element;
pub mod error;
pub mod mesh;
pub mod quad8;
pub mod sim;
pub mod solve;

pub use band::{BandLu, BandMatrix};
pub use dof::{Constraints, DofMap, LoadProgram, LoadStep, DOF_PER_NODE};
pub use element::{element_forces_stiffness, GaussPointState, TangentMode};
pub use error::{FemError, Result};
pub use mesh::{notched_strip, structured_strip, Mesh};
pub use sim::{run_simulation, CurveRow, SimConfig, SimResult, SnapshotRow};
pub use solve::{
    assemble, solve_load_step, Assembly, ConvergenceLog, FeState, LogEntry, Model, StepOutcome,
};
