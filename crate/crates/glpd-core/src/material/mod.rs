//! The GLPD material point: parameters, elastic predictor, yield criterion,
//! implicit projection, and strain-driven stepping.

pub mod params;
pub mod predictor;
pub mod projection;
pub mod reduce;
pub mod step;
pub mod yield_surface;

pub use params::{effective_porosity, hardening_stress, HardeningCurve, MaterialParams};
pub use predictor::{elastic_predictor, MaterialState, TrialState};
pub use projection::{project, project_with_reference, ProjectionOpts, ProjectionSolution};
pub use reduce::{reduce_trial, residual_f, residual_g, ReducedTrial};
pub use step::{integrate_step, PlasticIncrements, StepInfo, StepMode, StepOpts};
pub use yield_surface::{parametrize_locus, yield_function, yield_normal, LocusPoint};
