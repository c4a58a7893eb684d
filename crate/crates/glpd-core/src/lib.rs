//! Constitutive kernel for the GLPD second-gradient model of porous ductile
//! metals: packed tensor algebra, the implicit stress/moment projection onto
//! the yield locus, and the exact consistent tangent of that projection.

pub mod crng;
pub mod error;
pub mod material;
pub mod tangent;
pub mod tensor;

pub use error::{GlpdError, Result};
