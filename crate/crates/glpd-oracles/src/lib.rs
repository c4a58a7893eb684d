//! Independent reference solvers for verifying the material kernel. Nothing
//! here is used by production code: each function re-solves a projection
//! problem by a different algorithm than the library (closed forms, generic
//! KKT Newton, a classical two-unknown Gurson return mapping) so the two
//! implementations can be compared numerically.

pub mod generators;
pub mod gurson;
pub mod j2;
pub mod kkt;
