use thiserror::Error;

/// Failure modes of the material-point algorithms.
#[derive(Debug, Clone, Error)]
pub enum GlpdError {
    /// Parameter set violates a validity constraint (e.g. mu <= 0).
    #[error("invalid material parameters: {0}")]
    InvalidParams(String),

    /// Porosity argument outside [0, 1).
    #[error("porosity out of range [0,1): f = {0}")]
    PorosityRange(f64),

    /// The (phi, Sigma_eq) reduction loses meaning for the given trial state,
    /// typically because D1 or D2 turned non-positive (step too large) or the
    /// trial state is too degenerate to parametrize.
    #[error("locus parametrization breakdown: {0}")]
    ParametrizationBreakdown(String),

    /// Negative radicand or similar floating-point breakdown inside the
    /// reduction formulas.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// p = 0 has no hydrostatic locus branch; callers take the von Mises
    /// path with the mean stress left at its trial value.
    #[error("incompressible limit: p = 0 has no hydrostatic locus branch")]
    IncompressibleLimit,

    /// The plastic projection failed to converge within the iteration caps.
    #[error("projection did not converge: {0}")]
    ProjectionNoConvergence(String),

    /// A denominator of the consistent-tangent chain vanished at the solution
    /// (dG/dSigma_eq, dF/dphi, or the un-normalization factor). Callers may
    /// fall back to the elastic tangent for the affected point.
    #[error("singular consistent tangent: {0}")]
    SingularTangent(String),

    /// The consistent tangent was requested for an elastic solution; callers
    /// use the elastic operator there.
    #[error("consistent tangent requested for a non-plastic solution")]
    NotPlastic,

    /// Finite-difference probing could not evaluate the update at a perturbed
    /// point even after adjusting the step once.
    #[error("finite-difference probe failed: {0}")]
    FdProbeFailed(String),
}

pub type Result<T> = std::result::Result<T, GlpdError>;
