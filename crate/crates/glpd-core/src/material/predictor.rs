//! Material state, elastic predictor, and the elastic operators it is built
//! from.
//!
//! The moment predictor eliminates the kinematic vector `U^e` so that the
//! trial moment satisfies the admissibility constraint `M*_ijj = 0` exactly
//! (up to roundoff), not just approximately.

use crate::material::params::MaterialParams;
use crate::tensor::{
    deviator_mean, moment_from_mean_dev, moment_mean_dev, vonmises_eq, MomentTensor3, SymTensor2,
    Vector3, SYM_PAIRS,
};

/// Converged material-point state.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaterialState {
    /// Cauchy stress (MPa).
    pub sigma: SymTensor2,
    /// Moment (hyperstress) tensor (MPa*mm), admissible: `M_ijj = 0`.
    pub moment: MomentTensor3,
    /// Porosity.
    pub f: f64,
    /// Accumulated hardening strain (the argument of the hardening curve).
    pub e: f64,
}

impl MaterialState {
    pub fn initial(f0: f64) -> Self {
        Self {
            f: f0,
            ..Default::default()
        }
    }
}

/// Elastic trial state with its invariant decomposition precomputed.
#[derive(Clone, Debug)]
pub struct TrialState {
    pub sigma_star: SymTensor2,
    pub moment_star: MomentTensor3,
    /// Trial stress deviator.
    pub sigma_dev: SymTensor2,
    /// Trial von Mises equivalent.
    pub sigma_eq: f64,
    /// Trial mean stress.
    pub sigma_m: f64,
    /// Trial moment mean (over the first two indices).
    pub m_mean: Vector3,
    /// Trial moment deviator.
    pub m_dev: MomentTensor3,
}

impl TrialState {
    pub fn from_tensors(sigma_star: SymTensor2, moment_star: MomentTensor3) -> Self {
        let (sigma_dev, sigma_m) = deviator_mean(&sigma_star);
        let sigma_eq = vonmises_eq(&sigma_star);
        let (m_mean, m_dev) = moment_mean_dev(&moment_star);
        Self {
            sigma_star,
            moment_star,
            sigma_dev,
            sigma_eq,
            sigma_m,
            m_mean,
            m_dev,
        }
    }
}

/// Hooke stress increment `lambda tr(d_eps) I + 2 mu d_eps`.
pub fn elastic_stress_increment(d_eps: &SymTensor2, params: &MaterialParams) -> SymTensor2 {
    let tr = d_eps.trace();
    let mut out = d_eps.0;
    for c in &mut out {
        *c *= 2.0 * params.mu;
    }
    for a in 0..3 {
        out[a] += params.lambda * tr;
    }
    SymTensor2(out)
}

/// The kinematic elimination vector
/// `U^e_i = [lambda g_hhi + 2 mu g_ihh] / (2 lambda + 8 mu)`.
pub fn elimination_vector(d_gradw: &MomentTensor3, params: &MaterialParams) -> Vector3 {
    let tr12 = d_gradw.trace12();
    let tr23 = d_gradw.trace23();
    (tr12 * params.lambda + tr23 * 2.0 * params.mu) / (2.0 * params.lambda + 8.0 * params.mu)
}

/// Elastic moment increment
/// `(b^2/5) [lambda d_ij g_hhk + 2 mu g_ijk - 2 lambda d_ij U^e_k
///           - 2 mu (d_ik U^e_j + d_jk U^e_i)]`.
/// The `U^e` terms make the result exactly trace-free in (2,3).
pub fn elastic_moment_increment(d_gradw: &MomentTensor3, params: &MaterialParams) -> MomentTensor3 {
    let ue = elimination_vector(d_gradw, params);
    let tr12 = d_gradw.trace12();
    let (lambda, mu) = (params.lambda, params.mu);
    let scale = params.b * params.b / 5.0;
    let mut out = [[0.0; 3]; 6];
    for (a, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for k in 0..3 {
            let mut v = 2.0 * mu * d_gradw.0[a][k];
            if i == j {
                v += lambda * (tr12[k] - 2.0 * ue[k]);
            }
            if i == k {
                v -= 2.0 * mu * ue[j];
            }
            if j == k {
                v -= 2.0 * mu * ue[i];
            }
            out[a][k] = scale * v;
        }
    }
    MomentTensor3(out)
}

/// Elastic predictor: freezes plastic flow and advances (sigma, M) elastically.
pub fn elastic_predictor(
    state: &MaterialState,
    d_eps: &SymTensor2,
    d_gradw: &MomentTensor3,
    params: &MaterialParams,
) -> TrialState {
    let sigma_star = state.sigma + elastic_stress_increment(d_eps, params);
    let moment_star = state.moment + elastic_moment_increment(d_gradw, params);
    TrialState::from_tensors(sigma_star, moment_star)
}

/// Strain-like increment recovering a stress drop: `C^-1 X`, i.e.
/// `X'/(2 mu) + X_m/(3 lambda + 2 mu) I` with `X_m` the mean of `X`.
pub fn strain_compliance(x: &SymTensor2, params: &MaterialParams) -> SymTensor2 {
    let (dev, mean) = deviator_mean(x);
    dev * (1.0 / (2.0 * params.mu)) + SymTensor2::IDENTITY * (mean / params.three_bulk())
}

/// Gradient-like increment recovering a moment drop on admissible tensors:
/// `K(X)_ijk = (5/b^2) [X'_ijk/(2 mu) + d_ij X_mk/(3 lambda + 2 mu)]`.
/// For trace-free `X` the elastic moment increment of `K(X)` is `X` again
/// (right inverse of [`elastic_moment_increment`] on the admissible subspace).
pub fn moment_compliance(x: &MomentTensor3, params: &MaterialParams) -> MomentTensor3 {
    let (mean, dev) = moment_mean_dev(x);
    let s = 5.0 / (params.b * params.b);
    let out = dev * (s / (2.0 * params.mu));
    let mean_part = mean * (s / params.three_bulk());
    moment_from_mean_dev(&mean_part, &out)
}
