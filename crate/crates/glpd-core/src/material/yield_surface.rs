//! Yield criterion, its gradients, and the trigonometric parametrization of
//! the yield locus in the (Sigma_eq, Sigma_m) plane.

use crate::error::{GlpdError, Result};
use crate::material::params::MaterialParams;
use crate::tensor::{
    deviator_mean, moment_invariants, moment_mean_dev, vonmises_eq, MomentTensor3, SymTensor2,
    SYM_PAIRS,
};

/// Gurson-like criterion extended with the moment invariants:
/// `Phi = (Sigma_eq^2 + Q^2/b^2)/sigma_bar^2 + 2 p cosh(1.5 Sigma_m/sigma_bar)
///        - 1 - p^2` with `Q^2 = A_I M_I + A_II M_II`.
pub fn yield_function(
    sigma: &SymTensor2,
    moment: &MomentTensor3,
    sigma_bar: f64,
    p: f64,
    params: &MaterialParams,
) -> f64 {
    let (_, sigma_m) = deviator_mean(sigma);
    let sigma_eq = vonmises_eq(sigma);
    let (m_i, m_ii) = moment_invariants(moment);
    let q2 = params.a_i * m_i + params.a_ii * m_ii;
    let quad = (sigma_eq * sigma_eq + q2 / (params.b * params.b)) / (sigma_bar * sigma_bar);
    // p = 0 skips the hyperbolic branch entirely (avoids 0 * inf for large
    // mean stresses in the incompressible limit).
    let cosh_term = if p == 0.0 {
        0.0
    } else {
        2.0 * p * (1.5 * sigma_m / sigma_bar).cosh()
    };
    quad + cosh_term - 1.0 - p * p
}

/// Gradients of the criterion:
/// `dPhi/dSigma_ij = 3 Sigma'_ij/sigma_bar^2 + (p/sigma_bar) d_ij sinh(1.5 Sigma_m/sigma_bar)`,
/// `dPhi/dM_ijk = (1/(sigma_bar^2 b^2)) ((2/3) A_I d_ij M_mk + 3 A_II M'_ijk)`.
pub fn yield_normal(
    sigma: &SymTensor2,
    moment: &MomentTensor3,
    sigma_bar: f64,
    p: f64,
    params: &MaterialParams,
) -> (SymTensor2, MomentTensor3) {
    let (sigma_dev, sigma_m) = deviator_mean(sigma);
    let sb2 = sigma_bar * sigma_bar;
    let sinh_term = if p == 0.0 {
        0.0
    } else {
        p / sigma_bar * (1.5 * sigma_m / sigma_bar).sinh()
    };
    let mut d_sigma = (sigma_dev * (3.0 / sb2)).0;
    for a in 0..3 {
        d_sigma[a] += sinh_term;
    }

    let (m_mean, m_dev) = moment_mean_dev(moment);
    let mscale = 1.0 / (sb2 * params.b * params.b);
    let mut d_m = [[0.0; 3]; 6];
    for (a, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for k in 0..3 {
            let mut v = 3.0 * params.a_ii * m_dev.0[a][k];
            if i == j {
                v += 2.0 / 3.0 * params.a_i * m_mean[k];
            }
            d_m[a][k] = mscale * v;
        }
    }
    (SymTensor2(d_sigma), MomentTensor3(d_m))
}

/// One point of the parametrized yield locus.
#[derive(Clone, Copy, Debug)]
pub struct LocusPoint {
    /// `(1-p)^2 sigma_bar^2 cos^2(phi)`, the elliptic right-hand side that
    /// `Sigma_eq^2 + Q^2/b^2` must equal on the locus.
    pub rhs_eq2: f64,
    /// Mean stress on the locus (units of `sigma_bar`).
    pub sigma_m: f64,
    /// `d sigma_m / d phi` in closed form, regular through phi = 0.
    pub dsigma_m_dphi: f64,
    /// `cosh(1.5 sigma_m / sigma_bar) = 1 + u`, exact.
    pub cosh15: f64,
    /// `sinh(1.5 sigma_m / sigma_bar) = sign(phi) sqrt(u(u+2))`, exact.
    pub sinh15: f64,
}

/// Parametrizes the yield locus by `phi in [-pi/2, pi/2]`:
/// `Sigma_eq^2 + Q^2/b^2 = (1-p)^2 sigma_bar^2 cos^2 phi` and
/// `Sigma_m = (2/3) sigma_bar sgn(phi) arccosh(1 + a sin^2 phi)` with
/// `a = (1-p)^2/(2p)`.
///
/// Writing `u = a sin^2 phi`, the hyperbolic quantities reduce exactly:
/// `arccosh(1+u) = ln_1p(u + sqrt(u(u+2)))`, `cosh(1.5 Sigma_m/sigma_bar) = 1+u`,
/// `sinh(...) = sgn(phi) sqrt(u(u+2))`, and
/// `d Sigma_m/d phi = (4/3) sigma_bar sqrt(a) cos(phi)/sqrt(u+2)`,
/// all smooth through `phi = 0` with no series fallback.
pub fn parametrize_locus(phi: f64, p: f64, sigma_bar: f64) -> Result<LocusPoint> {
    if p == 0.0 {
        return Err(GlpdError::IncompressibleLimit);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(GlpdError::ParametrizationBreakdown(format!(
            "effective porosity p = {p} outside (0,1)"
        )));
    }
    if !(-std::f64::consts::FRAC_PI_2 - 1e-12..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&phi)
    {
        return Err(GlpdError::ParametrizationBreakdown(format!(
            "phi = {phi} outside [-pi/2, pi/2]"
        )));
    }
    let a = (1.0 - p) * (1.0 - p) / (2.0 * p);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let u = a * sin_phi * sin_phi;
    let root = (u * (u + 2.0)).sqrt();
    let sgn = if phi > 0.0 {
        1.0
    } else if phi < 0.0 {
        -1.0
    } else {
        0.0
    };
    let sigma_m = 2.0 / 3.0 * sigma_bar * sgn * (u + root).ln_1p();
    let dsigma_m_dphi = 4.0 / 3.0 * sigma_bar * a.sqrt() * cos_phi / (u + 2.0).sqrt();
    let c = (1.0 - p) * sigma_bar * cos_phi;
    Ok(LocusPoint {
        rhs_eq2: c * c,
        sigma_m,
        dsigma_m_dphi,
        cosh15: 1.0 + u,
        sinh15: sgn * root,
    })
}
