//! Reduction of the trial state to the scalar consistency equations.
//!
//! All quantities here are "tilde" variables: the trial tensors divided by the
//! current matrix flow stress `sigma_bar`. Because the reduced moment
//! corrections depend on the running equivalent-stress iterate `se`, the
//! reduction is re-evaluated inside the Newton loops.

use crate::error::{GlpdError, Result};
use crate::material::params::MaterialParams;
use crate::material::predictor::TrialState;
use crate::material::yield_surface::parametrize_locus;
use crate::tensor::{moment_tdot, MomentTensor3, SymTensor2, Vector3, SYM_PAIRS};

/// Trial state in reduced (tilde) variables at a given `se` iterate.
#[derive(Clone, Debug)]
pub struct ReducedTrial {
    /// Trial equivalent stress / sigma_bar.
    pub se_star: f64,
    /// Trial mean stress / sigma_bar.
    pub sm_star: f64,
    /// Trial stress deviator / sigma_bar.
    pub sd_star: SymTensor2,
    /// Trial moment mean / sigma_bar (units mm).
    pub mm_star: Vector3,
    /// Trial moment deviator / sigma_bar (units mm).
    pub md_star: MomentTensor3,
    /// `T_i = (M*'/sigma_bar)_ijj`, the trace vector of the reduced deviator.
    pub t_star: Vector3,
    /// Running equivalent-stress iterate (reduced).
    pub se: f64,
    /// `D1 = se + c1 A_I (se* - se)`.
    pub d1: f64,
    /// `D2 = se + (A_II/5) (se* - se)`.
    pub d2: f64,
    /// `D = (2/9)/D2 + c1/D1`.
    pub d: f64,
    /// `U_i = (T_i/D2 + Mm*_i/D1)/D`.
    pub u: Vector3,
    /// Corrected moment mean `Mm** = Mm* - c1 U`.
    pub mm_dd: Vector3,
    /// Corrected moment deviator
    /// `M**'_ijk = M*'_ijk - (1/15)(U_j d_ik + U_i d_jk - (2/3) U_k d_ij)`.
    pub md_dd: MomentTensor3,
    /// `M_I** = Mm** . Mm**`.
    pub mi_dd: f64,
    /// `M_II** = (3/2) M**' : M**'`.
    pub mii_dd: f64,
}

/// Derivatives of the reduced quantities with respect to the iterate `se`.
#[derive(Clone, Debug)]
pub struct SePartials {
    pub d1: f64,
    pub d2: f64,
    pub d: f64,
    pub u: Vector3,
    pub mm_dd: Vector3,
    pub md_dd: MomentTensor3,
    pub mi_dd: f64,
    pub mii_dd: f64,
}

/// `(1/15)(U_j d_ik + U_i d_jk - (2/3) U_k d_ij)`, symmetric in `(i, j)`.
pub fn u_correction(u: &Vector3) -> MomentTensor3 {
    let mut out = [[0.0; 3]; 6];
    for (a, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for k in 0..3 {
            let mut v = 0.0;
            if i == k {
                v += u[j];
            }
            if j == k {
                v += u[i];
            }
            if i == j {
                v -= 2.0 / 3.0 * u[k];
            }
            out[a][k] = v / 15.0;
        }
    }
    MomentTensor3(out)
}

/// Builds the reduced trial at flow stress `sigma_bar` and iterate
/// `sigma_eq_tilde` (the current reduced equivalent stress).
pub fn reduce_trial(
    trial: &TrialState,
    sigma_bar: f64,
    sigma_eq_tilde: f64,
    params: &MaterialParams,
) -> Result<ReducedTrial> {
    let inv = 1.0 / sigma_bar;
    let se_star = trial.sigma_eq * inv;
    let se = sigma_eq_tilde;
    let c1 = params.c1();
    let d1 = se + c1 * params.a_i * (se_star - se);
    let d2 = se + params.a_ii / 5.0 * (se_star - se);
    if !(d1 > 0.0 && d2 > 0.0) {
        return Err(GlpdError::ParametrizationBreakdown(format!(
            "D1 = {d1}, D2 = {d2} not both positive (se = {se}, se* = {se_star})"
        )));
    }
    let d = 2.0 / 9.0 / d2 + c1 / d1;
    let md_star = trial.m_dev * inv;
    let mm_star = trial.m_mean * inv;
    let t_star = md_star.trace23();
    let u = (t_star / d2 + mm_star / d1) / d;
    let md_dd = md_star - u_correction(&u);
    let mm_dd = mm_star - u * c1;
    let mi_dd = mm_dd.dot(&mm_dd);
    let mii_dd = 1.5 * moment_tdot(&md_dd, &md_dd);
    Ok(ReducedTrial {
        se_star,
        sm_star: trial.sigma_m * inv,
        sd_star: trial.sigma_dev * inv,
        mm_star,
        md_star,
        t_star,
        se,
        d1,
        d2,
        d,
        u,
        mm_dd,
        md_dd,
        mi_dd,
        mii_dd,
    })
}

impl ReducedTrial {
    /// Square of the moment amplification factor:
    /// `S^2 = 1 + A_I M_I**/(b^2 D1^2) + A_II M_II**/(b^2 D2^2)`.
    pub fn s_squared(&self, params: &MaterialParams) -> f64 {
        let b2 = params.b * params.b;
        1.0 + params.a_i * self.mi_dd / (b2 * self.d1 * self.d1)
            + params.a_ii * self.mii_dd / (b2 * self.d2 * self.d2)
    }

    /// Derivatives of every se-dependent reduced quantity with respect to the
    /// iterate `se` (at fixed trial and fixed sigma_bar).
    pub fn se_partials(&self, params: &MaterialParams) -> SePartials {
        let c1 = params.c1();
        let dd1 = 1.0 - c1 * params.a_i;
        let dd2 = 1.0 - params.a_ii / 5.0;
        let dd = -c1 / (self.d1 * self.d1) * dd1 - 2.0 / 9.0 / (self.d2 * self.d2) * dd2;
        // U = (T/D2 + Mm*/D1)/D: product/quotient rule in D, D1, D2.
        let coef_t = -(dd / (self.d * self.d * self.d2) + dd2 / (self.d * self.d2 * self.d2));
        let coef_m = -(dd / (self.d * self.d * self.d1) + dd1 / (self.d * self.d1 * self.d1));
        let du = self.t_star * coef_t + self.mm_star * coef_m;
        let dmd = -u_correction(&du);
        let dmm = du * (-c1);
        let dmi = 2.0 * self.mm_dd.dot(&dmm);
        let dmii = 3.0 * moment_tdot(&self.md_dd, &dmd);
        SePartials {
            d1: dd1,
            d2: dd2,
            d: dd,
            u: du,
            mm_dd: dmm,
            md_dd: dmd,
            mi_dd: dmi,
            mii_dd: dmii,
        }
    }

    /// `G` and `dG/dse` at the current iterate, plus the factor `S`:
    /// `G = se S - (1-p) cos phi`.
    pub fn g_with_derivative(
        &self,
        phi: f64,
        p: f64,
        params: &MaterialParams,
    ) -> Result<(f64, f64, f64)> {
        let s2 = self.s_squared(params);
        if !(s2 > 0.0) || !s2.is_finite() {
            return Err(GlpdError::NumericalBreakdown(format!(
                "S^2 = {s2} in consistency residual"
            )));
        }
        let s = s2.sqrt();
        let g = self.se * s - (1.0 - p) * phi.cos();
        let b2 = params.b * params.b;
        let sp = self.se_partials(params);
        let ds2 = params.a_i * sp.mi_dd / (b2 * self.d1 * self.d1)
            - 2.0 * params.a_i * self.mi_dd / (b2 * self.d1 * self.d1 * self.d1) * sp.d1
            + params.a_ii * sp.mii_dd / (b2 * self.d2 * self.d2)
            - 2.0 * params.a_ii * self.mii_dd / (b2 * self.d2 * self.d2 * self.d2) * sp.d2;
        let dg = s + self.se * ds2 / (2.0 * s);
        Ok((g, dg, s))
    }
}

/// Elliptic-branch residual `G = se S - (1-p) cos phi`; its root ties the
/// reduced equivalent stress to the locus parameter.
pub fn residual_g(
    phi: f64,
    sigma_eq_tilde: f64,
    reduced: &ReducedTrial,
    p: f64,
    params: &MaterialParams,
) -> Result<f64> {
    debug_assert!((reduced.se - sigma_eq_tilde).abs() <= 1e-12 * sigma_eq_tilde.abs().max(1.0));
    let (g, _, _) = reduced.g_with_derivative(phi, p, params)?;
    Ok(g)
}

/// Mean-stress consistency residual
/// `F = (6 mu/(3 lambda + 2 mu)) (sm* - sm(phi)) se - p (se* - se) sinh(1.5 sm(phi))`
/// in reduced units. For `p = 0` the mean stress stays elastic and `F = 0` by
/// convention.
pub fn residual_f(
    phi: f64,
    sigma_eq_tilde: f64,
    reduced: &ReducedTrial,
    p: f64,
    params: &MaterialParams,
) -> Result<f64> {
    debug_assert!((reduced.se - sigma_eq_tilde).abs() <= 1e-12 * sigma_eq_tilde.abs().max(1.0));
    if p == 0.0 {
        return Ok(0.0);
    }
    let locus = parametrize_locus(phi, p, 1.0)?;
    Ok(params.k_mu() * (reduced.sm_star - locus.sigma_m) * reduced.se
        - p * (reduced.se_star - reduced.se) * locus.sinh15)
}
