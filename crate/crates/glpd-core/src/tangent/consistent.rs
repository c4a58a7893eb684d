//! Exact consistent tangent of the plastic projection.
//!
//! The converged projection defines the end-of-step `(sigma, M)` implicitly
//! through the two scalar consistency residuals, the moment corrections, the
//! hardening fixed point, and the reduction by the flow stress. This module
//! differentiates that map exactly, in the same reduced (tilde) variables the
//! projection iterates on, then un-normalizes and chains through the elastic
//! predictor. All packed derivatives carry input pair weights (see the
//! module docs of [`super`]), so the stages compose by plain matrix algebra.

use crate::error::{GlpdError, Result};
use crate::material::params::{hardening_stress, MaterialParams};
use crate::material::predictor::{MaterialState, TrialState};
use crate::material::projection::ProjectionSolution;
use crate::material::reduce::reduce_trial;
use crate::material::yield_surface::parametrize_locus;
use crate::tensor::{PAIR_W, SYM_PAIRS};

use super::{
    elastic_moment_matrix, hooke_matrix, kd, moment_index, Mat1818, Mat186, Mat618, Mat66,
    TangentBlocks,
};

/// Assembles the four tangent blocks at a converged plastic projection.
///
/// `trial` and `state` must be the inputs the projection was run with. Fails
/// with [`GlpdError::NotPlastic`] for elastic fallbacks and with
/// [`GlpdError::SingularTangent`] when one of the chain denominators
/// (`dG/d(se)`, `dF/dphi`, the un-normalization factor) vanishes; the caller
/// falls back to the elastic operator in that case.
pub fn consistent_tangent(
    solution: &ProjectionSolution,
    trial: &TrialState,
    state: &MaterialState,
    params: &MaterialParams,
) -> Result<TangentBlocks> {
    if solution.elastic_fallback {
        return Err(GlpdError::NotPlastic);
    }
    let sb = solution.sigma_bar;
    let se = solution.sigma_eq_tilde;
    let p = solution.p;
    let red = reduce_trial(trial, sb, se, params)?;
    if !(red.se_star > 1e-10) {
        return Err(GlpdError::SingularTangent(format!(
            "deviator-free trial (se* = {:e}): the locus vertex has no smooth tangent",
            red.se_star
        )));
    }
    let sp = red.se_partials(params);

    let mu = params.mu;
    let tb = params.three_bulk();
    let b2 = params.b * params.b;
    let c1 = params.c1();
    let (a_i, a_ii) = (params.a_i, params.a_ii);
    let (d1, d2, dd) = (red.d1, red.d2, red.d);
    let se_star = red.se_star;
    let sds = red.sd_star.0;

    // Trial equivalent stress gradient.
    let mut dse_star_ds = [0.0; 6];
    for a in 0..6 {
        dse_star_ds[a] = PAIR_W[a] * 1.5 * sds[a] / se_star;
    }

    // D1, D2, D move with the trial stress only through se*.
    let mut dd1_ds = [0.0; 6];
    let mut dd2_ds = [0.0; 6];
    let mut dd_ds = [0.0; 6];
    for a in 0..6 {
        dd1_ds[a] = c1 * a_i * dse_star_ds[a];
        dd2_ds[a] = a_ii / 5.0 * dse_star_ds[a];
        dd_ds[a] = -c1 / (d1 * d1) * dd1_ds[a] - 2.0 / 9.0 / (d2 * d2) * dd2_ds[a];
    }

    // U = (T*/D2 + Mm*/D1)/D: quotient rule for stress columns, direct linear
    // dependence for moment columns.
    let mut du_ds = [[0.0; 6]; 3];
    for a in 0..6 {
        let coef_t = -(dd_ds[a] / (dd * dd * d2) + dd2_ds[a] / (dd * d2 * d2));
        let coef_m = -(dd_ds[a] / (dd * dd * d1) + dd1_ds[a] / (dd * d1 * d1));
        for i in 0..3 {
            du_ds[i][a] = red.t_star[i] * coef_t + red.mm_star[i] * coef_m;
        }
    }
    let mut du_dm = [[0.0; 18]; 3];
    for (c, &(pp, qq)) in SYM_PAIRS.iter().enumerate() {
        for r in 0..3 {
            let col = moment_index(c, r);
            for i in 0..3 {
                let dt = 0.5 * (kd(i, pp) * kd(qq, r) + kd(i, qq) * kd(pp, r))
                    - kd(pp, qq) * kd(i, r) / 3.0;
                let dmm = kd(pp, qq) * kd(i, r) / 3.0;
                du_dm[i][col] = PAIR_W[c] * (dt / d2 + dmm / d1) / dd;
            }
        }
    }

    // Corrected moment mean Mm** = Mm* - c1 U and deviator
    // M**' = M*' - (1/15)(U_j d_ik + U_i d_jk - (2/3) U_k d_ij).
    let mut dmm_dd_ds = [[0.0; 6]; 3];
    let mut dmd_dd_ds = [[0.0; 6]; 18];
    for a in 0..6 {
        for k in 0..3 {
            dmm_dd_ds[k][a] = -c1 * du_ds[k][a];
        }
        for (ao, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            for k in 0..3 {
                let mut v = 0.0;
                if i == k {
                    v += du_ds[j][a];
                }
                if j == k {
                    v += du_ds[i][a];
                }
                if i == j {
                    v -= 2.0 / 3.0 * du_ds[k][a];
                }
                dmd_dd_ds[moment_index(ao, k)][a] = -v / 15.0;
            }
        }
    }
    let mut dmm_dd_dm = [[0.0; 18]; 3];
    let mut dmd_dd_dm = [[0.0; 18]; 18];
    for (c, &(pp, qq)) in SYM_PAIRS.iter().enumerate() {
        for r in 0..3 {
            let col = moment_index(c, r);
            for k in 0..3 {
                dmm_dd_dm[k][col] =
                    PAIR_W[c] * kd(pp, qq) * kd(k, r) / 3.0 - c1 * du_dm[k][col];
            }
            for (ao, &(i, j)) in SYM_PAIRS.iter().enumerate() {
                for k in 0..3 {
                    let psym = 0.5 * (kd(i, pp) * kd(j, qq) + kd(i, qq) * kd(j, pp));
                    let direct =
                        PAIR_W[c] * (psym - kd(i, j) * kd(pp, qq) / 3.0) * kd(k, r);
                    let mut corr = 0.0;
                    if i == k {
                        corr += du_dm[j][col];
                    }
                    if j == k {
                        corr += du_dm[i][col];
                    }
                    if i == j {
                        corr -= 2.0 / 3.0 * du_dm[k][col];
                    }
                    dmd_dd_dm[moment_index(ao, k)][col] = direct - corr / 15.0;
                }
            }
        }
    }

    // Invariants M_I** = Mm**.Mm**, M_II** = (3/2) M**':M**'.
    let mdd = red.md_dd.0;
    let mut dmi_dd_ds = [0.0; 6];
    let mut dmii_dd_ds = [0.0; 6];
    for a in 0..6 {
        let mut mi = 0.0;
        for k in 0..3 {
            mi += red.mm_dd[k] * dmm_dd_ds[k][a];
        }
        dmi_dd_ds[a] = 2.0 * mi;
        let mut mii = 0.0;
        for ao in 0..6 {
            for k in 0..3 {
                mii += PAIR_W[ao] * mdd[ao][k] * dmd_dd_ds[moment_index(ao, k)][a];
            }
        }
        dmii_dd_ds[a] = 3.0 * mii;
    }
    let mut dmi_dd_dm = [0.0; 18];
    let mut dmii_dd_dm = [0.0; 18];
    for m in 0..18 {
        let mut mi = 0.0;
        for k in 0..3 {
            mi += red.mm_dd[k] * dmm_dd_dm[k][m];
        }
        dmi_dd_dm[m] = 2.0 * mi;
        let mut mii = 0.0;
        for ao in 0..6 {
            for k in 0..3 {
                mii += PAIR_W[ao] * mdd[ao][k] * dmd_dd_dm[moment_index(ao, k)][m];
            }
        }
        dmii_dd_dm[m] = 3.0 * mii;
    }

    // G = se S - (1 - p) cos phi: partials at fixed phi, then the implicit
    // solution se(phi, trial).
    let (_, dg_dse, s) = red.g_with_derivative(solution.phi, p, params)?;
    if dg_dse.abs() <= 1e-12 * s.max(1.0) {
        return Err(GlpdError::SingularTangent(format!(
            "dG/d(se) = {dg_dse:e} at the solution"
        )));
    }
    let gm = se / (2.0 * s);
    let mut dse_ds = [0.0; 6];
    for a in 0..6 {
        let dg = gm
            * (a_i * dmi_dd_ds[a] / (b2 * d1 * d1)
                + a_ii * dmii_dd_ds[a] / (b2 * d2 * d2)
                - 2.0 * a_i * red.mi_dd * dd1_ds[a] / (b2 * d1 * d1 * d1)
                - 2.0 * a_ii * red.mii_dd * dd2_ds[a] / (b2 * d2 * d2 * d2));
        dse_ds[a] = -dg / dg_dse;
    }
    let mut dse_dm = [0.0; 18];
    for m in 0..18 {
        let dg = gm
            * (a_i * dmi_dd_dm[m] / (b2 * d1 * d1)
                + a_ii * dmii_dd_dm[m] / (b2 * d2 * d2));
        dse_dm[m] = -dg / dg_dse;
    }

    // Mean-stress residual F ties phi to the trial; totals carry the phi
    // chain. In the incompressible limit the mean stress stays elastic.
    let mut tse_ds = dse_ds;
    let mut tse_dm = dse_dm;
    let mut dsm_ds = [0.0; 6];
    let mut dsm_dm = [0.0; 18];
    let sm;
    if p > 0.0 {
        let locus = parametrize_locus(solution.phi, p, 1.0)?;
        sm = locus.sigma_m;
        let dg_dphi = (1.0 - p) * solution.phi.sin();
        let dse_dphi = -dg_dphi / dg_dse;
        let bf = params.k_mu() * (red.sm_star - sm) + p * locus.sinh15;
        let df_dphi = (-params.k_mu() * se - 1.5 * p * (se_star - se) * locus.cosh15)
            * locus.dsigma_m_dphi
            + bf * dse_dphi;
        let f_scale = params.k_mu() * se + p * locus.cosh15 * (1.0 + se_star - se);
        if df_dphi.abs() <= 1e-12 * f_scale.max(1.0) {
            return Err(GlpdError::SingularTangent(format!(
                "dF/dphi = {df_dphi:e} at phi = {:e}",
                solution.phi
            )));
        }
        for a in 0..6 {
            let diag = if a < 3 { params.k_mu() * se / 3.0 } else { 0.0 };
            let df = diag - p * locus.sinh15 * dse_star_ds[a] + bf * dse_ds[a];
            let dphi = -df / df_dphi;
            tse_ds[a] = dse_ds[a] + dse_dphi * dphi;
            dsm_ds[a] = locus.dsigma_m_dphi * dphi;
        }
        for m in 0..18 {
            let dphi = -bf * dse_dm[m] / df_dphi;
            tse_dm[m] = dse_dm[m] + dse_dphi * dphi;
            dsm_dm[m] = locus.dsigma_m_dphi * dphi;
        }
    } else {
        sm = red.sm_star;
        for v in dsm_ds.iter_mut().take(3) {
            *v = 1.0 / 3.0;
        }
    }

    // Projected reduced stress: the deviator keeps the trial direction scaled
    // by se/se*, the mean comes from the locus.
    let ratio = se / se_star;
    let mut sd_sol = [0.0; 6];
    for a in 0..6 {
        sd_sol[a] = ratio * sds[a];
    }
    let mut dst_ds = [[0.0; 6]; 6];
    let mut dst_dm = [[0.0; 18]; 6];
    for (ao, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for (ai, &(pp, qq)) in SYM_PAIRS.iter().enumerate() {
            let idev = 0.5 * (kd(i, pp) * kd(j, qq) + kd(i, qq) * kd(j, pp))
                - kd(i, j) * kd(pp, qq) / 3.0;
            let mut v = sds[ao] / se_star * tse_ds[ai] + ratio * PAIR_W[ai] * idev
                - ratio / se_star * sds[ao] * dse_star_ds[ai];
            if i == j {
                v += dsm_ds[ai];
            }
            dst_ds[ao][ai] = v;
        }
        for m in 0..18 {
            let mut v = sds[ao] / se_star * tse_dm[m];
            if i == j {
                v += dsm_dm[m];
            }
            dst_dm[ao][m] = v;
        }
    }

    // Projected reduced moment: relaxation factors R1 = se/D1, R2 = se/D2 on
    // the corrected mean and deviator.
    let r1 = se / d1;
    let r2 = se / d2;
    let mut dr1_ds = [0.0; 6];
    let mut dr2_ds = [0.0; 6];
    for a in 0..6 {
        dr1_ds[a] = tse_ds[a] / d1 - se / (d1 * d1) * (dd1_ds[a] + sp.d1 * tse_ds[a]);
        dr2_ds[a] = tse_ds[a] / d2 - se / (d2 * d2) * (dd2_ds[a] + sp.d2 * tse_ds[a]);
    }
    let mut dr1_dm = [0.0; 18];
    let mut dr2_dm = [0.0; 18];
    for m in 0..18 {
        dr1_dm[m] = tse_dm[m] / d1 - se / (d1 * d1) * sp.d1 * tse_dm[m];
        dr2_dm[m] = tse_dm[m] / d2 - se / (d2 * d2) * sp.d2 * tse_dm[m];
    }
    let mut dmt_ds = [[0.0; 6]; 18];
    let mut dmt_dm = [[0.0; 18]; 18];
    for (ao, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for k in 0..3 {
            let o = moment_index(ao, k);
            for a in 0..6 {
                let ddev = r2 * (dmd_dd_ds[o][a] + sp.md_dd.0[ao][k] * tse_ds[a])
                    + dr2_ds[a] * mdd[ao][k];
                let mut v = ddev;
                if i == j {
                    v += r1 * (dmm_dd_ds[k][a] + sp.mm_dd[k] * tse_ds[a])
                        + dr1_ds[a] * red.mm_dd[k];
                }
                dmt_ds[o][a] = v;
            }
            for m in 0..18 {
                let ddev = r2 * (dmd_dd_dm[o][m] + sp.md_dd.0[ao][k] * tse_dm[m])
                    + dr2_dm[m] * mdd[ao][k];
                let mut v = ddev;
                if i == j {
                    v += r1 * (dmm_dd_dm[k][m] + sp.mm_dd[k] * tse_dm[m])
                        + dr1_dm[m] * red.mm_dd[k];
                }
                dmt_dm[o][m] = v;
            }
        }
    }
    // Projected moment invariants M_I = R1^2 M_I**, M_II = R2^2 M_II**.
    let mut dmi_ds = [0.0; 6];
    let mut dmii_ds = [0.0; 6];
    for a in 0..6 {
        dmi_ds[a] = 2.0 * r1 * dr1_ds[a] * red.mi_dd
            + r1 * r1 * (dmi_dd_ds[a] + sp.mi_dd * tse_ds[a]);
        dmii_ds[a] = 2.0 * r2 * dr2_ds[a] * red.mii_dd
            + r2 * r2 * (dmii_dd_ds[a] + sp.mii_dd * tse_ds[a]);
    }
    let mut dmi_dm = [0.0; 18];
    let mut dmii_dm = [0.0; 18];
    for m in 0..18 {
        dmi_dm[m] = 2.0 * r1 * dr1_dm[m] * red.mi_dd
            + r1 * r1 * (dmi_dd_dm[m] + sp.mi_dd * tse_dm[m]);
        dmii_dm[m] = 2.0 * r2 * dr2_dm[m] * red.mii_dd
            + r2 * r2 * (dmii_dd_dm[m] + sp.mii_dd * tse_dm[m]);
    }

    // Flow-stress sensitivity from the hardening fixed point
    // sb = R(e + de(sb)). Written with denominators cleared so that perfect
    // plasticity (h = 0) yields d(sb) = 0 without a division.
    let f = state.f;
    let (_, h) = hardening_stress(state.e + solution.delta_e, &params.hardening);
    let mut dsb_s = [0.0; 6];
    let mut dsb_m = [0.0; 18];
    let mut nn = 1.0;
    if h != 0.0 {
        let denom = 1.0 - h * solution.delta_e / sb;
        if denom.abs() <= 1e-12 {
            return Err(GlpdError::SingularTangent(format!(
                "hardening feedback factor 1 - h de/sb = {denom:e}"
            )));
        }
        let scale = h * sb / ((1.0 - f) * denom);
        let b25 = b2 / 5.0;
        for a in 0..6 {
            let diag = if a < 3 { sm / tb } else { 0.0 };
            let rhs = PAIR_W[a] * sd_sol[a] / (2.0 * mu) - se / (3.0 * mu) * tse_ds[a]
                + diag
                - 3.0 * sm / tb * dsm_ds[a]
                - dmii_ds[a] / (6.0 * mu * b25)
                - 3.0 * dmi_ds[a] / (2.0 * tb * b25);
            dsb_s[a] = scale * rhs;
        }
        for (c, &(pp, qq)) in SYM_PAIRS.iter().enumerate() {
            for r in 0..3 {
                let m = moment_index(c, r);
                let mut rhs = -se / (3.0 * mu) * tse_dm[m] - 3.0 * sm / tb * dsm_dm[m]
                    - dmii_dm[m] / (6.0 * mu * b25)
                    - 3.0 * dmi_dm[m] / (2.0 * tb * b25)
                    + PAIR_W[c] * r2 * mdd[c][r] / (2.0 * mu * b25);
                if pp == qq {
                    rhs += r1 * red.mm_dd[r] / (tb * b25);
                }
                dsb_m[m] = scale * rhs;
            }
        }
    }

    // Un-normalization: the reduced trial itself depends on sb.
    let mut sstar_t = [0.0; 6];
    for a in 0..6 {
        sstar_t[a] = sds[a] + if a < 3 { red.sm_star } else { 0.0 };
    }
    let mut mstar_t = [0.0; 18];
    for c in 0..6 {
        for r in 0..3 {
            mstar_t[moment_index(c, r)] = trial.moment_star.0[c][r] / sb;
        }
    }
    if h != 0.0 {
        let mut corr = 0.0;
        for a in 0..6 {
            corr += dsb_s[a] * sstar_t[a];
        }
        for m in 0..18 {
            corr += dsb_m[m] * mstar_t[m];
        }
        nn += corr / sb;
        if nn.abs() <= 1e-10 {
            return Err(GlpdError::SingularTangent(format!(
                "un-normalization factor N = {nn:e}"
            )));
        }
    }
    let mut dsbs_s = [0.0; 6];
    let mut dsbs_m = [0.0; 18];
    for a in 0..6 {
        dsbs_s[a] = dsb_s[a] / (sb * nn);
    }
    for m in 0..18 {
        dsbs_m[m] = dsb_m[m] / (sb * nn);
    }

    // Physical derivatives: Sigma = sb Stilde(trial/sb), so each block picks
    // up the trial contractions against the flow-stress sensitivity.
    let mut st_sol = [0.0; 6];
    for a in 0..6 {
        st_sol[a] = sd_sol[a] + if a < 3 { sm } else { 0.0 };
    }
    let mut mt_sol = [0.0; 18];
    for (ao, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for k in 0..3 {
            let mut v = r2 * mdd[ao][k];
            if i == j {
                v += r1 * red.mm_dd[k];
            }
            mt_sol[moment_index(ao, k)] = v;
        }
    }
    let mut a_ss = Mat66::zeros();
    let mut a_sm = Mat618::zeros();
    let mut a_ms = Mat186::zeros();
    let mut a_mm = Mat1818::zeros();
    for ao in 0..6 {
        let mut pre = st_sol[ao];
        for b in 0..6 {
            pre -= dst_ds[ao][b] * sstar_t[b];
        }
        for m in 0..18 {
            pre -= dst_dm[ao][m] * mstar_t[m];
        }
        for b in 0..6 {
            a_ss[(ao, b)] = pre * dsbs_s[b] + dst_ds[ao][b];
        }
        for m in 0..18 {
            a_sm[(ao, m)] = pre * dsbs_m[m] + dst_dm[ao][m];
        }
    }
    for o in 0..18 {
        let mut pre = mt_sol[o];
        for b in 0..6 {
            pre -= dmt_ds[o][b] * sstar_t[b];
        }
        for m in 0..18 {
            pre -= dmt_dm[o][m] * mstar_t[m];
        }
        for b in 0..6 {
            a_ms[(o, b)] = pre * dsbs_s[b] + dmt_ds[o][b];
        }
        for m in 0..18 {
            a_mm[(o, m)] = pre * dsbs_m[m] + dmt_dm[o][m];
        }
    }

    // Chain through the elastic predictor derivatives.
    let cw = hooke_matrix(params);
    let em = elastic_moment_matrix(params);
    Ok(TangentBlocks {
        dsig_deps: a_ss * cw,
        dsig_dgradw: a_sm * em,
        dm_deps: a_ms * cw,
        dm_dgradw: a_mm * em,
    })
}
