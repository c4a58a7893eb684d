//! Tangent operators of the stress/moment update: the elastic operator, the
//! exact consistent tangent of the plastic projection, a finite-difference
//! oracle, and comparison reports.
//!
//! Packing: stress rows/columns use the 6-component order of
//! [`SYM_PAIRS`](crate::tensor::SYM_PAIRS); moment rows/columns flatten
//! `(pair, last index)` to `3 * pair + k`. Every block carries the pair
//! multiplicity weights of its *input* components, so `block * packed
//! increment` is the exact directional derivative and each entry equals the
//! central finite difference with respect to that packed component.

mod consistent;
mod fd;

pub use consistent::consistent_tangent;
pub use fd::fd_tangent;

use nalgebra::SMatrix;

use crate::material::params::MaterialParams;
use crate::tensor::{MomentTensor3, SymTensor2, PAIR_W, SYM_PAIRS};

pub type Mat66 = SMatrix<f64, 6, 6>;
pub type Mat618 = SMatrix<f64, 6, 18>;
pub type Mat186 = SMatrix<f64, 18, 6>;
pub type Mat1818 = SMatrix<f64, 18, 18>;

/// Derivatives of the end-of-step `(sigma, M)` with respect to the step
/// increments `(d_eps, d_gradw)` at fixed start-of-step state.
#[derive(Clone, Debug)]
pub struct TangentBlocks {
    /// d sigma / d eps (MPa).
    pub dsig_deps: Mat66,
    /// d sigma / d grad w (MPa mm).
    pub dsig_dgradw: Mat618,
    /// d M / d eps (MPa mm).
    pub dm_deps: Mat186,
    /// d M / d grad w (MPa mm^2).
    pub dm_dgradw: Mat1818,
}

/// Flattened moment column index for `(pair, k)`.
#[inline]
pub fn moment_index(pair: usize, k: usize) -> usize {
    3 * pair + k
}

/// Packs a moment tensor into the flattened 18-component layout.
pub fn flatten_moment(m: &MomentTensor3) -> [f64; 18] {
    let mut out = [0.0; 18];
    for a in 0..6 {
        for k in 0..3 {
            out[moment_index(a, k)] = m.0[a][k];
        }
    }
    out
}

/// Inverse of [`flatten_moment`].
pub fn unflatten_moment(v: &[f64; 18]) -> MomentTensor3 {
    let mut out = [[0.0; 3]; 6];
    for a in 0..6 {
        for k in 0..3 {
            out[a][k] = v[moment_index(a, k)];
        }
    }
    MomentTensor3(out)
}

#[inline]
fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Packed Hooke operator `lambda d_ij d_pq + mu (d_ip d_jq + d_iq d_jp)`,
/// input-weighted: `hooke_matrix * packed(d_eps)` is the packed stress
/// increment of
/// [`elastic_stress_increment`](crate::material::predictor::elastic_stress_increment).
pub fn hooke_matrix(params: &MaterialParams) -> Mat66 {
    let mut out = Mat66::zeros();
    for (ao, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for (ai, &(p, q)) in SYM_PAIRS.iter().enumerate() {
            let v = params.lambda * kd(i, j) * kd(p, q)
                + params.mu * (kd(i, p) * kd(j, q) + kd(i, q) * kd(j, p));
            out[(ao, ai)] = PAIR_W[ai] * v;
        }
    }
    out
}

/// Packed elastic moment operator (input-weighted), the derivative of
/// [`elastic_moment_increment`](crate::material::predictor::elastic_moment_increment)
/// with respect to the gradient increment, including the `U^e` elimination
/// that keeps the result trace-free in (2,3).
pub fn elastic_moment_matrix(params: &MaterialParams) -> Mat1818 {
    let (lam, mu) = (params.lambda, params.mu);
    let denom = 2.0 * lam + 8.0 * mu;
    let scale = params.b * params.b / 5.0;
    let mut out = Mat1818::zeros();
    for (a, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for (c, &(p, q)) in SYM_PAIRS.iter().enumerate() {
            for k in 0..3 {
                for r in 0..3 {
                    // d U^e_t / d g_pqr at fixed t, symmetrized in (p, q).
                    let due = |t: usize| {
                        (lam * kd(p, q) * kd(t, r)
                            + mu * (kd(t, p) * kd(q, r) + kd(t, q) * kd(p, r)))
                            / denom
                    };
                    let mut v =
                        mu * (kd(i, p) * kd(j, q) + kd(i, q) * kd(j, p)) * kd(k, r);
                    if i == j {
                        v += lam * (kd(p, q) * kd(k, r) - 2.0 * due(k));
                    }
                    if i == k {
                        v -= 2.0 * mu * due(j);
                    }
                    if j == k {
                        v -= 2.0 * mu * due(i);
                    }
                    out[(moment_index(a, k), moment_index(c, r))] =
                        PAIR_W[c] * scale * v;
                }
            }
        }
    }
    out
}

/// Tangent of a purely elastic step: Hooke stress block, elastic moment
/// block, zero coupling blocks.
pub fn elastic_tangent(params: &MaterialParams) -> TangentBlocks {
    TangentBlocks {
        dsig_deps: hooke_matrix(params),
        dsig_dgradw: Mat618::zeros(),
        dm_deps: Mat186::zeros(),
        dm_dgradw: elastic_moment_matrix(params),
    }
}

/// Comparison result for one tangent block.
#[derive(Clone, Copy, Debug)]
pub struct BlockReport {
    pub name: &'static str,
    /// Max relative error, denominator `max(|reference entry|, 1e-3 * block
    /// max-norm)`.
    pub max_rel_err: f64,
    /// (row, col) of the worst entry.
    pub worst: (usize, usize),
}

/// Per-block comparison of an analytic tangent against a finite-difference
/// reference.
#[derive(Clone, Debug)]
pub struct TangentDiagnostics {
    pub blocks: [BlockReport; 4],
    /// Relative step the reference was computed with.
    pub fd_step: f64,
}

impl TangentDiagnostics {
    /// Largest per-block error in the report.
    pub fn max_rel_err(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.max_rel_err)
            .fold(0.0, f64::max)
    }
}

fn compare_block<const R: usize, const C: usize>(
    name: &'static str,
    analytic: &SMatrix<f64, R, C>,
    reference: &SMatrix<f64, R, C>,
) -> BlockReport {
    let mut block_max = 0.0_f64;
    for i in 0..R {
        for j in 0..C {
            block_max = block_max
                .max(analytic[(i, j)].abs())
                .max(reference[(i, j)].abs());
        }
    }
    let mut worst = (0, 0);
    let mut max_rel = 0.0;
    if block_max > 0.0 {
        for i in 0..R {
            for j in 0..C {
                let denom = reference[(i, j)].abs().max(1e-3 * block_max);
                let rel = (analytic[(i, j)] - reference[(i, j)]).abs() / denom;
                if rel > max_rel {
                    max_rel = rel;
                    worst = (i, j);
                }
            }
        }
    }
    BlockReport {
        name,
        max_rel_err: max_rel,
        worst,
    }
}

/// Compares an analytic tangent against a finite-difference reference,
/// block by block, with a guarded relative denominator.
pub fn tangent_report(
    analytic: &TangentBlocks,
    fd: &TangentBlocks,
    fd_step: f64,
) -> TangentDiagnostics {
    TangentDiagnostics {
        blocks: [
            compare_block("dSig_dEps", &analytic.dsig_deps, &fd.dsig_deps),
            compare_block("dSig_dGradW", &analytic.dsig_dgradw, &fd.dsig_dgradw),
            compare_block("dM_dEps", &analytic.dm_deps, &fd.dm_deps),
            compare_block("dM_dGradW", &analytic.dm_dgradw, &fd.dm_dgradw),
        ],
        fd_step,
    }
}

/// Applies the four blocks to a packed increment pair, returning the
/// predicted `(d_sigma, d_moment)` response.
pub fn apply_blocks(
    blocks: &TangentBlocks,
    d_eps: &SymTensor2,
    d_gradw: &MomentTensor3,
) -> (SymTensor2, MomentTensor3) {
    let e = nalgebra::SVector::<f64, 6>::from_column_slice(&d_eps.0);
    let g = nalgebra::SVector::<f64, 18>::from_column_slice(&flatten_moment(d_gradw));
    let ds = blocks.dsig_deps * e + blocks.dsig_dgradw * g;
    let dm = blocks.dm_deps * e + blocks.dm_dgradw * g;
    let mut sig = [0.0; 6];
    sig.copy_from_slice(ds.as_slice());
    let mut mom = [0.0; 18];
    mom.copy_from_slice(dm.as_slice());
    (SymTensor2(sig), unflatten_moment(&mom))
}

/// Integrates one implicit step and returns the exact tangent of the same
/// discretized update: the consistent blocks on plastic steps, the elastic
/// operator otherwise. This is the material interface a Newton-based
/// equilibrium solver consumes at every Gauss point.
pub fn step_with_tangent(
    state: &crate::material::MaterialState,
    d_eps: &SymTensor2,
    d_gradw: &MomentTensor3,
    params: &MaterialParams,
    opts: &crate::material::ProjectionOpts,
) -> crate::error::Result<(crate::material::MaterialState, crate::material::StepInfo, TangentBlocks)>
{
    use crate::material::params::{effective_porosity, hardening_stress};
    use crate::material::predictor::{
        elastic_predictor, moment_compliance, strain_compliance, MaterialState,
    };
    use crate::material::step::{
        elastic_info, info_from_solution, update_porosity, PlasticIncrements,
    };
    use crate::material::yield_surface::yield_function;
    use crate::material::project_with_reference;

    let p = effective_porosity(state.f, params)?;
    let (sb0, _) = hardening_stress(state.e, &params.hardening);
    let trial = elastic_predictor(state, d_eps, d_gradw, params);
    let phi_yield = yield_function(&trial.sigma_star, &trial.moment_star, sb0, p, params);
    if phi_yield <= 0.0 {
        let new_state = MaterialState {
            sigma: trial.sigma_star,
            moment: trial.moment_star,
            f: state.f,
            e: state.e,
        };
        let info = elastic_info(&trial, sb0, p);
        return Ok((new_state, info, elastic_tangent(params)));
    }
    let sol = project_with_reference(&trial, None, state, params, opts)?;
    let blocks = if sol.elastic_fallback {
        elastic_tangent(params)
    } else {
        consistent_tangent(&sol, &trial, state, params)?
    };
    let inc = PlasticIncrements {
        eps: strain_compliance(&(trial.sigma_star - sol.sigma), params),
        gradw: moment_compliance(&(trial.moment_star - sol.moment), params),
    };
    let (f_new, delta_f, failed) = update_porosity(state.f, trial.sigma_m, sol.sigma_m, params);
    let new_state = MaterialState {
        sigma: sol.sigma,
        moment: sol.moment,
        f: f_new,
        e: state.e + sol.delta_e,
    };
    let mut info = info_from_solution(&sol, inc);
    info.delta_f = delta_f;
    info.failed = failed;
    Ok((new_state, info, blocks))
}
