//! Element internal forces and stiffness: stress against the displacement
//! strain, moments against the gradient of the nodal W field, and the
//! penalty tying W to eps(u) at the Gauss points. All terms share the 2x2
//! sub-integration rule.

use glpd_core::material::predictor::elastic_predictor;
use glpd_core::material::{
    integrate_step, MaterialParams, MaterialState, PlasticIncrements, ProjectionOpts, StepInfo,
    StepMode, StepOpts,
};
use glpd_core::tangent::{elastic_tangent, flatten_moment, step_with_tangent, unflatten_moment};
use glpd_core::tensor::{SymTensor2, PAIR_W};
use nalgebra::{SMatrix, SVector};

use crate::dof::{DOF_PER_NODE, U1, U2, W11, W12, W22, W33};
use crate::error::{FemError, Result};
use crate::quad8::{gp_geometry, GAUSS_2X2};

/// Element DOF count: 8 nodes x 6 DOFs.
pub const ELEM_DOFS: usize = 48;

pub type EVec = SVector<f64, ELEM_DOFS>;
pub type EMat = SMatrix<f64, ELEM_DOFS, ELEM_DOFS>;

/// Which operator the global Newton loop assembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TangentMode {
    /// Exact consistent tangent of the implicit update.
    Consistent,
    /// Elastic operator with the implicit update (linear convergence).
    Elastic,
    /// Frozen previous-step plastic increments: the residual uses the
    /// elastically updated stresses, the tangent is elastic, and the
    /// projection redistributes the increments only on step acceptance.
    Explicit,
}

impl TangentMode {
    pub fn name(self) -> &'static str {
        match self {
            TangentMode::Consistent => "consistent",
            TangentMode::Elastic => "elastic",
            TangentMode::Explicit => "explicit",
        }
    }
}

/// Per-Gauss-point history carried between load steps.
#[derive(Clone, Debug)]
pub struct GaussPointState {
    pub state: MaterialState,
    /// Plastic split of the last converged step (explicit mode feed).
    pub prev_plastic: PlasticIncrements,
}

impl GaussPointState {
    pub fn initial(f0: f64) -> Self {
        Self {
            state: MaterialState::initial(f0),
            prev_plastic: PlasticIncrements::default(),
        }
    }
}

/// Outcome of one Gauss-point update inside an element evaluation.
#[derive(Clone, Debug)]
pub struct GpUpdate {
    pub new_state: MaterialState,
    pub info: StepInfo,
    pub xy: [f64; 2],
    /// Norm of the penalty gap `W - eps(u)` at the point.
    pub pen_gap: f64,
}

/// Result of evaluating one element at the current iterate.
pub struct ElementEval {
    pub f: EVec,
    pub k: EMat,
    pub gp: Vec<GpUpdate>,
}

struct GpOperators {
    /// Raw packed strain components from the element DOFs.
    bu: SMatrix<f64, 6, ELEM_DOFS>,
    /// Raw packed W components interpolated from the nodal W DOFs.
    nw: SMatrix<f64, 6, ELEM_DOFS>,
    /// Raw flattened grad-W components from the nodal W DOFs.
    gw: SMatrix<f64, 18, ELEM_DOFS>,
}

/// Builds the kinematic operators at one integration point. Plane strain:
/// eps33 = 0 from u, the W tensor keeps its 11, 22, 12, 33 components, and
/// grad W uses the in-plane derivatives only.
fn gp_operators(n: &[f64; 8], dndx: &[[f64; 2]; 8]) -> GpOperators {
    let mut bu = SMatrix::<f64, 6, ELEM_DOFS>::zeros();
    let mut nw = SMatrix::<f64, 6, ELEM_DOFS>::zeros();
    let mut gw = SMatrix::<f64, 18, ELEM_DOFS>::zeros();
    // W DOF order per node -> packed pair row of the symmetric tensor.
    let wmap = [(W11, 0), (W22, 1), (W33, 2), (W12, 3)];
    for a in 0..8 {
        let col = |local: usize| DOF_PER_NODE * a + local;
        bu[(0, col(U1))] = dndx[a][0];
        bu[(1, col(U2))] = dndx[a][1];
        bu[(3, col(U1))] = 0.5 * dndx[a][1];
        bu[(3, col(U2))] = 0.5 * dndx[a][0];
        for &(local, pair) in &wmap {
            nw[(pair, col(local))] = n[a];
            for k in 0..2 {
                gw[(3 * pair + k, col(local))] = dndx[a][k];
            }
        }
    }
    GpOperators { bu, nw, gw }
}

#[allow(clippy::too_many_arguments)]
pub fn element_forces_stiffness(
    elem: usize,
    coords: &[[f64; 2]; 8],
    d_total: &EVec,
    d_old: &EVec,
    gps: &[GaussPointState],
    params: &MaterialParams,
    kappa: f64,
    mode: TangentMode,
    moment_terms: bool,
    proj: &ProjectionOpts,
) -> Result<ElementEval> {
    assert_eq!(gps.len(), GAUSS_2X2.len());
    let mut f = EVec::zeros();
    let mut k = EMat::zeros();
    let mut gp_out = Vec::with_capacity(GAUSS_2X2.len());
    let d_inc = d_total - d_old;
    let w6 = SMatrix::<f64, 6, 6>::from_diagonal(&SVector::<f64, 6>::from_column_slice(&PAIR_W));
    let mut w18d = [0.0; 18];
    for pair in 0..6 {
        for kk in 0..3 {
            w18d[3 * pair + kk] = PAIR_W[pair];
        }
    }
    let w18 =
        SMatrix::<f64, 18, 18>::from_diagonal(&SVector::<f64, 18>::from_column_slice(&w18d));

    for (g, (pt, wgt)) in GAUSS_2X2.iter().enumerate() {
        let geom = gp_geometry(coords, pt[0], pt[1])?;
        let ops = gp_operators(&geom.n, &geom.dndx);
        let gw = if moment_terms {
            ops.gw
        } else {
            SMatrix::<f64, 18, ELEM_DOFS>::zeros()
        };
        let dv = geom.detj * wgt;

        let deps_v = ops.bu * d_inc;
        let mut deps_a = [0.0; 6];
        deps_a.copy_from_slice(deps_v.as_slice());
        let deps = SymTensor2(deps_a);
        let dgw_v = gw * d_inc;
        let mut dgw_a = [0.0; 18];
        dgw_a.copy_from_slice(dgw_v.as_slice());
        let dgw = unflatten_moment(&dgw_a);

        let hist = &gps[g];
        let wrap = |e: glpd_core::GlpdError| FemError::Material {
            elem,
            gp: g,
            source: e,
        };
        let (sigma, moment, blocks, new_state, info) = match mode {
            TangentMode::Consistent => {
                let (ns, info, blocks) =
                    step_with_tangent(&hist.state, &deps, &dgw, params, proj).map_err(wrap)?;
                (ns.sigma, ns.moment, blocks, ns, info)
            }
            TangentMode::Elastic => {
                let opts = StepOpts {
                    projection: proj.clone(),
                    ..StepOpts::default()
                };
                let (ns, info) =
                    integrate_step(&hist.state, &deps, &dgw, params, &opts).map_err(wrap)?;
                (ns.sigma, ns.moment, elastic_tangent(params), ns, info)
            }
            TangentMode::Explicit => {
                let opts = StepOpts {
                    mode: StepMode::ExplicitPlastic,
                    projection: proj.clone(),
                    prev_plastic: hist.prev_plastic,
                };
                let (ns, info) =
                    integrate_step(&hist.state, &deps, &dgw, params, &opts).map_err(wrap)?;
                // Equilibrium is written on the frozen-plastic elastic
                // update; the projected state is stored only on acceptance.
                let trial = elastic_predictor(
                    &hist.state,
                    &(deps - hist.prev_plastic.eps),
                    &(dgw - hist.prev_plastic.gradw),
                    params,
                );
                (
                    trial.sigma_star,
                    trial.moment_star,
                    elastic_tangent(params),
                    ns,
                    info,
                )
            }
        };

        let sig_v = SVector::<f64, 6>::from_column_slice(&sigma.0);
        let m_v = SVector::<f64, 18>::from_column_slice(&flatten_moment(&moment));
        let pen = ops.nw * d_total - ops.bu * d_total;
        let pen_gap = {
            let mut s = 0.0;
            for c in 0..6 {
                s += PAIR_W[c] * pen[c] * pen[c];
            }
            s.sqrt()
        };

        f += dv
            * (ops.bu.transpose() * (w6 * (sig_v - kappa * pen))
                + ops.nw.transpose() * (w6 * (kappa * pen))
                + gw.transpose() * (w18 * m_v));

        let bun = ops.bu - ops.nw;
        k += dv
            * (ops.bu.transpose() * (w6 * (blocks.dsig_deps * ops.bu + blocks.dsig_dgradw * gw))
                + gw.transpose() * (w18 * (blocks.dm_deps * ops.bu + blocks.dm_dgradw * gw))
                + kappa * (bun.transpose() * (w6 * bun)));

        gp_out.push(GpUpdate {
            new_state,
            info,
            xy: geom.xy,
            pen_gap,
        });
    }
    Ok(ElementEval { f, k, gp: gp_out })
}
