//! Global assembly and the displacement-driven Newton loop with automatic
//! step halving.

use glpd_core::material::{MaterialParams, ProjectionOpts};

use crate::band::BandMatrix;
use crate::dof::{Constraints, DofMap, LoadStep};
use crate::element::{
    element_forces_stiffness, GaussPointState, GpUpdate, TangentMode, ELEM_DOFS,
};
use crate::error::{FemError, Result};
use crate::mesh::Mesh;
use crate::quad8::GAUSS_2X2;

/// Everything fixed over a simulation: mesh, material, coupling penalty.
#[derive(Clone)]
pub struct Model {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub params: MaterialParams,
    /// Penalty tying W to eps(u) (MPa). Default `100 (lambda + 2 mu)`.
    pub kappa: f64,
    /// With the moment terms disabled the W gradients carry no energy and
    /// the model degenerates to the local (Gurson) limit.
    pub moment_terms: bool,
    pub projection: ProjectionOpts,
}

impl Model {
    pub fn new(mesh: Mesh, params: MaterialParams) -> Result<Self> {
        mesh.validate()?;
        let dofs = DofMap::new(&mesh);
        let kappa = 100.0 * (params.lambda + 2.0 * params.mu);
        Ok(Self {
            mesh,
            dofs,
            params,
            kappa,
            moment_terms: true,
            projection: ProjectionOpts::default(),
        })
    }

    pub fn gauss_points_per_element(&self) -> usize {
        GAUSS_2X2.len()
    }
}

/// Evolving solution: converged nodal DOFs and Gauss-point history.
#[derive(Clone)]
pub struct FeState {
    pub d: Vec<f64>,
    /// `gauss_points_per_element` entries per element, element-major.
    pub gp: Vec<GaussPointState>,
    /// Raw internal-force vector at the last converged iterate; constrained
    /// entries are the support reactions (N).
    pub reactions: Vec<f64>,
}

impl FeState {
    pub fn new(model: &Model, f0: f64) -> Self {
        let n = model.dofs.n_dofs();
        let ngp = model.mesh.elements.len() * model.gauss_points_per_element();
        Self {
            d: vec![0.0; n],
            gp: vec![GaussPointState::initial(f0); ngp],
            reactions: vec![0.0; n],
        }
    }

    /// Sum of reaction components `local` over a node set (N).
    pub fn set_reaction(&self, mesh: &Mesh, set: &str, local: usize) -> Result<f64> {
        let mut s = 0.0;
        for &n in mesh.node_set(set)? {
            s += self.reactions[crate::dof::gdof(n, local)];
        }
        Ok(s)
    }
}

/// One assembled iterate: raw residual (internal forces), tangent matrix,
/// and the tentative Gauss-point updates of this evaluation.
pub struct Assembly {
    pub residual: Vec<f64>,
    pub matrix: BandMatrix,
    pub gp: Vec<GpUpdate>,
}

/// Assembles internal forces and the tangent at `d_total`, with material
/// increments measured from `d_old` and the committed Gauss-point states.
pub fn assemble(
    model: &Model,
    d_total: &[f64],
    d_old: &[f64],
    gp_states: &[GaussPointState],
    mode: TangentMode,
) -> Result<Assembly> {
    let n = model.dofs.n_dofs();
    let hb = model.dofs.half_bandwidth(&model.mesh);
    let mut residual = vec![0.0; n];
    let mut matrix = BandMatrix::zeros(n, hb, hb);
    let mut gp_all = Vec::with_capacity(gp_states.len());
    let per = model.gauss_points_per_element();

    for (e, conn) in model.mesh.elements.iter().enumerate() {
        let coords = model.mesh.element_coords(e);
        let mut de = crate::element::EVec::zeros();
        let mut de_old = crate::element::EVec::zeros();
        let mut map = [0usize; ELEM_DOFS];
        for (a, &node) in conn.iter().enumerate() {
            for l in 0..crate::dof::DOF_PER_NODE {
                let gd = crate::dof::gdof(node, l);
                let le = crate::dof::DOF_PER_NODE * a + l;
                map[le] = gd;
                de[le] = d_total[gd];
                de_old[le] = d_old[gd];
            }
        }
        let eval = element_forces_stiffness(
            e,
            &coords,
            &de,
            &de_old,
            &gp_states[per * e..per * (e + 1)],
            &model.params,
            model.kappa,
            mode,
            model.moment_terms,
            &model.projection,
        )?;
        for (le, &gd) in map.iter().enumerate() {
            residual[gd] += eval.f[le];
            for (lc, &gc) in map.iter().enumerate() {
                let v = eval.k[(le, lc)];
                if v != 0.0 {
                    matrix.add(gd, gc, v);
                }
            }
        }
        gp_all.extend(eval.gp);
    }
    Ok(Assembly {
        residual,
        matrix,
        gp: gp_all,
    })
}

/// Per-iteration record of the global Newton loop.
#[derive(Clone, Debug)]
pub struct LogEntry {
    pub step: usize,
    pub iter: usize,
    /// Residual l2 norm over the free DOFs (N).
    pub residual: f64,
    /// Energy norm `|dd . r|` of the accepted correction (N mm).
    pub energy: f64,
    pub mode: TangentMode,
}

/// Append-only convergence history.
#[derive(Clone, Debug, Default)]
pub struct ConvergenceLog {
    pub entries: Vec<LogEntry>,
}

/// What one load step did.
#[derive(Clone, Copy, Debug)]
pub struct StepOutcome {
    /// Linear solves spent on the step (all sub-steps).
    pub iters: usize,
    /// Final free-DOF residual norm (N).
    pub residual: f64,
    pub halvings: usize,
    pub sub_steps: usize,
}

fn constrained_solve(
    assembly: &Assembly,
    cons: &Constraints,
) -> Result<Vec<f64>> {
    let n = assembly.residual.len();
    let mut rhs = vec![0.0; n];
    for (i, slot) in rhs.iter_mut().enumerate() {
        if !cons.is_constrained(i) {
            *slot = -assembly.residual[i];
        }
    }
    let mut k = assembly.matrix.clone();
    for i in 0..n {
        if cons.is_constrained(i) {
            k.set_unit_row(i);
            k.clear_column(i);
        }
    }
    let lu = k.factor()?;
    lu.solve(&mut rhs);
    Ok(rhs)
}

/// Advances one load step with Newton iterations; prescribed DOFs jump to
/// the target level before the first iteration. Divergence (three residual
/// increases in a row, a non-finite norm, or the iteration cap) triggers
/// halving of the remaining increment, at most four times.
#[allow(clippy::too_many_arguments)]
pub fn solve_load_step(
    model: &Model,
    cons: &Constraints,
    fes: &mut FeState,
    step_index: usize,
    step: &LoadStep,
    prev_load: f64,
    mode: TangentMode,
    log: &mut ConvergenceLog,
) -> Result<StepOutcome> {
    let floor = 1.0e-8; // N
    let mut reached = prev_load;
    let mut frac = 1.0_f64;
    let mut halvings = 0usize;
    let mut iters_total = 0usize;
    let mut sub_steps = 0usize;
    let mut last_res = f64::NAN;

    while reached < step.load {
        let target = (reached + frac * (step.load - prev_load)).min(step.load);
        let d_old = fes.d.clone();
        let mut d = fes.d.clone();
        cons.apply(&mut d, target);

        let mut attempt_ok = false;
        let mut growths = 0usize;
        let mut r_prev = f64::INFINITY;
        let mut asm = match assemble(model, &d, &d_old, &fes.gp, mode) {
            Ok(a) => a,
            Err(FemError::Material { .. }) => {
                // Treat material blow-up like divergence: halve and retry.
                halvings += 1;
                frac *= 0.5;
                if halvings > 4 {
                    return Err(FemError::StepFailed {
                        step: step_index,
                        halvings,
                    });
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let r_ref = cons.free_norm(&asm.residual);
        let tol_abs = (step.tol * r_ref).max(floor);
        if r_ref <= floor {
            attempt_ok = true;
        }

        let mut iters_attempt = 0usize;
        while !attempt_ok && iters_attempt < step.max_iters {
            let dd = constrained_solve(&asm, cons)?;
            iters_attempt += 1;
            let energy: f64 = dd
                .iter()
                .zip(asm.residual.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs();
            for (di, &ddi) in d.iter_mut().zip(dd.iter()) {
                *di += ddi;
            }
            asm = match assemble(model, &d, &d_old, &fes.gp, mode) {
                Ok(a) => a,
                Err(FemError::Material { .. }) => break,
                Err(e) => return Err(e),
            };
            let r = cons.free_norm(&asm.residual);
            log.entries.push(LogEntry {
                step: step_index,
                iter: iters_total + iters_attempt,
                residual: r,
                energy,
                mode,
            });
            if r <= tol_abs {
                attempt_ok = true;
                last_res = r;
                break;
            }
            if !r.is_finite() {
                break;
            }
            if r > r_prev {
                growths += 1;
                if growths >= 3 {
                    break;
                }
            } else {
                growths = 0;
            }
            r_prev = r;
        }

        iters_total += iters_attempt;
        if attempt_ok {
            fes.d = d;
            fes.reactions = asm.residual.clone();
            for (slot, upd) in fes.gp.iter_mut().zip(asm.gp.iter()) {
                slot.state = upd.new_state;
                slot.prev_plastic = upd.info.plastic_increments;
            }
            reached = target;
            sub_steps += 1;
            if r_ref <= floor {
                last_res = r_ref;
            }
        } else {
            halvings += 1;
            frac *= 0.5;
            if halvings > 4 {
                return Err(FemError::StepFailed {
                    step: step_index,
                    halvings,
                });
            }
        }
    }
    Ok(StepOutcome {
        iters: iters_total,
        residual: last_res,
        halvings,
        sub_steps,
    })
}
