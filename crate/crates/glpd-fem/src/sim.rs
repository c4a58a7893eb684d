//! Displacement-driven simulation loop: walks a load program, records the
//! reaction-force curve, Gauss-point snapshots, and the convergence log, and
//! keeps partial results when a step dies.

use std::fmt::Write as _;
use std::path::Path;

use glpd_core::tensor::vonmises_eq;

use crate::dof::{Constraints, LoadProgram, U2};
use crate::element::TangentMode;
use crate::error::Result;
use crate::quad8::{gp_geometry, GAUSS_2X2};
use crate::solve::{solve_load_step, ConvergenceLog, FeState, Model};

/// Simulation controls on top of a [`Model`] and a [`LoadProgram`].
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub mode: TangentMode,
    /// Node set whose `u2` reactions are summed into the force column.
    pub loaded_set: String,
    /// Initial porosity seeded at every Gauss point.
    pub f0: f64,
    /// Emit a snapshot every `n` steps (0: final state only).
    pub snapshot_every: usize,
}

/// One row of the force-displacement curve.
#[derive(Clone, Debug)]
pub struct CurveRow {
    pub step: usize,
    pub displacement: f64,
    pub force: f64,
    pub newton_iters: usize,
    pub mode: TangentMode,
}

/// One Gauss point of a field snapshot.
#[derive(Clone, Debug)]
pub struct SnapshotRow {
    pub elem: usize,
    pub gp: usize,
    pub x: f64,
    pub y: f64,
    pub s11: f64,
    pub s22: f64,
    pub s33: f64,
    pub s12: f64,
    pub f: f64,
    pub e: f64,
    pub sigma_eq: f64,
}

/// Everything a run produces.
pub struct SimResult {
    pub curve: Vec<CurveRow>,
    pub log: ConvergenceLog,
    /// `(step, rows)` pairs; the final state is always included.
    pub snapshots: Vec<(usize, Vec<SnapshotRow>)>,
    pub state: FeState,
    /// Failure record when a step died after its halvings; earlier steps
    /// remain valid partial results.
    pub failure: Option<String>,
}

/// Captures the committed Gauss-point fields.
pub fn snapshot(model: &Model, fes: &FeState) -> Result<Vec<SnapshotRow>> {
    let per = model.gauss_points_per_element();
    let mut rows = Vec::with_capacity(fes.gp.len());
    for e in 0..model.mesh.elements.len() {
        let coords = model.mesh.element_coords(e);
        for (g, (pt, _)) in GAUSS_2X2.iter().enumerate() {
            let geom = gp_geometry(&coords, pt[0], pt[1])?;
            let s = &fes.gp[per * e + g].state;
            rows.push(SnapshotRow {
                elem: e,
                gp: g,
                x: geom.xy[0],
                y: geom.xy[1],
                s11: s.sigma.0[0],
                s22: s.sigma.0[1],
                s33: s.sigma.0[2],
                s12: s.sigma.0[3],
                f: s.f,
                e: s.e,
                sigma_eq: vonmises_eq(&s.sigma),
            });
        }
    }
    Ok(rows)
}

/// Runs the whole load program. Step failures stop the run but return the
/// partial curve plus a failure record instead of an error.
pub fn run_simulation(
    model: &Model,
    cons: &Constraints,
    program: &LoadProgram,
    cfg: &SimConfig,
) -> Result<SimResult> {
    program.validate()?;
    let mut fes = FeState::new(model, cfg.f0);
    let mut log = ConvergenceLog::default();
    let mut curve = Vec::with_capacity(program.steps.len());
    let mut snapshots = Vec::new();
    let mut failure = None;
    let mut prev_load = 0.0;

    for (i, step) in program.steps.iter().enumerate() {
        let index = i + 1;
        match solve_load_step(
            model, cons, &mut fes, index, step, prev_load, cfg.mode, &mut log,
        ) {
            Ok(out) => {
                let force = fes.set_reaction(&model.mesh, &cfg.loaded_set, U2)?;
                curve.push(CurveRow {
                    step: index,
                    displacement: step.load,
                    force,
                    newton_iters: out.iters,
                    mode: cfg.mode,
                });
                if cfg.snapshot_every > 0 && index % cfg.snapshot_every == 0 {
                    snapshots.push((index, snapshot(model, &fes)?));
                }
                prev_load = step.load;
            }
            Err(e @ crate::error::FemError::StepFailed { .. })
            | Err(e @ crate::error::FemError::Material { .. }) => {
                failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let last_step = curve.last().map(|r| r.step).unwrap_or(0);
    if snapshots.last().map(|(s, _)| *s) != Some(last_step) {
        snapshots.push((last_step, snapshot(model, &fes)?));
    }
    Ok(SimResult {
        curve,
        log,
        snapshots,
        state: fes,
        failure,
    })
}

/// `step,displacement_mm,force_N,newton_iters,tangent_mode`
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("step,displacement_mm,force_N,newton_iters,tangent_mode\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.step,
            r.displacement,
            r.force,
            r.newton_iters,
            r.mode.name()
        );
    }
    out
}

/// `step,iter,residual_N,mode`
pub fn convergence_csv(log: &ConvergenceLog) -> String {
    let mut out = String::from("step,iter,residual_N,mode\n");
    for e in &log.entries {
        let _ = writeln!(out, "{},{},{},{}", e.step, e.iter, e.residual, e.mode.name());
    }
    out
}

/// `elem,gp,x,y,s11,s22,s33,s12,f,E,sigma_eq`
pub fn snapshot_csv(rows: &[SnapshotRow]) -> String {
    let mut out = String::from("elem,gp,x,y,s11,s22,s33,s12,f,E,sigma_eq\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.elem, r.gp, r.x, r.y, r.s11, r.s22, r.s33, r.s12, r.f, r.e, r.sigma_eq
        );
    }
    out
}

/// Writes the standard artifact set into a directory: `curve.csv`,
/// `convergence.csv`, and `snapshot_<step>.csv` per snapshot.
pub fn write_artifacts(dir: &Path, result: &SimResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("curve.csv"), curve_csv(&result.curve))?;
    std::fs::write(dir.join("convergence.csv"), convergence_csv(&result.log))?;
    for (step, rows) in &result.snapshots {
        std::fs::write(
            dir.join(format!("snapshot_{step}.csv")),
            snapshot_csv(rows),
        )?;
    }
    Ok(())
}
