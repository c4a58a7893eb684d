//! Central finite-difference reference for the tangent blocks.
//!
//! Differentiates the complete implicit update (projection plus hardening
//! fixed point, porosity frozen at its start-of-step value, exactly the map
//! the consistent tangent linearizes) with respect to each packed increment
//! component.

use crate::error::{GlpdError, Result};
use crate::material::params::MaterialParams;
use crate::material::predictor::MaterialState;
use crate::material::projection::ProjectionOpts;
use crate::material::step::{integrate_step, StepMode, StepOpts};
use crate::tensor::{MomentTensor3, SymTensor2};

use super::{flatten_moment, moment_index, Mat1818, Mat186, Mat618, Mat66, TangentBlocks};

type Outputs = ([f64; 6], [f64; 18]);

fn with_retry<T>(
    h0: f64,
    what: &str,
    mut probe: impl FnMut(f64) -> Result<T>,
) -> Result<(T, f64)> {
    let mut last = String::new();
    // Shrink once, then widen once, before giving up.
    for factor in [1.0, 0.25, 4.0] {
        let h = h0 * factor;
        match probe(h) {
            Ok(v) => return Ok((v, h)),
            Err(e) => last = e.to_string(),
        }
    }
    Err(GlpdError::FdProbeFailed(format!("{what}: {last}")))
}

/// Central differences of the end-of-step `(sigma, M)` with respect to the
/// 6 + 18 packed increment components.
///
/// `step` is relative: the probe size is `step * max(norm(increment), 1e-6)`
/// per field. The hardening fixed point runs at a tightened tolerance so its
/// termination noise stays below the difference quotients. If the update
/// fails at a probe point the step is shrunk once, then widened once, before
/// the probe errors out.
pub fn fd_tangent(
    state: &MaterialState,
    d_eps: &SymTensor2,
    d_gradw: &MomentTensor3,
    params: &MaterialParams,
    step: f64,
) -> Result<TangentBlocks> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(GlpdError::FdProbeFailed(format!("invalid step {step:e}")));
    }
    let opts = StepOpts {
        mode: StepMode::Implicit,
        projection: ProjectionOpts {
            hard_tol: 1e-13,
            hard_max: 400,
            ..ProjectionOpts::default()
        },
        ..StepOpts::default()
    };
    let eval = |de: &SymTensor2, dg: &MomentTensor3| -> Result<Outputs> {
        let (new_state, _) = integrate_step(state, de, dg, params, &opts)?;
        Ok((new_state.sigma.0, flatten_moment(&new_state.moment)))
    };
    let h_eps = step * d_eps.norm().max(1e-6);
    let h_g = step * d_gradw.norm().max(1e-6);

    let mut dsig_deps = Mat66::zeros();
    let mut dm_deps = Mat186::zeros();
    for c in 0..6 {
        let ((plus, minus), h) =
            with_retry(h_eps, &format!("strain component {c}"), |h| {
                let mut de_p = *d_eps;
                de_p.0[c] += h;
                let mut de_m = *d_eps;
                de_m.0[c] -= h;
                Ok((eval(&de_p, d_gradw)?, eval(&de_m, d_gradw)?))
            })?;
        for r in 0..6 {
            dsig_deps[(r, c)] = (plus.0[r] - minus.0[r]) / (2.0 * h);
        }
        for r in 0..18 {
            dm_deps[(r, c)] = (plus.1[r] - minus.1[r]) / (2.0 * h);
        }
    }

    let mut dsig_dgradw = Mat618::zeros();
    let mut dm_dgradw = Mat1818::zeros();
    for pair in 0..6 {
        for k in 0..3 {
            let col = moment_index(pair, k);
            let ((plus, minus), h) =
                with_retry(h_g, &format!("gradient component ({pair}, {k})"), |h| {
                    let mut dg_p = *d_gradw;
                    dg_p.0[pair][k] += h;
                    let mut dg_m = *d_gradw;
                    dg_m.0[pair][k] -= h;
                    Ok((eval(d_eps, &dg_p)?, eval(d_eps, &dg_m)?))
                })?;
            for r in 0..6 {
                dsig_dgradw[(r, col)] = (plus.0[r] - minus.0[r]) / (2.0 * h);
            }
            for r in 0..18 {
                dm_dgradw[(r, col)] = (plus.1[r] - minus.1[r]) / (2.0 * h);
            }
        }
    }

    Ok(TangentBlocks {
        dsig_deps,
        dsig_dgradw,
        dm_deps,
        dm_dgradw,
    })
}
