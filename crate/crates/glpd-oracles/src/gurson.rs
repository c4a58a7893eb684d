//! Classical two-unknown Gurson return mapping (no moments): Newton on the
//! volumetric/deviatoric plastic strain increments with the consistency and
//! yield equations, plus the same explicit porosity/hardening conventions as
//! the library. Written directly from the scalar equations, sharing no solver
//! machinery with the library kernel.

use glpd_core::material::{effective_porosity, hardening_stress, MaterialParams};
use nalgebra::{Matrix2, Vector2};

pub struct GursonSolution {
    pub sigma_eq: f64,
    pub sigma_m: f64,
    pub deps_p: f64,
    pub deps_q: f64,
    pub delta_e: f64,
    pub delta_f: f64,
    pub sigma_bar: f64,
}

/// Yield value at reduced (eq, m) stresses.
fn phi(sigma_eq: f64, sigma_m: f64, sigma_bar: f64, p: f64) -> f64 {
    let x = sigma_eq / sigma_bar;
    x * x + 2.0 * p * (1.5 * sigma_m / sigma_bar).cosh() - 1.0 - p * p
}

/// Solves the scalar system for one trial `(Sigma*_eq, Sigma*_m)` at fixed
/// state `(f, E)`. Returns None if the trial is below yield.
pub fn gurson_return(
    sigma_eq_star: f64,
    sigma_m_star: f64,
    f: f64,
    e_hard: f64,
    params: &MaterialParams,
) -> Option<GursonSolution> {
    let p = effective_porosity(f, params).unwrap();
    let (sb0, _) = hardening_stress(e_hard, &params.hardening);
    if phi(sigma_eq_star, sigma_m_star, sb0, p) <= 0.0 {
        return None;
    }
    let three_k = params.three_bulk();
    let mu = params.mu;

    let mut sb = sb0;
    let mut x = Vector2::new(0.0, 0.0); // (deps_p, deps_q)
    let (mut sigma_eq, mut sigma_m, mut delta_e) = (sigma_eq_star, sigma_m_star, 0.0);
    for hard_it in 0..200 {
        // Newton on (consistency, yield) at fixed sigma_bar.
        let residual = |v: Vector2<f64>| -> Vector2<f64> {
            let seq = sigma_eq_star - 3.0 * mu * v[1];
            let sm = sigma_m_star - three_k / 3.0 * v[0];
            let sinh = (1.5 * sm / sb).sinh();
            Vector2::new(
                v[0] * 2.0 * seq / (sb * sb) - v[1] * 3.0 * p / sb * sinh,
                phi(seq, sm, sb, p),
            )
        };
        let mut converged = false;
        for _ in 0..200 {
            let r = residual(x);
            if r[0].abs().max(r[1].abs()) <= 1e-14 {
                converged = true;
                break;
            }
            // Finite-difference Jacobian (oracle-grade).
            let mut jac = Matrix2::zeros();
            for c in 0..2 {
                let h = 1e-8 * x[c].abs().max(1e-6);
                let mut xp = x;
                xp[c] += h;
                let rp = residual(xp);
                let mut xm = x;
                xm[c] -= h;
                let rm = residual(xm);
                for r_i in 0..2 {
                    jac[(r_i, c)] = (rp[r_i] - rm[r_i]) / (2.0 * h);
                }
            }
            let step = jac.lu().solve(&(-residual(x)))?;
            // Damped update keeping the residual finite.
            let mut alpha = 1.0;
            for _ in 0..30 {
                let cand = x + step * alpha;
                let rc = residual(cand);
                if rc[0].is_finite() && rc[1].is_finite() {
                    x = cand;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if !converged {
            return None;
        }
        sigma_eq = sigma_eq_star - 3.0 * mu * x[1];
        sigma_m = sigma_m_star - three_k / 3.0 * x[0];
        delta_e = (sigma_eq * x[1] + sigma_m * x[0]) / ((1.0 - f) * sb);
        let (sb_next, _) = hardening_stress(e_hard + delta_e.max(0.0), &params.hardening);
        if (sb_next - sb).abs() <= 1e-12 * sb {
            break;
        }
        sb = if hard_it >= 10 {
            0.5 * (sb + sb_next)
        } else {
            sb_next
        };
    }
    let delta_f = (1.0 - f) * x[0];
    Some(GursonSolution {
        sigma_eq,
        sigma_m,
        deps_p: x[0],
        deps_q: x[1],
        delta_e: delta_e.max(0.0),
        delta_f,
        sigma_bar: sb,
    })
}
