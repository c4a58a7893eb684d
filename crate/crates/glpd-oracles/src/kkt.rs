//! Generic KKT solve of the constrained projection: minimize the elastic
//! complementary-energy distance to the trial state subject to yield equality
//! and the moment admissibility constraint `M_ijj = 0`. 28 unknowns (6 stress,
//! 18 moment, 1 plastic multiplier, 3 constraint multipliers), damped Newton
//! with a finite-difference Jacobian. Perfect plasticity and frozen porosity:
//! the comparison target for single projections at fixed flow stress.

use glpd_core::material::predictor::{moment_compliance, strain_compliance};
use glpd_core::material::{yield_function, yield_normal, MaterialParams};
use glpd_core::tensor::{MomentTensor3, SymTensor2, PAIR_W, SYM_PAIRS};
use nalgebra::{DMatrix, DVector};

pub struct KktSolution {
    pub sigma: SymTensor2,
    pub moment: MomentTensor3,
    pub lambda: f64,
    pub residual_norm: f64,
}

const N: usize = 28;

fn unpack(x: &DVector<f64>) -> (SymTensor2, MomentTensor3, f64, [f64; 3]) {
    let mut s = [0.0; 6];
    s.copy_from_slice(&x.as_slice()[0..6]);
    let mut m = [[0.0; 3]; 6];
    for a in 0..6 {
        for k in 0..3 {
            m[a][k] = x[6 + 3 * a + k];
        }
    }
    let nu = [x[25], x[26], x[27]];
    (SymTensor2(s), MomentTensor3(m), x[24], nu)
}

/// Gradient of `nu . c(M)` with respect to the packed moment component
/// `(pair (p,q), r)`: sums the contributions of both full-index slots.
fn constraint_gradient(nu: &[f64; 3], p: usize, q: usize, r: usize) -> f64 {
    if p == q {
        if r == p {
            nu[p]
        } else {
            0.0
        }
    } else {
        let mut v = 0.0;
        if r == q {
            v += nu[p];
        }
        if r == p {
            v += nu[q];
        }
        v
    }
}

fn residual(
    x: &DVector<f64>,
    trial_sigma: &SymTensor2,
    trial_moment: &MomentTensor3,
    sigma_bar: f64,
    p_eff: f64,
    params: &MaterialParams,
) -> DVector<f64> {
    let (sigma, moment, lambda, nu) = unpack(x);
    let comp_s = strain_compliance(&(sigma - *trial_sigma), params);
    let comp_m = moment_compliance(&(moment - *trial_moment), params);
    let (n_s, n_m) = yield_normal(&sigma, &moment, sigma_bar, p_eff, params);
    let mut r = DVector::zeros(N);
    for a in 0..6 {
        r[a] = PAIR_W[a] * (comp_s.0[a] + lambda * n_s.0[a]);
    }
    for (a, &(pi, qi)) in SYM_PAIRS.iter().enumerate() {
        for k in 0..3 {
            r[6 + 3 * a + k] = PAIR_W[a] * (comp_m.0[a][k] + lambda * n_m.0[a][k])
                + constraint_gradient(&nu, pi, qi, k);
        }
    }
    r[24] = yield_function(&sigma, &moment, sigma_bar, p_eff, params);
    let c = moment.trace23();
    for i in 0..3 {
        r[25 + i] = c[i];
    }
    r
}

/// Solves the KKT system for a plastic trial at fixed `sigma_bar` and
/// effective porosity `p_eff`. Returns None if Newton fails to reach a
/// residual norm of 1e-11 (relative to the natural scales).
pub fn kkt_project(
    trial_sigma: &SymTensor2,
    trial_moment: &MomentTensor3,
    sigma_bar: f64,
    p_eff: f64,
    params: &MaterialParams,
) -> Option<KktSolution> {
    let mut x = DVector::zeros(N);
    x.as_mut_slice()[0..6].copy_from_slice(&trial_sigma.0);
    for a in 0..6 {
        for k in 0..3 {
            x[6 + 3 * a + k] = trial_moment.0[a][k];
        }
    }
    // Variable scales for finite-difference steps, and residual-row scales
    // for the convergence norm (rows mix strain-, gradient-, and
    // dimensionless units).
    let mut scale = [0.0f64; N];
    for s in scale[0..6].iter_mut() {
        *s = sigma_bar;
    }
    for s in scale[6..24].iter_mut() {
        *s = sigma_bar * params.b;
    }
    scale[24] = 1e-3 * sigma_bar;
    for s in scale[25..28].iter_mut() {
        *s = 1e-3 * sigma_bar * params.b;
    }
    let eps_scale = sigma_bar / params.mu;
    let mut row_scale = [1.0f64; N];
    for s in row_scale[0..6].iter_mut() {
        *s = eps_scale;
    }
    for s in row_scale[6..24].iter_mut() {
        *s = eps_scale / params.b;
    }
    for s in row_scale[25..28].iter_mut() {
        *s = sigma_bar * params.b;
    }

    let res = |x: &DVector<f64>| residual(x, trial_sigma, trial_moment, sigma_bar, p_eff, params);
    let norm = |r: &DVector<f64>| -> f64 {
        (0..N).map(|i| (r[i] / row_scale[i]).abs()).fold(0.0, f64::max)
    };

    let mut r = res(&x);
    for _ in 0..120 {
        if norm(&r) <= 1e-10 {
            let (sigma, moment, lambda, _) = unpack(&x);
            return Some(KktSolution {
                sigma,
                moment,
                lambda,
                residual_norm: norm(&r),
            });
        }
        let mut jac = DMatrix::zeros(N, N);
        for c in 0..N {
            let h = 1e-7 * x[c].abs().max(scale[c]);
            let mut xp = x.clone();
            xp[c] += h;
            let rp = res(&xp);
            let mut xm = x.clone();
            xm[c] -= h;
            let rm = res(&xm);
            for ri in 0..N {
                jac[(ri, c)] = (rp[ri] - rm[ri]) / (2.0 * h);
            }
        }
        let step = jac.lu().solve(&(-&r))?;
        // Damped acceptance: keep the residual finite and non-exploding.
        let base = norm(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &x + &step * alpha;
            let rc = res(&cand);
            let nc = norm(&rc);
            if nc.is_finite() && nc <= base * (1.0 - 1e-4 * alpha) + 1e-30 {
                x = cand;
                r = rc;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Take the tiny step anyway; FD Jacobians can stall near roundoff.
            x += &step * alpha;
            r = res(&x);
        }
    }
    if norm(&r) <= 1e-8 {
        let (sigma, moment, lambda, _) = unpack(&x);
        Some(KktSolution {
            sigma,
            moment,
            lambda,
            residual_norm: norm(&r),
        })
    } else {
        None
    }
}
