//! Tangent verification: closed-form elastic entries, the classical J2
//! consistent tangent, finite-difference campaigns with convergence-order
//! checks, homogeneity, admissibility of the moment columns, and the report
//! plumbing.

use glpd_core::crng::Crng;
use glpd_core::material::predictor::{
    elastic_moment_increment, elastic_predictor, elastic_stress_increment,
};
use glpd_core::material::{
    integrate_step, project, MaterialState, ProjectionOpts, StepOpts,
};
use glpd_core::tangent::{
    apply_blocks, consistent_tangent, elastic_moment_matrix, elastic_tangent, fd_tangent,
    flatten_moment, hooke_matrix, step_with_tangent, tangent_report, unflatten_moment, Mat1818,
    Mat66, TangentBlocks,
};
use glpd_core::tensor::{MomentTensor3, SymTensor2};
use glpd_core::GlpdError;
use glpd_oracles::generators::{
    hardening_params, perfect_params, random_moment3, random_strain, random_sym2,
};
use glpd_oracles::j2;
use nalgebra::SMatrix;

fn max_rel<const R: usize, const C: usize>(
    a: &SMatrix<f64, R, C>,
    b: &SMatrix<f64, R, C>,
) -> f64 {
    let mut block_max = 0.0_f64;
    for i in 0..R {
        for j in 0..C {
            block_max = block_max.max(a[(i, j)].abs()).max(b[(i, j)].abs());
        }
    }
    if block_max == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..R {
        for j in 0..C {
            let denom = b[(i, j)].abs().max(1e-3 * block_max);
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / denom);
        }
    }
    worst
}

/// A random plastic case: start-of-step state plus increments that take the
/// trial well beyond yield, with strain-gradient activity.
fn random_plastic_case(
    rng: &mut Crng,
    params: &glpd_core::material::MaterialParams,
) -> (MaterialState, SymTensor2, MomentTensor3) {
    let f0 = rng.range(1e-4, 0.12);
    let e0 = rng.range(0.0, 0.10);
    let mut state = MaterialState::initial(f0);
    state.e = e0;
    state.sigma = random_sym2(rng, 250.0);
    state.moment = elastic_moment_increment(&random_moment3(rng, 2e-3), params);
    let d_eps = random_strain(rng, 4e-3);
    let d_gradw = random_moment3(rng, 5e-3);
    (state, d_eps, d_gradw)
}

#[test]
fn elastic_blocks_match_the_closed_form_and_the_predictor() {
    let params = hardening_params();
    let blocks = elastic_tangent(&params);
    // Uniaxial diagonal entry of the Hooke block.
    let expect = params.lambda + 2.0 * params.mu;
    assert!((blocks.dsig_deps[(1, 1)] - expect).abs() <= 1e-9 * expect);
    assert!((expect - 273_269.2).abs() < 0.5);
    // Coupling blocks vanish exactly.
    assert_eq!(blocks.dsig_dgradw.norm(), 0.0);
    assert_eq!(blocks.dm_deps.norm(), 0.0);
    // Operator form against the predictor functions on random directions.
    let mut rng = Crng::new(0x7a17);
    for _ in 0..20 {
        let d_eps = random_strain(&mut rng, 3e-3);
        let d_gradw = random_moment3(&mut rng, 4e-3);
        let (ds, dm) = apply_blocks(&blocks, &d_eps, &d_gradw);
        let ds_ref = elastic_stress_increment(&d_eps, &params);
        let dm_ref = elastic_moment_increment(&d_gradw, &params);
        assert!((ds - ds_ref).norm() <= 1e-12 * ds_ref.norm());
        assert!((dm - dm_ref).norm() <= 1e-12 * dm_ref.norm());
    }
}

#[test]
fn j2_limit_matches_the_radial_return_tangent() {
    let params = perfect_params(400.0);
    let opts = ProjectionOpts::default();
    let mut rng = Crng::new(0x1a2b);
    let mut checked = 0;
    while checked < 40 {
        let state = MaterialState::initial(0.0);
        let d_eps = random_strain(&mut rng, 5e-3);
        let trial = elastic_predictor(&state, &d_eps, &MomentTensor3::ZERO, &params);
        if trial.sigma_eq <= 400.0 * 1.001 {
            continue;
        }
        let sol = project(&trial, &state, &params, &opts).unwrap();
        let blocks = consistent_tangent(&sol, &trial, &state, &params).unwrap();
        let oracle =
            j2::radial_return_tangent(&trial.sigma_star, 400.0, params.lambda, params.mu);
        let mut oracle_mat = Mat66::zeros();
        for r in 0..6 {
            for c in 0..6 {
                oracle_mat[(r, c)] = oracle[r][c];
            }
        }
        assert!(
            max_rel(&blocks.dsig_deps, &oracle_mat) <= 1e-8,
            "radial-return tangent mismatch: {:e}",
            max_rel(&blocks.dsig_deps, &oracle_mat)
        );
        // Moment coupling vanishes identically in the von Mises limit.
        let em_scale = elastic_moment_matrix(&params).norm();
        let hooke_scale = hooke_matrix(&params).norm();
        assert!(blocks.dsig_dgradw.norm() <= 1e-10 * hooke_scale);
        assert!(blocks.dm_deps.norm() <= 1e-10 * em_scale);
        checked += 1;
    }
}

#[test]
fn moment_operator_is_elastic_at_the_yield_onset_limit() {
    // At a marginally plastic step with no moment trial the moment block
    // recovers the elastic moment operator and the coupling blocks vanish.
    let params = perfect_params(450.0);
    let state = MaterialState::initial(0.0);
    let dir = SymTensor2::new(1.0e-3, -0.4e-3, -0.6e-3, 0.7e-3, 0.2e-3, -0.3e-3);
    let probe = elastic_predictor(&state, &dir, &MomentTensor3::ZERO, &params);
    let scale = 450.0 * (1.0 + 1e-11) / probe.sigma_eq;
    let d_eps = dir * scale;
    let trial = elastic_predictor(&state, &d_eps, &MomentTensor3::ZERO, &params);
    assert!(trial.sigma_eq > 450.0);
    let sol = project(&trial, &state, &params, &ProjectionOpts::default()).unwrap();
    assert!(!sol.elastic_fallback);
    let blocks = consistent_tangent(&sol, &trial, &state, &params).unwrap();
    let elastic = elastic_tangent(&params);
    assert!(
        max_rel(&blocks.dm_dgradw, &elastic.dm_dgradw) <= 1e-10,
        "moment block deviates at onset: {:e}",
        max_rel(&blocks.dm_dgradw, &elastic.dm_dgradw)
    );
    assert!(blocks.dsig_dgradw.norm() <= 1e-10 * elastic.dsig_deps.norm());
    assert!(blocks.dm_deps.norm() <= 1e-10 * elastic.dm_dgradw.norm());
    // The deviatoric stress block, by contrast, keeps its O(1) radial-return
    // correction however small the overshoot (verified against the closed
    // form in the J2 test); only the moment relaxation fades with it.
}

#[test]
fn moment_relaxation_at_the_von_mises_limit_is_real() {
    // At a strongly plastic von Mises state the plastic multiplier relaxes
    // perturbations of the moment trial, so dM_dGradW sits well below the
    // elastic operator; the FD oracle confirms the analytic relaxation.
    let params = perfect_params(400.0);
    let state = MaterialState::initial(0.0);
    let d_eps = SymTensor2::new(3.0e-3, -1.0e-3, -1.6e-3, 1.1e-3, 0.4e-3, -0.7e-3);
    let d_gradw = MomentTensor3::ZERO;
    let (_, info) =
        integrate_step(&state, &d_eps, &d_gradw, &params, &StepOpts::default()).unwrap();
    assert!(info.plastic);
    let trial = elastic_predictor(&state, &d_eps, &d_gradw, &params);
    let sol = project(&trial, &state, &params, &ProjectionOpts::default()).unwrap();
    let blocks = consistent_tangent(&sol, &trial, &state, &params).unwrap();
    let elastic = elastic_tangent(&params);
    assert!(
        max_rel(&blocks.dm_dgradw, &elastic.dm_dgradw) > 0.05,
        "expected visible moment relaxation, got {:e}",
        max_rel(&blocks.dm_dgradw, &elastic.dm_dgradw)
    );
    let fd = fd_tangent(&state, &d_eps, &d_gradw, &params, 1e-5).unwrap();
    let report = tangent_report(&blocks, &fd, 1e-5);
    assert!(report.max_rel_err() <= 1e-5, "{:e}", report.max_rel_err());
}

#[test]
fn consistent_tangent_matches_finite_differences_on_random_plastic_states() {
    let params = hardening_params();
    let opts = StepOpts::default();
    let mut rng = Crng::new(0xfd50);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 50 {
        attempts += 1;
        assert!(attempts < 500, "case generation starved");
        let (state, d_eps, d_gradw) = random_plastic_case(&mut rng, &params);
        let Ok((_, info)) = integrate_step(&state, &d_eps, &d_gradw, &params, &opts) else {
            continue;
        };
        if !info.plastic {
            continue;
        }
        let trial = elastic_predictor(&state, &d_eps, &d_gradw, &params);
        let sol = project(&trial, &state, &params, &opts.projection).unwrap();
        let analytic = consistent_tangent(&sol, &trial, &state, &params).unwrap();
        // 1e-5 relative sits at the bottom of the central-difference U-curve
        // for the projection's residual tolerances; smaller steps drift onto
        // the solver-noise branch.
        let fd = fd_tangent(&state, &d_eps, &d_gradw, &params, 1e-5).unwrap();
        let report = tangent_report(&analytic, &fd, 1e-5);
        for block in &report.blocks {
            assert!(
                block.max_rel_err <= 1e-5,
                "case {checked}: block {} error {:e} at {:?}",
                block.name,
                block.max_rel_err,
                block.worst
            );
        }
        checked += 1;
    }
}

#[test]
fn fd_error_shrinks_quadratically_with_the_step() {
    let params = hardening_params();
    let mut rng = Crng::new(0x0bde);
    let (state, d_eps, d_gradw) = loop {
        let case = random_plastic_case(&mut rng, &params);
        let Ok((_, info)) = integrate_step(&case.0, &case.1, &case.2, &params, &StepOpts::default())
        else {
            continue;
        };
        if info.plastic {
            break case;
        }
    };
    let trial = elastic_predictor(&state, &d_eps, &d_gradw, &params);
    let sol = project(&trial, &state, &params, &ProjectionOpts::default()).unwrap();
    let analytic = consistent_tangent(&sol, &trial, &state, &params).unwrap();
    let err_at = |step: f64| {
        let fd = fd_tangent(&state, &d_eps, &d_gradw, &params, step).unwrap();
        tangent_report(&analytic, &fd, step).max_rel_err()
    };
    let coarse = err_at(8e-3);
    let mid = err_at(4e-3);
    let fine = err_at(2e-3);
    let r1 = coarse / mid;
    let r2 = mid / fine;
    assert!(
        (3.0..5.0).contains(&r1) && (3.0..5.0).contains(&r2),
        "central-difference order: errors {coarse:e} {mid:e} {fine:e}, ratios {r1:.2} {r2:.2}"
    );
    // At the roundoff floor the report flags the FD reference as unreliable.
    let floor = err_at(1e-12);
    assert!(floor > 1e-4, "roundoff-floor FD looked reliable: {floor:e}");
}

#[test]
fn blocks_are_invariant_under_flow_stress_scaling() {
    let alpha = 3.7;
    let pa = perfect_params(450.0);
    let pb = perfect_params(450.0 * alpha);
    let mut rng = Crng::new(0x5ca1e);
    let mut checked = 0;
    while checked < 25 {
        let f0 = rng.range(1e-3, 0.15);
        let mut sa = MaterialState::initial(f0);
        sa.sigma = random_sym2(&mut rng, 200.0);
        sa.moment = elastic_moment_increment(&random_moment3(&mut rng, 1.5e-3), &pa);
        let d_eps = random_strain(&mut rng, 4e-3);
        let d_gradw = random_moment3(&mut rng, 4e-3);
        let ta = elastic_predictor(&sa, &d_eps, &d_gradw, &pa);
        let Ok(sol_a) = project(&ta, &sa, &pa, &ProjectionOpts::default()) else {
            continue;
        };
        if sol_a.elastic_fallback {
            continue;
        }
        let mut sb_state = sa;
        sb_state.sigma = sa.sigma * alpha;
        sb_state.moment = sa.moment * alpha;
        let tb = elastic_predictor(&sb_state, &(d_eps * alpha), &(d_gradw * alpha), &pb);
        let sol_b = project(&tb, &sb_state, &pb, &ProjectionOpts::default()).unwrap();
        let ba = consistent_tangent(&sol_a, &ta, &sa, &pa).unwrap();
        let bb = consistent_tangent(&sol_b, &tb, &sb_state, &pb).unwrap();
        assert!(max_rel(&ba.dsig_deps, &bb.dsig_deps) <= 1e-9);
        assert!(max_rel(&ba.dsig_dgradw, &bb.dsig_dgradw) <= 1e-9);
        assert!(max_rel(&ba.dm_deps, &bb.dm_deps) <= 1e-9);
        assert!(max_rel(&ba.dm_dgradw, &bb.dm_dgradw) <= 1e-9);
        checked += 1;
    }
}

#[test]
fn moment_columns_stay_admissible() {
    let params = hardening_params();
    let mut rng = Crng::new(0xadb1);
    let mut checked = 0;
    while checked < 20 {
        let (state, d_eps, d_gradw) = random_plastic_case(&mut rng, &params);
        let trial = elastic_predictor(&state, &d_eps, &d_gradw, &params);
        let Ok(sol) = project(&trial, &state, &params, &ProjectionOpts::default()) else {
            continue;
        };
        if sol.elastic_fallback {
            continue;
        }
        let blocks = consistent_tangent(&sol, &trial, &state, &params).unwrap();
        let scale_e = blocks.dm_deps.norm();
        for c in 0..6 {
            let mut col = [0.0; 18];
            for r in 0..18 {
                col[r] = blocks.dm_deps[(r, c)];
            }
            let m = unflatten_moment(&col);
            assert!(m.trace23().norm() <= 1e-10 * scale_e.max(m.norm()));
        }
        let scale_g = blocks.dm_dgradw.norm();
        for c in 0..18 {
            let mut col = [0.0; 18];
            for r in 0..18 {
                col[r] = blocks.dm_dgradw[(r, c)];
            }
            let m = unflatten_moment(&col);
            assert!(m.trace23().norm() <= 1e-10 * scale_g.max(m.norm()));
        }
        checked += 1;
    }
}

#[test]
fn fd_matches_the_elastic_tangent_in_the_elastic_regime() {
    let params = hardening_params();
    let state = MaterialState::initial(0.01);
    let d_eps = SymTensor2::new(4e-4, -1e-4, 2e-4, 1e-4, -2e-4, 3e-4);
    let d_gradw = random_moment3(&mut Crng::new(0xe1a5), 3e-4);
    let (_, info) = integrate_step(&state, &d_eps, &d_gradw, &params, &StepOpts::default()).unwrap();
    assert!(!info.plastic);
    let fd = fd_tangent(&state, &d_eps, &d_gradw, &params, 1e-6).unwrap();
    let report = tangent_report(&elastic_tangent(&params), &fd, 1e-6);
    assert!(report.max_rel_err() <= 1e-8, "{:e}", report.max_rel_err());
}

#[test]
fn consistent_tangent_refuses_elastic_solutions() {
    let params = hardening_params();
    let state = MaterialState::initial(0.01);
    let d_eps = SymTensor2::new(2e-4, 0.0, 0.0, 1e-4, 0.0, 0.0);
    let trial = elastic_predictor(&state, &d_eps, &MomentTensor3::ZERO, &params);
    let sol = project(&trial, &state, &params, &ProjectionOpts::default()).unwrap();
    assert!(sol.elastic_fallback);
    match consistent_tangent(&sol, &trial, &state, &params) {
        Err(GlpdError::NotPlastic) => {}
        other => panic!("expected NotPlastic, got {other:?}"),
    }
}

#[test]
fn tangent_report_localizes_injected_errors() {
    let params = hardening_params();
    let blocks = elastic_tangent(&params);
    let report = tangent_report(&blocks, &blocks, 1e-6);
    assert_eq!(report.max_rel_err(), 0.0);

    let mut perturbed = TangentBlocks {
        dsig_deps: blocks.dsig_deps,
        dsig_dgradw: blocks.dsig_dgradw,
        dm_deps: blocks.dm_deps,
        dm_dgradw: blocks.dm_dgradw,
    };
    perturbed.dsig_deps[(2, 4)] = blocks.dsig_deps.norm() * 0.01
        + perturbed.dsig_deps[(2, 4)] * 1.01;
    let report = tangent_report(&perturbed, &blocks, 1e-6);
    assert_eq!(report.blocks[0].worst, (2, 4));
    assert!(report.blocks[0].max_rel_err > 1e-3);
    assert!(report.blocks[1].max_rel_err == 0.0);

    // A 1% relative bump on the largest entry reports ~1e-2 at its indices.
    let mut bumped = TangentBlocks {
        dsig_deps: blocks.dsig_deps,
        dsig_dgradw: blocks.dsig_dgradw,
        dm_deps: blocks.dm_deps,
        dm_dgradw: blocks.dm_dgradw,
    };
    bumped.dm_dgradw[(0, 0)] *= 1.01;
    let report = tangent_report(&bumped, &blocks, 1e-6);
    let b = &report.blocks[3];
    assert_eq!(b.worst, (0, 0));
    assert!((b.max_rel_err - 0.01).abs() < 2e-3);
}

// Referenced to keep the flattening helpers honest if layouts evolve.
#[test]
fn moment_flattening_round_trips() {
    let mut rng = Crng::new(0x0f1a);
    let m = random_moment3(&mut rng, 2.0);
    let flat = flatten_moment(&m);
    let back = unflatten_moment(&flat);
    assert_eq!(m, back);
    let em: Mat1818 = elastic_moment_matrix(&hardening_params());
    assert!(em.norm() > 0.0);
}

#[test]
fn step_with_tangent_agrees_with_the_separate_calls() {
    let params = hardening_params();
    let mut rng = Crng::new(0xfe11);
    for _ in 0..10 {
        let (state, d_eps, d_gradw) = random_plastic_case(&mut rng, &params);
        let opts = StepOpts::default();
        let (ns_ref, info_ref) =
            integrate_step(&state, &d_eps, &d_gradw, &params, &opts).unwrap();
        let (ns, info, blocks) =
            step_with_tangent(&state, &d_eps, &d_gradw, &params, &opts.projection).unwrap();
        assert_eq!(ns.sigma.0, ns_ref.sigma.0);
        assert_eq!(ns.moment.0, ns_ref.moment.0);
        assert_eq!(ns.f, ns_ref.f);
        assert_eq!(ns.e, ns_ref.e);
        assert_eq!(info.plastic, info_ref.plastic);
        if info.plastic {
            let trial = elastic_predictor(&state, &d_eps, &d_gradw, &params);
            let sol = project(&trial, &state, &params, &opts.projection).unwrap();
            let direct = consistent_tangent(&sol, &trial, &state, &params).unwrap();
            assert_eq!(blocks.dsig_deps, direct.dsig_deps);
            assert_eq!(blocks.dm_dgradw, direct.dm_dgradw);
        } else {
            assert_eq!(blocks.dsig_deps, elastic_tangent(&params).dsig_deps);
        }
    }
}
