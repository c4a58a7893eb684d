//! Brute-force oracles for the packed tensor algebra: every invariant is
//! recomputed from fully unpacked 3x3 / 3x3x3 arrays with naive triple loops
//! and compared against the packed-storage implementation.

use glpd_core::crng::Crng;
use glpd_core::tensor::{
    deviator_mean, moment_invariants, moment_mean_dev, moment_tdot, sym_ddot, vonmises_eq,
    MomentTensor3, SymTensor2, SYM_PAIRS,
};

fn unpack2(t: &SymTensor2) -> [[f64; 3]; 3] {
    let mut full = [[0.0; 3]; 3];
    for (a, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        full[i][j] = t.0[a];
        full[j][i] = t.0[a];
    }
    full
}

fn unpack3(m: &MomentTensor3) -> [[[f64; 3]; 3]; 3] {
    let mut full = [[[0.0; 3]; 3]; 3];
    for (a, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for k in 0..3 {
            full[i][j][k] = m.0[a][k];
            full[j][i][k] = m.0[a][k];
        }
    }
    full
}

fn random_sym2(rng: &mut Crng, amp: f64) -> SymTensor2 {
    let mut c = [0.0; 6];
    for v in &mut c {
        *v = rng.symmetric(amp);
    }
    SymTensor2(c)
}

fn random_moment3(rng: &mut Crng, amp: f64) -> MomentTensor3 {
    let mut m = [[0.0; 3]; 6];
    for row in &mut m {
        for v in row.iter_mut() {
            *v = rng.symmetric(amp);
        }
    }
    MomentTensor3(m)
}

// Naive full-index oracles.

fn oracle_vonmises(full: &[[f64; 3]; 3]) -> f64 {
    let mean = (full[0][0] + full[1][1] + full[2][2]) / 3.0;
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let dev = full[i][j] - if i == j { mean } else { 0.0 };
            s += dev * dev;
        }
    }
    (1.5 * s).sqrt()
}

fn oracle_moment_invariants(full: &[[[f64; 3]; 3]; 3]) -> (f64, f64) {
    let mut mean = [0.0; 3];
    for k in 0..3 {
        mean[k] = (full[0][0][k] + full[1][1][k] + full[2][2][k]) / 3.0;
    }
    let m_i = mean.iter().map(|v| v * v).sum::<f64>();
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let dev = full[i][j][k] - if i == j { mean[k] } else { 0.0 };
                s += dev * dev;
            }
        }
    }
    (m_i, 1.5 * s)
}

fn oracle_trace23(full: &[[[f64; 3]; 3]; 3]) -> [f64; 3] {
    let mut t = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i] += full[i][j][j];
        }
    }
    t
}

fn rel_close(a: f64, b: f64, tol: f64, scale: f64) {
    assert!(
        (a - b).abs() <= tol * scale.max(1.0),
        "mismatch: {a} vs {b} (scale {scale})"
    );
}

#[test]
fn deviator_mean_worked_examples() {
    let (dev, mean) = deviator_mean(&SymTensor2::IDENTITY);
    assert_eq!(mean, 1.0);
    assert_eq!(dev, SymTensor2::ZERO);

    let sigma = 350.0;
    let (dev, mean) = deviator_mean(&SymTensor2::new(sigma, 0.0, 0.0, 0.0, 0.0, 0.0));
    assert!((mean - sigma / 3.0).abs() < 1e-13 * sigma);
    assert!((dev.0[0] - 2.0 * sigma / 3.0).abs() < 1e-13 * sigma);
    assert!((dev.0[1] + sigma / 3.0).abs() < 1e-13 * sigma);
    assert!((dev.0[2] + sigma / 3.0).abs() < 1e-13 * sigma);

    // Idempotence on an already-traceless tensor.
    let t = SymTensor2::new(1.0, 2.0, -3.0, 0.4, -0.5, 0.6);
    let (dev, _) = deviator_mean(&t);
    let (dev2, mean2) = deviator_mean(&dev);
    assert_eq!(dev, dev2);
    assert!(mean2.abs() < 1e-15);
}

#[test]
fn vonmises_worked_examples() {
    let sigma = 275.0;
    let uni = SymTensor2::new(sigma, 0.0, 0.0, 0.0, 0.0, 0.0);
    rel_close(vonmises_eq(&uni), sigma, 1e-14, sigma);

    let hydro = SymTensor2::IDENTITY * -120.0;
    assert!(vonmises_eq(&hydro).abs() < 1e-12);

    // Pure shear c12 = tau: dev:dev = 2 tau^2, eq = sqrt(3) |tau|.
    let tau = 90.0;
    let shear = SymTensor2::new(0.0, 0.0, 0.0, tau, 0.0, 0.0);
    rel_close(vonmises_eq(&shear), 3.0_f64.sqrt() * tau, 1e-14, tau);
}

#[test]
fn moment_mean_dev_worked_examples() {
    let (mean, dev) = moment_mean_dev(&MomentTensor3::ZERO);
    assert_eq!(mean.norm(), 0.0);
    assert_eq!(dev, MomentTensor3::ZERO);

    // Only m_111 = m.
    let m = 17.0;
    let mut t = MomentTensor3::ZERO;
    t.0[0][0] = m;
    let (mean, dev) = moment_mean_dev(&t);
    rel_close(mean[0], m / 3.0, 1e-14, m);
    assert_eq!(mean[1], 0.0);
    assert_eq!(mean[2], 0.0);
    rel_close(dev.0[0][0], 2.0 * m / 3.0, 1e-14, m);
    rel_close(dev.0[1][0], -m / 3.0, 1e-14, m);
    rel_close(dev.0[2][0], -m / 3.0, 1e-14, m);

    // Off-diagonal pair is untouched by the first-pair trace.
    let mut t = MomentTensor3::ZERO;
    t.0[3][2] = 5.0; // m_123
    let (mean, dev) = moment_mean_dev(&t);
    assert_eq!(mean.norm(), 0.0);
    assert_eq!(dev, t);
}

#[test]
fn moment_invariants_worked_examples() {
    assert_eq!(moment_invariants(&MomentTensor3::ZERO), (0.0, 0.0));

    // Only m_111 = m: M_I = m^2/9, M_II = (3/2)((2m/3)^2 + 2(m/3)^2) = m^2.
    let m = 11.0;
    let mut t = MomentTensor3::ZERO;
    t.0[0][0] = m;
    let (mi, mii) = moment_invariants(&t);
    rel_close(mi, m * m / 9.0, 1e-14, m * m);
    rel_close(mii, m * m, 1e-14, m * m);

    // Degree-2 homogeneity.
    let mut rng = Crng::new(3);
    let t = random_moment3(&mut rng, 4.0);
    let alpha = 2.5;
    let (mi, mii) = moment_invariants(&t);
    let (mi_s, mii_s) = moment_invariants(&(t * alpha));
    rel_close(mi_s, alpha * alpha * mi, 1e-13, mi_s.abs());
    rel_close(mii_s, alpha * alpha * mii, 1e-13, mii_s.abs());
}

#[test]
fn packed_matches_brute_force_on_random_tensors() {
    let mut rng = Crng::new(2026);
    for _ in 0..100 {
        let t = random_sym2(&mut rng, 300.0);
        let full = unpack2(&t);
        rel_close(vonmises_eq(&t), oracle_vonmises(&full), 1e-12, t.norm());

        // ddot against naive loop.
        let u = random_sym2(&mut rng, 300.0);
        let full_u = unpack2(&u);
        let mut naive = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                naive += full[i][j] * full_u[i][j];
            }
        }
        rel_close(sym_ddot(&t, &u), naive, 1e-12, naive.abs());

        let m = random_moment3(&mut rng, 50.0);
        let full_m = unpack3(&m);
        let (mi, mii) = moment_invariants(&m);
        let (omi, omii) = oracle_moment_invariants(&full_m);
        rel_close(mi, omi, 1e-12, omi);
        rel_close(mii, omii, 1e-12, omii);

        let n = random_moment3(&mut rng, 50.0);
        let full_n = unpack3(&n);
        let mut naive3 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    naive3 += full_m[i][j][k] * full_n[i][j][k];
                }
            }
        }
        rel_close(moment_tdot(&m, &n), naive3, 1e-12, naive3.abs());

        let t23 = m.trace23();
        let o23 = oracle_trace23(&full_m);
        for i in 0..3 {
            rel_close(t23[i], o23[i], 1e-13, m.norm());
        }
    }
}

#[test]
fn roundtrip_and_positivity() {
    let mut rng = Crng::new(99);
    let a_i = 0.194;
    let a_ii = 6.108;
    for _ in 0..100 {
        let t = random_sym2(&mut rng, 500.0);
        let (dev, mean) = deviator_mean(&t);
        let back = dev + SymTensor2::IDENTITY * mean;
        for a in 0..6 {
            assert!((back.0[a] - t.0[a]).abs() <= 1e-14 * t.norm().max(1.0));
        }
        assert!(dev.trace().abs() <= 1e-14 * t.norm().max(1.0));

        let m = random_moment3(&mut rng, 80.0);
        let (mean3, dev3) = moment_mean_dev(&m);
        let back3 = glpd_core::tensor::moment_from_mean_dev(&mean3, &dev3);
        for a in 0..6 {
            for k in 0..3 {
                assert!((back3.0[a][k] - m.0[a][k]).abs() <= 1e-14 * m.norm().max(1.0));
            }
        }
        // Deviator has zero first-pair trace per k.
        let tr12 = dev3.trace12();
        assert!(tr12.norm() <= 1e-13 * m.norm().max(1.0));

        // Q^2 = A_I M_I + A_II M_II is nonnegative for any input.
        let (mi, mii) = moment_invariants(&m);
        assert!(a_i * mi + a_ii * mii >= 0.0);
    }
}
