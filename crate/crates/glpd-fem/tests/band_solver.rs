//! Banded LU against a dense nalgebra factorization on random systems, plus
//! singular-pivot detection.

use glpd_core::crng::Crng;
use glpd_fem::band::BandMatrix;
use glpd_fem::FemError;
use nalgebra::{DMatrix, DVector};

fn random_band_system(rng: &mut Crng, n: usize, kl: usize, ku: usize) -> (BandMatrix, Vec<f64>) {
    let mut m = BandMatrix::zeros(n, kl, ku);
    for i in 0..n {
        for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
            m.add(i, j, rng.symmetric(1.0));
        }
        // Diagonal dominance is deliberately absent; pivoting has to work.
        m.add(i, i, rng.symmetric(2.0));
    }
    let b: Vec<f64> = (0..n).map(|_| rng.symmetric(1.0)).collect();
    (m, b)
}

fn to_dense(m: &BandMatrix, n: usize, kl: usize, ku: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
            d[(i, j)] = m.get(i, j);
        }
    }
    d
}

#[test]
fn band_lu_matches_a_dense_solve() {
    let mut rng = Crng::new(0x00b0_57ed);
    for trial in 0..25 {
        let n = 5 + (trial % 7) * 6;
        let kl = 1 + trial % 8;
        let ku = 1 + (trial / 3) % 8;
        let (m, b) = random_band_system(&mut rng, n, kl, ku);
        let dense = to_dense(&m, n, kl, ku);

        let lu = m.factor().unwrap();
        let mut x = b.clone();
        lu.solve(&mut x);

        let xd = dense
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&b))
            .expect("dense solve");
        let scale = xd.amax().max(1.0);
        for i in 0..n {
            assert!(
                (x[i] - xd[i]).abs() <= 1e-10 * scale,
                "trial {trial}: x[{i}] = {} vs dense {}",
                x[i],
                xd[i]
            );
        }
    }
}

#[test]
fn constraint_rows_survive_pivoting() {
    // Unit rows with cleared columns are how boundary conditions enter the
    // system; the factorization must reproduce them exactly.
    let mut rng = Crng::new(0x0c05_7a11);
    let n = 40;
    let (mut m, mut b) = random_band_system(&mut rng, n, 5, 5);
    for dof in [0usize, 17, 39] {
        m.set_unit_row(dof);
        m.clear_column(dof);
        b[dof] = 0.0;
    }
    let dense = to_dense(&m, n, 5, 5);
    let lu = m.factor().unwrap();
    let mut x = b.clone();
    lu.solve(&mut x);
    assert_eq!(x[0], 0.0);
    assert_eq!(x[17], 0.0);
    assert_eq!(x[39], 0.0);
    let xd = dense.lu().solve(&DVector::from_column_slice(&b)).unwrap();
    for i in 0..n {
        assert!((x[i] - xd[i]).abs() <= 1e-10 * xd.amax().max(1.0));
    }
}

#[test]
fn singular_matrices_name_the_offending_dof() {
    let n = 6;
    let mut m = BandMatrix::zeros(n, 2, 2);
    for i in 0..n {
        if i != 4 {
            m.add(i, i, 1.0);
        }
    }
    // Row/column 4 is entirely zero: elimination hits a zero pivot there.
    match m.factor() {
        Err(FemError::Singular { dof }) => assert_eq!(dof, 4),
        other => panic!("expected singular error, got {other:?}"),
    }
}
