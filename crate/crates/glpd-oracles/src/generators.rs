//! Deterministic random tensors and material inputs with controlled
//! magnitudes, shared by all test suites so tolerances stay comparable.

use glpd_core::crng::Crng;
use glpd_core::material::{HardeningCurve, MaterialParams};
use glpd_core::tensor::{MomentTensor3, SymTensor2};

pub fn random_sym2(rng: &mut Crng, amp: f64) -> SymTensor2 {
    let mut c = [0.0; 6];
    for v in &mut c {
        *v = rng.symmetric(amp);
    }
    SymTensor2(c)
}

pub fn random_moment3(rng: &mut Crng, amp: f64) -> MomentTensor3 {
    let mut m = [[0.0; 3]; 6];
    for row in &mut m {
        for v in row.iter_mut() {
            *v = rng.symmetric(amp);
        }
    }
    MomentTensor3(m)
}

/// Strain increment with a bias toward positive dilatation (typical loading).
pub fn random_strain(rng: &mut Crng, amp: f64) -> SymTensor2 {
    let mut d = random_sym2(rng, amp);
    let dil = rng.range(-0.2 * amp, amp);
    for a in 0..3 {
        d.0[a] += dil;
    }
    d
}

/// Baseline parameter set used across the test suites: steel-like elasticity,
/// q = 1.47, microstructural length comparable to the strain-gradient scale.
pub fn baseline_params(hardening: HardeningCurve) -> MaterialParams {
    MaterialParams::from_engineering(203_000.0, 0.3, 0.55, 1.47, 0.05, 3.0, hardening).unwrap()
}

pub fn perfect_params(sigma_y: f64) -> MaterialParams {
    baseline_params(HardeningCurve::perfect(sigma_y))
}

pub fn hardening_params() -> MaterialParams {
    baseline_params(HardeningCurve::PowerLaw {
        sigma_y: 450.0,
        eps0: 0.01,
        n: 0.1,
    })
}
