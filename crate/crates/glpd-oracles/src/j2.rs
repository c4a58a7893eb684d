//! Closed-form von Mises radial return and its consistent tangent (perfect
//! plasticity, no porosity, no moments).

use glpd_core::tensor::{deviator_mean, vonmises_eq, SymTensor2, PAIR_W, SYM_PAIRS};

/// Radial return: `Sigma = (sigma_y/Sigma*_eq) Sigma*' + Sigma*_m I`.
/// Caller guarantees `Sigma*_eq > sigma_y`.
pub fn radial_return(sigma_star: &SymTensor2, sigma_y: f64) -> SymTensor2 {
    let (dev, mean) = deviator_mean(sigma_star);
    let eq = vonmises_eq(sigma_star);
    dev * (sigma_y / eq) + SymTensor2::IDENTITY * mean
}

/// Closed-form consistent tangent `d Sigma / d eps` of the radial return,
/// packed 6x6 with the input-column pair weights (column b multiplied by
/// `PAIR_W[b]`), matching the library's tangent-block convention:
/// `dSigma'_ij/d eps_pq = sigma_y [2 mu I_dev/Sigma*_eq
///   - 3 mu Sigma*'_ij Sigma*'_pq / Sigma*_eq^3] + bulk d_ij d_pq`.
pub fn radial_return_tangent(
    sigma_star: &SymTensor2,
    sigma_y: f64,
    lambda: f64,
    mu: f64,
) -> [[f64; 6]; 6] {
    let (dev, _) = deviator_mean(sigma_star);
    let eq = vonmises_eq(sigma_star);
    let bulk = lambda + 2.0 * mu / 3.0;
    let mut out = [[0.0; 6]; 6];
    for (ao, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        for (ai, &(p, q)) in SYM_PAIRS.iter().enumerate() {
            // Symmetrized identity minus spherical part.
            let sym = 0.5
                * ((if i == p { 1.0 } else { 0.0 }) * (if j == q { 1.0 } else { 0.0 })
                    + (if i == q { 1.0 } else { 0.0 }) * (if j == p { 1.0 } else { 0.0 }));
            let sph = if i == j && p == q { 1.0 / 3.0 } else { 0.0 };
            let idev = sym - sph;
            let mut v = sigma_y * (2.0 * mu * idev / eq - 3.0 * mu * dev.0[ao] * dev.0[ai] / (eq * eq * eq));
            if i == j && p == q {
                v += bulk;
            }
            out[ao][ai] = PAIR_W[ai] * v;
        }
    }
    out
}
