//! Packed storage and algebra for the symmetric rank-2 tensors and the
//! first-pair-symmetric rank-3 tensors used throughout the model.
//!
//! Conventions (fixed once here, relied on everywhere):
//! - Packed pair order is `(11, 22, 33, 12, 13, 23)` — see [`SYM_PAIRS`].
//! - Storage holds tensor components, never engineering (doubled) shears.
//!   Full-index contractions over packed storage therefore apply the pair
//!   multiplicity weights [`PAIR_W`] (2 for off-diagonal pairs) explicitly.
//! - A rank-3 moment-like tensor `M_ijk`, symmetric in `(i, j)`, is stored as
//!   `m[a][k]` with `a` the packed pair index and `k` the third index.
//! - Means and deviators of rank-3 tensors are taken over the first two
//!   indices: `mean_k = M_hhk / 3`.

/// Packed pair order: index `a` holds the `(i, j)` component.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Multiplicity of each packed pair in full-index sums.
pub const PAIR_W: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

/// Inverse map: `PAIR_OF[i][j]` is the packed index of `(i, j)`.
pub const PAIR_OF: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];

pub type Vector3 = nalgebra::Vector3<f64>;

/// Symmetric rank-2 tensor, packed components `(c11, c22, c33, c12, c13, c23)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTensor2(pub [f64; 6]);

/// Rank-3 tensor symmetric in its first two indices: `m[a][k]` where `a`
/// packs the pair `(i, j)` per [`SYM_PAIRS`] and `k` is the third index.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentTensor3(pub [[f64; 3]; 6]);

impl SymTensor2 {
    pub const ZERO: Self = Self([0.0; 6]);

    /// Identity tensor (Kronecker delta).
    pub const IDENTITY: Self = Self([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    pub fn new(c11: f64, c22: f64, c33: f64, c12: f64, c13: f64, c23: f64) -> Self {
        Self([c11, c22, c33, c12, c13, c23])
    }

    /// Full-index component `t_ij`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[PAIR_OF[i][j]]
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Frobenius norm with pair multiplicity: `sqrt(t_ij t_ij)`.
    pub fn norm(&self) -> f64 {
        sym_ddot(self, self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl MomentTensor3 {
    pub const ZERO: Self = Self([[0.0; 3]; 6]);

    /// Full-index component `m_ijk`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0[PAIR_OF[i][j]][k]
    }

    /// Trace over the first two indices: `t_k = m_hhk` (not divided by 3).
    pub fn trace12(&self) -> Vector3 {
        Vector3::new(
            self.0[0][0] + self.0[1][0] + self.0[2][0],
            self.0[0][1] + self.0[1][1] + self.0[2][1],
            self.0[0][2] + self.0[1][2] + self.0[2][2],
        )
    }

    /// Contraction of the second and third indices: `t_i = m_ijj`. The
    /// admissibility condition on moment states is `trace23 = 0`.
    pub fn trace23(&self) -> Vector3 {
        let mut t = Vector3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t[i] += self.0[PAIR_OF[i][j]][j];
            }
        }
        t
    }

    /// Frobenius norm with pair multiplicity: `sqrt(m_ijk m_ijk)`.
    pub fn norm(&self) -> f64 {
        moment_tdot(self, self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|row| row.iter().all(|c| c.is_finite()))
    }
}

// Arithmetic. Small fixed loops; written out once so the math modules read
// like the continuum formulas.

impl std::ops::Add for SymTensor2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.0;
        for a in 0..6 {
            out[a] += rhs.0[a];
        }
        Self(out)
    }
}

impl std::ops::Sub for SymTensor2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self.0;
        for a in 0..6 {
            out[a] -= rhs.0[a];
        }
        Self(out)
    }
}

impl std::ops::Mul<f64> for SymTensor2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let mut out = self.0;
        for c in &mut out {
            *c *= s;
        }
        Self(out)
    }
}

impl std::ops::Neg for SymTensor2 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl std::ops::Add for MomentTensor3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.0;
        for a in 0..6 {
            for k in 0..3 {
                out[a][k] += rhs.0[a][k];
            }
        }
        Self(out)
    }
}

impl std::ops::Sub for MomentTensor3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self.0;
        for a in 0..6 {
            for k in 0..3 {
                out[a][k] -= rhs.0[a][k];
            }
        }
        Self(out)
    }
}

impl std::ops::Mul<f64> for MomentTensor3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let mut out = self.0;
        for row in &mut out {
            for c in row.iter_mut() {
                *c *= s;
            }
        }
        Self(out)
    }
}

impl std::ops::Neg for MomentTensor3 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// Full double contraction `a_ij b_ij` over packed storage.
pub fn sym_ddot(a: &SymTensor2, b: &SymTensor2) -> f64 {
    let mut s = 0.0;
    for i in 0..6 {
        s += PAIR_W[i] * a.0[i] * b.0[i];
    }
    s
}

/// Full triple contraction `a_ijk b_ijk` over packed storage.
pub fn moment_tdot(a: &MomentTensor3, b: &MomentTensor3) -> f64 {
    let mut s = 0.0;
    for i in 0..6 {
        for k in 0..3 {
            s += PAIR_W[i] * a.0[i][k] * b.0[i][k];
        }
    }
    s
}

/// Splits a symmetric tensor into its deviator and mean: `t = dev + mean I`.
pub fn deviator_mean(t: &SymTensor2) -> (SymTensor2, f64) {
    let mean = t.trace() / 3.0;
    let mut dev = t.0;
    dev[0] -= mean;
    dev[1] -= mean;
    dev[2] -= mean;
    (SymTensor2(dev), mean)
}

/// Von Mises equivalent: `sqrt(3/2 dev:dev)`.
pub fn vonmises_eq(t: &SymTensor2) -> f64 {
    let (dev, _) = deviator_mean(t);
    (1.5 * sym_ddot(&dev, &dev)).sqrt()
}

/// Mean and deviator of a rank-3 tensor over its first two indices:
/// `mean_k = m_hhk / 3`, `dev_ijk = m_ijk - delta_ij mean_k`.
pub fn moment_mean_dev(m: &MomentTensor3) -> (Vector3, MomentTensor3) {
    let mean = m.trace12() / 3.0;
    let mut dev = m.0;
    for a in 0..3 {
        for k in 0..3 {
            dev[a][k] -= mean[k];
        }
    }
    (mean, MomentTensor3(dev))
}

/// Quadratic invariants of a rank-3 tensor: `M_I = M_mi M_mi` and
/// `M_II = (3/2) M'_ijk M'_ijk`, full-index sums.
pub fn moment_invariants(m: &MomentTensor3) -> (f64, f64) {
    let (mean, dev) = moment_mean_dev(m);
    let m_i = mean.dot(&mean);
    let m_ii = 1.5 * moment_tdot(&dev, &dev);
    (m_i, m_ii)
}

/// Assembles `m_ijk = dev_ijk + delta_ij mean_k` from mean and deviatoric
/// parts (inverse of [`moment_mean_dev`] when `dev` has zero first-pair trace).
pub fn moment_from_mean_dev(mean: &Vector3, dev: &MomentTensor3) -> MomentTensor3 {
    let mut out = dev.0;
    for a in 0..3 {
        for k in 0..3 {
            out[a][k] += mean[k];
        }
    }
    MomentTensor3(out)
}
