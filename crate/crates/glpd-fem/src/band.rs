//! Banded LU with partial pivoting, LAPACK-style band storage: entry
//! `(i, j)` lives at `data[j * ldab + kl + ku + i - j]` with
//! `ldab = 2 kl + ku + 1`; the extra `kl` superdiagonals hold pivoting fill.

use crate::error::{FemError, Result};

#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i, "outside band");
        j * self.ldab + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let at = self.idx(i, j);
        self.data[at] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku >= j && j + self.kl >= i {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Replaces row `i` by the unit row `e_i` (within the band, which is all
    /// a band matrix can represent; callers guarantee the rest is zero).
    pub fn set_unit_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku + self.kl).min(self.n - 1);
        for j in lo..=hi {
            if i + self.ku + self.kl >= j && j + self.kl >= i {
                let at = self.idx(i, j);
                self.data[at] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }

    /// Zeros column `i` above and below the diagonal (within the band),
    /// keeping the diagonal itself.
    pub fn clear_column(&mut self, j: usize) {
        let lo = j.saturating_sub(self.ku);
        let hi = (j + self.kl).min(self.n - 1);
        for i in lo..=hi {
            if i != j {
                let at = self.idx(i, j);
                self.data[at] = 0.0;
            }
        }
    }

    /// Factors in place with partial pivoting; errors name the zero-pivot
    /// global dof.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku; // effective upper bandwidth after fill
        let mut ipiv = vec![0usize; n];
        #[allow(clippy::needless_range_loop)]
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0usize;
            let mut best = self.data[self.idx(j, j)].abs();
            for t in 1..=km {
                let v = self.data[self.idx(j + t, j)].abs();
                if v > best {
                    best = v;
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            let pivot = self.data[self.idx(j + jp, j)];
            if pivot == 0.0 {
                return Err(FemError::Singular { dof: j });
            }
            let hi = (j + kv).min(n - 1);
            if jp != 0 {
                for jj in j..=hi {
                    let a = self.idx(j, jj);
                    let b = self.idx(j + jp, jj);
                    self.data.swap(a, b);
                }
            }
            let diag = self.data[self.idx(j, j)];
            for i in j + 1..=j + km {
                let at = self.idx(i, j);
                self.data[at] /= diag;
            }
            for jj in j + 1..=hi {
                let ujj = self.data[self.idx(j, jj)];
                if ujj == 0.0 {
                    continue;
                }
                for i in j + 1..=j + km {
                    let l = self.data[self.idx(i, j)];
                    let at = self.idx(i, jj);
                    self.data[at] -= l * ujj;
                }
            }
        }
        Ok(BandLu { a: self, ipiv })
    }
}

/// Factored band matrix.
pub struct BandLu {
    a: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.a.n, self.a.kl, self.a.ku);
        let kv = kl + ku;
        assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            for i in j + 1..=j + km {
                b[i] -= self.a.data[self.a.idx(i, j)] * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.a.data[self.a.idx(j, j)];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                b[i] -= self.a.data[self.a.idx(i, j)] * b[j];
            }
        }
    }
}
