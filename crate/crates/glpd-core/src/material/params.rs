//! Material parameters, hardening curves, and porosity-derived scalars.

use crate::error::{GlpdError, Result};

/// Default criterion constant weighting the mean-moment invariant `M_I`.
pub const A_I: f64 = 0.194;
/// Default criterion constant weighting the deviatoric-moment invariant `M_II`.
pub const A_II: f64 = 6.108;

/// Matrix hardening law `sigma_bar(E)`.
#[derive(Clone, Debug, PartialEq)]
pub enum HardeningCurve {
    /// Piecewise-linear `(E, sigma_bar)` knots; flat extrapolation (h = 0)
    /// beyond the last knot. A single knot is perfect plasticity.
    Table(Vec<(f64, f64)>),
    /// `sigma_bar = sigma_y (1 + E/eps0)^n`.
    PowerLaw { sigma_y: f64, eps0: f64, n: f64 },
}

impl HardeningCurve {
    pub fn perfect(sigma_y: f64) -> Self {
        Self::Table(vec![(0.0, sigma_y)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Table(knots) => {
                if knots.is_empty() {
                    return Err(GlpdError::InvalidParams("empty hardening table".into()));
                }
                for w in knots.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(GlpdError::InvalidParams(
                            "hardening table abscissae must increase".into(),
                        ));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(GlpdError::InvalidParams(
                            "hardening table must be non-decreasing".into(),
                        ));
                    }
                }
                if knots.iter().any(|&(e, s)| e < 0.0 || s <= 0.0) {
                    return Err(GlpdError::InvalidParams(
                        "hardening table needs E >= 0 and sigma_bar > 0".into(),
                    ));
                }
                Ok(())
            }
            Self::PowerLaw { sigma_y, eps0, n } => {
                if *sigma_y <= 0.0 || *eps0 <= 0.0 || *n < 0.0 {
                    return Err(GlpdError::InvalidParams(
                        "power law needs sigma_y > 0, eps0 > 0, n >= 0".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `(sigma_bar, h, beyond_table)` at hardening strain `e`; `h` is the
    /// right-hand slope at knots, `beyond_table` flags flat extrapolation.
    pub fn stress_slope(&self, e: f64) -> (f64, f64, bool) {
        match self {
            Self::Table(knots) => {
                let last = knots.len() - 1;
                if e >= knots[last].0 {
                    return (knots[last].1, 0.0, last > 0 || e > knots[last].0);
                }
                if e <= knots[0].0 {
                    if knots.len() == 1 {
                        return (knots[0].1, 0.0, false);
                    }
                    let h = (knots[1].1 - knots[0].1) / (knots[1].0 - knots[0].0);
                    return (knots[0].1, h, false);
                }
                let i = knots.partition_point(|&(ek, _)| ek <= e) - 1;
                let (e0, s0) = knots[i];
                let (e1, s1) = knots[i + 1];
                let h = (s1 - s0) / (e1 - e0);
                (s0 + h * (e - e0), h, false)
            }
            Self::PowerLaw { sigma_y, eps0, n } => {
                let base = 1.0 + e / eps0;
                let s = sigma_y * base.powf(*n);
                let h = sigma_y * n / eps0 * base.powf(n - 1.0);
                (s, h, false)
            }
        }
    }
}

/// Elastic constants, microstructural length, and criterion constants.
#[derive(Clone, Debug)]
pub struct MaterialParams {
    /// First Lame coefficient (MPa).
    pub lambda: f64,
    /// Shear modulus (MPa).
    pub mu: f64,
    /// Mean half-spacing between neighboring voids (mm).
    pub b: f64,
    /// Tvergaard parameter (>= 1).
    pub q: f64,
    /// Critical porosity at the onset of coalescence.
    pub f_c: f64,
    /// Coalescence accelerator (>= 1).
    pub delta: f64,
    /// Criterion constant on M_I.
    pub a_i: f64,
    /// Criterion constant on M_II.
    pub a_ii: f64,
    pub hardening: HardeningCurve,
}

impl MaterialParams {
    pub fn new(
        lambda: f64,
        mu: f64,
        b: f64,
        q: f64,
        f_c: f64,
        delta: f64,
        hardening: HardeningCurve,
    ) -> Result<Self> {
        let p = Self {
            lambda,
            mu,
            b,
            q,
            f_c,
            delta,
            a_i: A_I,
            a_ii: A_II,
            hardening,
        };
        p.validate()?;
        Ok(p)
    }

    /// Constructs from Young's modulus and Poisson ratio.
    pub fn from_engineering(
        e_young: f64,
        nu: f64,
        b: f64,
        q: f64,
        f_c: f64,
        delta: f64,
        hardening: HardeningCurve,
    ) -> Result<Self> {
        let lambda = e_young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e_young / (2.0 * (1.0 + nu));
        Self::new(lambda, mu, b, q, f_c, delta, hardening)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(GlpdError::InvalidParams(format!("mu = {} <= 0", self.mu)));
        }
        if !(3.0 * self.lambda + 2.0 * self.mu > 0.0) {
            return Err(GlpdError::InvalidParams("3 lambda + 2 mu <= 0".into()));
        }
        if !(self.b > 0.0) {
            return Err(GlpdError::InvalidParams(format!("b = {} <= 0", self.b)));
        }
        if !(self.q >= 1.0) {
            return Err(GlpdError::InvalidParams(format!("q = {} < 1", self.q)));
        }
        if !(self.f_c > 0.0 && self.f_c < 1.0) {
            return Err(GlpdError::InvalidParams(format!(
                "f_c = {} outside (0,1)",
                self.f_c
            )));
        }
        if !(self.delta >= 1.0) {
            return Err(GlpdError::InvalidParams(format!(
                "delta = {} < 1",
                self.delta
            )));
        }
        if !(self.a_i > 0.0 && self.a_ii > 0.0) {
            return Err(GlpdError::InvalidParams("A_I, A_II must be > 0".into()));
        }
        self.hardening.validate()
    }

    /// `3 lambda + 2 mu` (three times the bulk modulus).
    pub fn three_bulk(&self) -> f64 {
        3.0 * self.lambda + 2.0 * self.mu
    }

    /// `(3 lambda + 2 mu) / (45 mu)`, the elastic weight of the mean-moment
    /// correction in the reduced equations.
    pub fn c1(&self) -> f64 {
        self.three_bulk() / (45.0 * self.mu)
    }

    /// `6 mu / (3 lambda + 2 mu)`, the stiffness ratio in the mean-stress
    /// consistency residual.
    pub fn k_mu(&self) -> f64 {
        6.0 * self.mu / self.three_bulk()
    }
}

/// Effective (Tvergaard-corrected, coalescence-accelerated) porosity.
pub fn effective_porosity(f: f64, params: &MaterialParams) -> Result<f64> {
    if !(0.0..1.0).contains(&f) {
        return Err(GlpdError::PorosityRange(f));
    }
    let p = if f <= params.f_c {
        params.q * f
    } else {
        params.q * (params.f_c + params.delta * (f - params.f_c))
    };
    Ok(p)
}

/// Matrix flow stress and plastic modulus `(sigma_bar, h = d sigma_bar / dE)`.
pub fn hardening_stress(e: f64, curve: &HardeningCurve) -> (f64, f64) {
    let (s, h, _) = curve.stress_slope(e);
    (s, h)
}
