use serde::{Deserialize, Serialize};

use super::{Cx, Poly};
use crate::error::{Error, Result};

/// Numerical tolerances shared by every stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// Relative threshold for polynomial identity checks.
    pub rel_identity: f64,
    /// Residual at which Newton iterations stop.
    pub newton_conv: f64,
    /// Step size at which polynomial root iterations stop.
    pub root_find: f64,
    /// Relative cutoff for trimming leading coefficients.
    pub trim: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { rel_identity: 1e-9, newton_conv: 1e-10, root_find: 1e-12, trim: 1e-13 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.rel_identity, self.newton_conv, self.root_find, self.trim];
        if all.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::invalid("tolerances must be positive and finite"));
        }
        if self.trim > self.rel_identity {
            return Err(Error::invalid("trim tolerance must not exceed rel_identity"));
        }
        Ok(())
    }
}

/// The multiplicative shift parameter together with tolerances.
///
/// `sqrt_q` is primary; `q = sqrt_q^2`. Half-integer shifts `p(q^{h/2} z)`
/// are addressed by the integer `h` of half-steps.
#[derive(Clone, Debug, PartialEq)]
pub struct QFrame {
    sqrt_q: Cx,
    pub tol: ToleranceConfig,
    /// Half-width of the integer window used for q-lattice searches.
    pub lattice_window: i32,
}

impl QFrame {
    pub fn new(sqrt_q: Cx, tol: ToleranceConfig, lattice_window: i32) -> Result<Self> {
        tol.validate()?;
        if !(sqrt_q.re.is_finite() && sqrt_q.im.is_finite()) || sqrt_q.norm() == 0.0 {
            return Err(Error::invalid("sqrt_q must be finite and nonzero"));
        }
        if lattice_window < 1 {
            return Err(Error::invalid("lattice window must be positive"));
        }
        let q = sqrt_q * sqrt_q;
        let mut qn = Cx::new(1.0, 0.0);
        for n in 1..=lattice_window {
            qn *= q;
            if (qn - 1.0).norm() <= tol.rel_identity.max(1e-8) {
                return Err(Error::invalid(format!("q is a root of unity of order {n}")));
            }
        }
        Ok(QFrame { sqrt_q, tol, lattice_window })
    }

    /// Frame with default tolerances and a window of 16.
    pub fn with_sqrt_q(sqrt_q: Cx) -> Result<Self> {
        QFrame::new(sqrt_q, ToleranceConfig::default(), 16)
    }

    pub fn sqrt_q(&self) -> Cx {
        self.sqrt_q
    }

    pub fn q(&self) -> Cx {
        self.sqrt_q * self.sqrt_q
    }

    /// `q^{h/2}`.
    pub fn half_pow(&self, h: i32) -> Cx {
        self.sqrt_q.powi(h)
    }

    /// `q^n`.
    pub fn q_pow(&self, n: i32) -> Cx {
        self.sqrt_q.powi(2 * n)
    }

    /// `p(q^{h/2} z)`.
    pub fn shift(&self, p: &Poly, halfsteps: i32) -> Poly {
        if halfsteps == 0 {
            return p.clone();
        }
        p.scale_arg(self.half_pow(halfsteps))
    }

    /// Integer `n` with `a = q^n b`, searched over `|n| <= lattice_window`
    /// in order of increasing `|n|`.
    pub fn lattice_related(&self, a: Cx, b: Cx) -> Result<Option<i32>> {
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::ZeroInput);
        }
        let tol = self.tol.rel_identity.max(1e-8);
        let close = |n: i32| {
            let qb = self.q_pow(n) * b;
            (a - qb).norm() <= tol * a.norm().max(qb.norm())
        };
        if close(0) {
            return Ok(Some(0));
        }
        for m in 1..=self.lattice_window {
            if close(m) {
                return Ok(Some(m));
            }
            if close(-m) {
                return Ok(Some(-m));
            }
        }
        Ok(None)
    }

    pub fn lattice_disjoint(&self, a: Cx, b: Cx) -> Result<bool> {
        Ok(self.lattice_related(a, b)?.is_none())
    }
}
