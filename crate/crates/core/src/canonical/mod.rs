//! Scalar difference and differential operators attached to Miura opers.

mod classical;
mod sl2;
mod sl3;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{Cx, Poly, QFrame};

pub use classical::{classical_sl2, ClassicalMode, ClassicalReport};
pub use sl2::{sl2_canonical, sl2_companion_samples, sl2_scalar_residual, sl2_transfer_remainder, SL2Canonical};
pub use sl3::{sl3_canonical, sl3_companion_samples, sl3_scalar_residual, SL3Canonical};

/// Rational function kept as an unreduced numerator/denominator pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(RatFn { num, den })
    }

    pub fn eval(&self, z: Cx) -> Result<Cx> {
        let d = self.den.eval(z);
        if d.norm() <= 1e-14 * self.den.max_abs_coeff() * (1.0 + z.norm()).powi(self.den.deg() as i32) {
            return Err(Error::PoleHit(format!("z = {z}")));
        }
        Ok(self.num.eval(z) / d)
    }

    pub fn shift(&self, frame: &QFrame, halfsteps: i32) -> RatFn {
        RatFn { num: frame.shift(&self.num, halfsteps), den: frame.shift(&self.den, halfsteps) }
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        RatFn { num: &self.num * &o.num, den: &self.den * &o.den }
    }

    /// Same function, compared by cross multiplication.
    pub fn rel_distance(&self, o: &RatFn) -> f64 {
        (&self.num * &o.den).rel_distance(&(&o.num * &self.den))
    }
}

/// Exact polynomial quotient; `NotPolynomial` when the relative remainder
/// exceeds `tol`.
pub(crate) fn exact_quotient(num: &Poly, den: &Poly, what: &str, tol: f64) -> Result<(Poly, f64)> {
    let (q, r) = num.div_rem(den)?;
    let scale = num.max_abs_coeff().max(f64::MIN_POSITIVE);
    let remainder = r.max_abs_coeff() / scale;
    if remainder > tol {
        return Err(Error::NotPolynomial { what: what.into(), remainder });
    }
    Ok((q, remainder))
}
