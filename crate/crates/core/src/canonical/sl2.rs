//! `SL(2)`: from `(Q_-, Q_+)` to the scalar equation
//! `f(q²z) - (T(qz)/ρ(z)) f(qz) + (ρ(qz)/ρ(z)) f(z) = 0`
//! with `T = (ζ^{-1} ρ^{(-1)} Q_-^{(1)} + ζ ρ Q_-^{(-1)}) / Q_-`.

use serde::{Deserialize, Serialize};

use super::{exact_quotient, RatFn};
use crate::error::{Error, Result};
use crate::polycore::{Cx, Poly, QFrame};
use crate::structpoly::{lambda_poly, PunctureData};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SL2Canonical {
    pub zeta: Cx,
    pub rho: Poly,
    pub t: Poly,
    /// Miura diagonal `(ζ^{-1} Q_-^{(1)}/Q_-, ζ Q_-/Q_-^{(1)})`.
    pub a: [RatFn; 2],
    /// `Q_+` divided by this scale makes the Wronskian monic.
    pub q_plus_scale: Cx,
    pub t_remainder: f64,
    pub wronskian_residual: f64,
}

/// `ζ^{-1} Q_+ Q_-^{(1)} - ζ Q_+^{(1)} Q_-` is compared with
/// `ρ = Λ_1` after making it monic.
pub fn sl2_canonical(
    q_minus: &Poly,
    q_plus: &Poly,
    zeta: Cx,
    structure: &PunctureData,
    frame: &QFrame,
) -> Result<SL2Canonical> {
    let (qm, _) = q_minus.monicize()?;
    if q_plus.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let rho = lambda_poly(1, structure, frame)?;
    let w = (q_plus * frame.shift(&qm, 2)).scale(zeta.inv()) - (frame.shift(q_plus, 2) * &qm).scale(zeta);
    let (w_monic, scale) = w.monicize()?;
    let wronskian_residual = w_monic.rel_distance(&rho);
    if wronskian_residual > 1e-8 {
        return Err(Error::WronskianMismatch { residual: wronskian_residual });
    }
    let (t, t_remainder) = exact_quotient(&transfer_numerator(&qm, zeta, &rho, frame), &qm, "T", 1e-8)?;
    let a = [
        RatFn::new(frame.shift(&qm, 2).scale(zeta.inv()), qm.clone())?,
        RatFn::new(qm.scale(zeta), frame.shift(&qm, 2))?,
    ];
    Ok(SL2Canonical { zeta, rho, t, a, q_plus_scale: scale, t_remainder, wronskian_residual })
}

fn transfer_numerator(qm: &Poly, zeta: Cx, rho: &Poly, frame: &QFrame) -> Poly {
    (frame.shift(rho, -2) * frame.shift(qm, 2)).scale(zeta.inv()) + (rho * frame.shift(qm, -2)).scale(zeta)
}

/// Relative remainder of the numerator of `T` upon division by `Q_-`.
/// Vanishes exactly when the roots of `Q_-` solve the Bethe equations.
pub fn sl2_transfer_remainder(q_minus: &Poly, zeta: Cx, rho: &Poly, frame: &QFrame) -> Result<f64> {
    let (qm, _) = q_minus.monicize()?;
    let num = transfer_numerator(&qm, zeta, rho, frame);
    let (_, r) = num.div_rem(&qm)?;
    Ok(r.max_abs_coeff() / num.max_abs_coeff().max(f64::MIN_POSITIVE))
}

/// Values `f(q^j z0)`, `j = 0..count`, generated forward from
/// `(f(z0), f(q z0))` by the scalar equation.
pub fn sl2_companion_samples(c: &SL2Canonical, z0: Cx, init: [Cx; 2], count: usize, frame: &QFrame) -> Result<Vec<Cx>> {
    let q = frame.q();
    let mut f = vec![init[0], init[1]];
    let mut z = z0;
    while f.len() < count {
        let n = f.len();
        let r = c.rho.eval(z);
        if r.norm() <= 1e-14 * c.rho.max_abs_coeff() {
            return Err(Error::PoleHit(format!("ρ vanishes at {z}")));
        }
        let next = c.t.eval(q * z) / r * f[n - 1] - c.rho.eval(q * z) / r * f[n - 2];
        f.push(next);
        z *= q;
    }
    Ok(f)
}

/// Largest normalized residual of the scalar equation on the lattice
/// `q^j z0`.
pub fn sl2_scalar_residual(c: &SL2Canonical, z0: Cx, samples: &[Cx], frame: &QFrame) -> Result<f64> {
    let q = frame.q();
    let mut worst = 0.0f64;
    let mut z = z0;
    for w in samples.windows(3) {
        let r = c.rho.eval(z);
        if r.norm() <= 1e-14 * c.rho.max_abs_coeff() {
            return Err(Error::PoleHit(format!("ρ vanishes at {z}")));
        }
        let c1 = c.t.eval(q * z) / r;
        let c0 = c.rho.eval(q * z) / r;
        let res = w[2] - c1 * w[1] + c0 * w[0];
        let scale = w[2].norm() + (c1 * w[1]).norm() + (c0 * w[0]).norm();
        if scale > 0.0 {
            worst = worst.max(res.norm() / scale);
        }
        z *= q;
    }
    Ok(worst)
}
