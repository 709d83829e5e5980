//! Classical `SL(2)` opers: Wronskian relation and the Miura transform
//! `u = -ρ'/(2ρ) + Q_-'/Q_-`, `t = u' + u²`.

use serde::{Deserialize, Serialize};

use super::{exact_quotient, RatFn};
use crate::bethe::{classical_sl2_residual, inhomogeneous_sl2_residual};
use crate::error::{Error, Result};
use crate::polycore::{roots_seeded, Cx, Poly, ToleranceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalMode {
    /// `Q_+' Q_- - Q_+ Q_-' = ρ`.
    Regular,
    /// `(Q_+' - 2a Q_+) Q_- - Q_+ Q_-' = ρ`.
    Irregular { a: Cx },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub wronskian_scale: Cx,
    pub wronskian_residual: f64,
    /// Bethe roots, the zeros of `Q_-`.
    pub w: Vec<Cx>,
    /// Bethe residuals at each root.
    pub bethe_residuals: Vec<Cx>,
    /// Simple-pole coefficients `c_m` of `t` at the punctures.
    pub c: Vec<Cx>,
    /// Residues of `t` at the Bethe roots; zero for a genuine oper.
    pub pole_residues: Vec<Cx>,
    /// `t(z)` with denominator `4ρ²`, regular mode only.
    pub t: Option<RatFn>,
}

/// `ρ = Π_m (z - z_m)^{k_m}`; the Bethe roots `w_i` are the zeros of `Q_-`.
pub fn classical_sl2(q_minus: &Poly, q_plus: &Poly, z: &[Cx], k: &[u32], mode: ClassicalMode) -> Result<ClassicalReport> {
    if z.len() != k.len() {
        return Err(Error::BadShape("puncture and weight lists differ in length".into()));
    }
    let (qm, _) = q_minus.monicize()?;
    let w = &roots_seeded(&qm, &ToleranceConfig::default(), 0)?;
    if q_plus.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let rho = z
        .iter()
        .zip(k)
        .fold(Poly::one(), |acc, (&zm, &km)| acc * Poly::linear(zm).pow(km as usize));
    let mut wr = &(&q_plus.derivative() * &qm) - &(q_plus * &qm.derivative());
    if let ClassicalMode::Irregular { a } = mode {
        wr = &wr - &(q_plus * &qm).scale(2.0 * a);
    }
    let (wm, wronskian_scale) = wr.monicize()?;
    let wronskian_residual = wm.rel_distance(&rho);
    if wronskian_residual > 1e-8 {
        return Err(Error::WronskianMismatch { residual: wronskian_residual });
    }
    let bethe_residuals = match mode {
        ClassicalMode::Regular => classical_sl2_residual(z, k, w)?,
        ClassicalMode::Irregular { a } => inhomogeneous_sl2_residual(z, k, a, w)?,
    };

    let c: Vec<Cx> = (0..z.len())
        .map(|m| {
            let km = k[m] as f64;
            let mut cm = Cx::new(0.0, 0.0);
            for n in 0..z.len() {
                if n != m {
                    cm += km * (k[n] as f64 / 2.0) / (z[m] - z[n]);
                }
            }
            for &wi in w {
                cm -= km / (z[m] - wi);
            }
            cm
        })
        .collect();

    let rho_d = rho.derivative();
    let pole_residues: Vec<Cx> = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let mut h = -rho_d.eval(wi) / (rho.eval(wi) * 2.0);
            for (j, &wj) in w.iter().enumerate() {
                if j != i {
                    h += (wi - wj).inv();
                }
            }
            2.0 * h
        })
        .collect();

    let t = match mode {
        ClassicalMode::Regular => {
            for (i, r) in pole_residues.iter().enumerate() {
                if r.norm() > 1e-8 * (1.0 + c.iter().map(|x| x.norm()).fold(0.0, f64::max)) {
                    return Err(Error::PoleAtBetheRoot { index: i, remainder: r.norm() });
                }
            }
            // u = A/B with A = 2ρ Q_-' - ρ' Q_-, B = 2ρ Q_-
            let a_poly = (&rho * &qm.derivative()).scale(Cx::new(2.0, 0.0)) - &rho_d * &qm;
            let b_poly = (&rho * &qm).scale(Cx::new(2.0, 0.0));
            let num = &(&(&a_poly.derivative() * &b_poly) - &(&a_poly * &b_poly.derivative())) + &(&a_poly * &a_poly);
            let (reduced, _) = exact_quotient(&num, &(&qm * &qm), "t numerator", 1e-8).map_err(|e| match e {
                Error::NotPolynomial { remainder, .. } => Error::PoleAtBetheRoot { index: 0, remainder },
                e => e,
            })?;
            Some(RatFn::new(reduced, (&rho * &rho).scale(Cx::new(4.0, 0.0)))?)
        }
        ClassicalMode::Irregular { .. } => None,
    };
    Ok(ClassicalReport { wronskian_scale, wronskian_residual, w: w.to_vec(), bethe_residuals, c, pole_residues, t })
}
