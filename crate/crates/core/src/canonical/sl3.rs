//! `SL(3)`: Miura diagonal, the two transfer polynomials and the
//! third-order scalar equation
//! `Λ_1 Λ_2 Λ_2' f''' - Λ_2 T_1 f'' + Λ_2'' T_2 f' - Λ_1' Λ_2' Λ_2'' f = 0`
//! where a prime is one multiplicative shift `z → qz`.
//!
//! The equation is the elimination of `f_2, f_3` from
//! `f_1' = a_1 f_1 + Λ_2 f_2`, `f_2' = a_2 f_2 + Λ_1 f_3`, `f_3' = a_3 f_3`.

use serde::{Deserialize, Serialize};

use super::{exact_quotient, RatFn};
use crate::error::{Error, Result};
use crate::polycore::{Cx, Poly, QFrame};
use crate::structpoly::{lambda_poly, PunctureData};
use crate::wronskian::{d_factorize, SectionData, TwistData};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SL3Canonical {
    pub zeta: [Cx; 3],
    pub lambda1: Poly,
    pub lambda2: Poly,
    pub v1: Poly,
    pub v2: Poly,
    pub a: [RatFn; 3],
    pub t1: Poly,
    pub t2: Poly,
    pub t1_remainder: f64,
    pub t2_remainder: f64,
    /// Disagreement between the `V`-form and the determinant form of `a_i`.
    pub alt_form_residual: f64,
}

pub fn sl3_canonical(sections: &SectionData, twists: &TwistData, structure: &PunctureData, frame: &QFrame) -> Result<SL3Canonical> {
    if sections.s.len() != 3 || twists.rank() != 3 {
        return Err(Error::BadShape("SL(3) needs three sections and three twists".into()));
    }
    let [z1, z2, z3] = [twists.zeta[0], twists.zeta[1], twists.zeta[2]];
    let sh = |p: &Poly, h: i32| frame.shift(p, 2 * h);
    let l1 = lambda_poly(1, structure, frame)?;
    let l2 = lambda_poly(2, structure, frame)?;
    let f1 = d_factorize(1, sections, twists, structure, frame)?;
    let f2 = d_factorize(2, sections, twists, structure, frame)?;
    let (v1, v2) = (f1.v.clone(), f2.v.clone());

    let a = [
        RatFn::new(v2.scale(z1.inv()), sh(&v2, -1))?,
        RatFn::new((sh(&v2, -1) * sh(&v1, 1)).scale(z2.inv()), &v2 * &v1)?,
        RatFn::new(v1.scale(z3.inv()), sh(&v1, 1))?,
    ];

    let d2 = &f2.d;
    let s3 = &sections.s[2];
    let alt = [
        RatFn::new((sh(&l1, -1) * d2).scale(z1.inv()), &l1 * &sh(d2, -1))?,
        RatFn::new((&l1 * &sh(s3, 1) * sh(d2, -1)).scale(z2.inv()), sh(&l1, -1) * s3 * d2)?,
        RatFn::new(s3.scale(z3.inv()), sh(s3, 1))?,
    ];
    let alt_form_residual = a.iter().zip(&alt).map(|(x, y)| x.rel_distance(y)).fold(0.0, f64::max);

    // T_1 V_1' V_2' and T_2 V_1' V_2
    let t1n = (&l1 * &sh(&l2, 1) * sh(&v2, 2) * sh(&v1, 1)).scale(z1.inv())
        + (&l1 * &sh(&l2, 2) * &v2 * sh(&v1, 2)).scale(z2.inv())
        + (sh(&l1, 1) * sh(&l2, 2) * &v1 * sh(&v2, 1)).scale(z3.inv());
    let t2n = (&l1 * &l2 * sh(&v1, 2) * &v2).scale(z3)
        + (sh(&l1, 1) * &l2 * &v1 * sh(&v2, 1)).scale((z1 * z3).inv())
        + (sh(&l1, 1) * sh(&l2, 1) * sh(&v2, -1) * sh(&v1, 1)).scale((z2 * z3).inv());
    let (t1, t1_remainder) = exact_quotient(&t1n, &(sh(&v1, 1) * sh(&v2, 1)), "T_1", 1e-8)?;
    let (t2, t2_remainder) = exact_quotient(&t2n, &(sh(&v1, 1) * &v2), "T_2", 1e-8)?;
    Ok(SL3Canonical {
        zeta: [z1, z2, z3],
        lambda1: l1,
        lambda2: l2,
        v1,
        v2,
        a,
        t1,
        t2,
        t1_remainder,
        t2_remainder,
        alt_form_residual,
    })
}

/// First components `f_1(q^j z0)` of the first-order system started at
/// `init = (f_1, f_2, f_3)(z0)`.
pub fn sl3_companion_samples(c: &SL3Canonical, z0: Cx, init: [Cx; 3], count: usize, frame: &QFrame) -> Result<Vec<Cx>> {
    let q = frame.q();
    let mut f = init;
    let mut z = z0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(f[0]);
        let a: Vec<Cx> = c.a.iter().map(|r| r.eval(z)).collect::<Result<_>>()?;
        f = [a[0] * f[0] + c.lambda2.eval(z) * f[1], a[1] * f[1] + c.lambda1.eval(z) * f[2], a[2] * f[2]];
        z *= q;
    }
    Ok(out)
}

/// Largest normalized residual of the third-order equation on `q^j z0`.
pub fn sl3_scalar_residual(c: &SL3Canonical, z0: Cx, samples: &[Cx], frame: &QFrame) -> Result<f64> {
    let q = frame.q();
    let (l1, l2) = (&c.lambda1, &c.lambda2);
    let mut worst = 0.0f64;
    let mut z = z0;
    for w in samples.windows(4) {
        let (z1, z2) = (q * z, q * q * z);
        let terms = [
            l1.eval(z) * l2.eval(z) * l2.eval(z1) * w[3],
            -l2.eval(z) * c.t1.eval(z) * w[2],
            l2.eval(z2) * c.t2.eval(z) * w[1],
            -l1.eval(z1) * l2.eval(z1) * l2.eval(z2) * w[0],
        ];
        let res: Cx = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.norm()).sum();
        if scale > 0.0 {
            worst = worst.max(res.norm() / scale);
        }
        z *= q;
    }
    Ok(worst)
}
