//! Complex polynomials, multiplicative shifts and root finding.

mod frame;
mod poly;
mod roots;

pub use frame::{QFrame, ToleranceConfig};
pub use poly::{product, Degree, Poly};
pub use roots::{roots, roots_seeded, MAX_ITERATIONS};

/// Complex scalar. Serialized as `[re, im]`.
pub type Cx = num_complex::Complex64;

pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

pub fn cr(re: f64) -> Cx {
    Cx::new(re, 0.0)
}

pub fn is_finite(c: Cx) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// Whether two polynomials share a root, decided on their computed roots.
pub fn coprime_test(a: &Poly, b: &Poly, frame: &QFrame) -> crate::Result<bool> {
    if a.is_zero() || b.is_zero() {
        return Err(crate::Error::ZeroPolynomial);
    }
    let ra = roots_seeded(a, &frame.tol, 0)?;
    let rb = roots_seeded(b, &frame.tol, 1)?;
    let tol = frame.tol.rel_identity.sqrt();
    Ok(!ra
        .iter()
        .any(|x| rb.iter().any(|y| (x - y).norm() <= tol * (1.0 + x.norm().max(y.norm())))))
}
