use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::Cx;
use crate::error::{Error, Result};

/// Degree of a polynomial. The zero polynomial has degree `MinusInfinity`,
/// which orders below every finite degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::MinusInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

/// Dense univariate polynomial with complex coefficients in ascending order.
///
/// The coefficient vector never ends in an exact zero; the empty vector is
/// the zero polynomial.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawPoly")]
pub struct Poly {
    coeffs: Vec<Cx>,
}

#[derive(Deserialize)]
struct RawPoly {
    coeffs: Vec<Cx>,
}

impl From<RawPoly> for Poly {
    fn from(raw: RawPoly) -> Self {
        Poly::new(raw.coeffs)
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Cx>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Cx::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Cx::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Cx::new(1.0, 0.0))
    }

    pub fn constant(c: Cx) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Poly::new(vec![Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)])
    }

    /// `z - root`.
    pub fn linear(root: Cx) -> Self {
        Poly::new(vec![-root, Cx::new(1.0, 0.0)])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Cx]) -> Self {
        let mut out = vec![Cx::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Cx::new(0.0, 0.0); out.len() + 1];
            for (i, &a) in out.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= r * a;
            }
            out = next;
        }
        Poly::new(out)
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Cx> {
        self.coeffs
    }

    /// Coefficient of `z^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> Cx {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::MinusInfinity,
            n => Degree::Finite(n - 1),
        }
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<Cx> {
        self.coeffs.last().copied()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Cx) -> Cx {
        self.coeffs.iter().rev().fold(Cx::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and derivative at `z`.
    pub fn eval_with_derivative(&self, z: Cx) -> (Cx, Cx) {
        let mut p = Cx::new(0.0, 0.0);
        let mut dp = Cx::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Cx) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `p(s z)`: coefficient `i` multiplied by `s^i`.
    pub fn scale_arg(&self, s: Cx) -> Poly {
        let mut pow = Cx::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * pow);
            pow *= s;
        }
        Poly::new(out)
    }

    /// Divide by the leading coefficient; returns the monic polynomial and
    /// the removed leading coefficient.
    pub fn monicize(&self) -> Result<(Poly, Cx)> {
        let lead = self.leading().ok_or(Error::ZeroPolynomial)?;
        Ok((self.scale(lead.inv()), lead))
    }

    /// Drop leading coefficients below `rel` times the largest coefficient.
    pub fn trim(&self, rel: f64) -> Poly {
        let cut = rel * self.max_abs_coeff();
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.norm() <= cut) {
            c.pop();
        }
        Poly::new(c)
    }

    /// Long division `self = q d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dl = d.leading().ok_or(Error::ZeroPolynomial)?;
        let n = self.coeffs.len();
        let m = d.coeffs.len();
        if n < m {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![Cx::new(0.0, 0.0); n - m + 1];
        for i in (0..q.len()).rev() {
            let t = r[i + m - 1] / dl;
            q[i] = t;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[i + j] -= t * dc;
            }
            r[i + m - 1] = Cx::new(0.0, 0.0);
        }
        r.truncate(m - 1);
        Ok((Poly::new(q), Poly::new(r)))
    }

    /// Synthetic division by `z - root`; returns quotient and remainder.
    pub fn div_linear(&self, root: Cx) -> (Poly, Cx) {
        if self.coeffs.is_empty() {
            return (Poly::zero(), Cx::new(0.0, 0.0));
        }
        let n = self.coeffs.len();
        let mut q = vec![Cx::new(0.0, 0.0); n - 1];
        let mut acc = Cx::new(0.0, 0.0);
        for i in (0..n).rev() {
            acc = acc * root + self.coeffs[i];
            if i > 0 {
                q[i - 1] = acc;
            }
        }
        (Poly::new(q), acc)
    }

    /// Largest coefficient difference relative to the larger of the two
    /// coefficient scales.
    pub fn rel_distance(&self, other: &Poly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        if scale == 0.0 {
            return 0.0;
        }
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).norm())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Cx::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Cx::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly { (&self).$m(&rhs) }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly { (&self).$m(rhs) }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly { self.$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Product of a sequence of polynomials.
pub fn product<'a>(it: impl IntoIterator<Item = &'a Poly>) -> Poly {
    it.into_iter().fold(Poly::one(), |acc, p| &acc * p)
}
