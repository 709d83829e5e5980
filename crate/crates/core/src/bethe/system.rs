//! Equations of product form `s_n Π f / (s_d Π g) + 1 = 0` where every
//! factor is affine in at most two unknowns, and a damped Newton solver for
//! them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polycore::Cx;

/// `own * x_var + other_coef * x_other + constant`.
#[derive(Clone, Debug)]
pub(crate) struct Factor {
    pub own: Cx,
    pub other: Option<(usize, Cx)>,
    pub constant: Cx,
}

impl Factor {
    pub fn new(own: Cx, other: Option<(usize, Cx)>, constant: Cx) -> Self {
        Factor { own, other, constant }
    }

    fn value(&self, x: &[Cx], var: usize) -> Cx {
        let mut v = self.own * x[var] + self.constant;
        if let Some((j, c)) = self.other {
            v += c * x[j];
        }
        v
    }

    fn magnitude(&self, x: &[Cx], var: usize) -> f64 {
        let mut m = (self.own * x[var]).norm() + self.constant.norm();
        if let Some((j, c)) = self.other {
            m += (c * x[j]).norm();
        }
        m
    }

    fn partial(&self, var: usize, t: usize) -> Cx {
        let mut d = if t == var { self.own } else { Cx::new(0.0, 0.0) };
        if let Some((j, c)) = self.other {
            if j == t {
                d += c;
            }
        }
        d
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Equation {
    pub var: usize,
    pub num_scale: Cx,
    pub den_scale: Cx,
    pub num: Vec<Factor>,
    pub den: Vec<Factor>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    Analytic,
    FiniteDifference,
}

struct Eval {
    /// `s_n Π f + s_d Π g`
    cleared: Cx,
    /// `s_d Π g`
    den: Cx,
    den_mag: f64,
}

impl Equation {
    fn eval(&self, x: &[Cx]) -> Eval {
        let n: Cx = self.num.iter().map(|f| f.value(x, self.var)).product();
        let d: Cx = self.den.iter().map(|f| f.value(x, self.var)).product();
        let den_mag = self.den.iter().map(|f| f.magnitude(x, self.var)).product::<f64>() * self.den_scale.norm();
        Eval { cleared: self.num_scale * n + self.den_scale * d, den: self.den_scale * d, den_mag }
    }

    fn product_grad(&self, factors: &[Factor], x: &[Cx], t: usize) -> Cx {
        let vals: Vec<Cx> = factors.iter().map(|f| f.value(x, self.var)).collect();
        let mut g = Cx::new(0.0, 0.0);
        for (i, f) in factors.iter().enumerate() {
            let d = f.partial(self.var, t);
            if d == Cx::new(0.0, 0.0) {
                continue;
            }
            let rest: Cx = vals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).product();
            g += d * rest;
        }
        g
    }

    fn cleared_grad(&self, x: &[Cx], t: usize) -> Cx {
        self.num_scale * self.product_grad(&self.num, x, t) + self.den_scale * self.product_grad(&self.den, x, t)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct FactorSystem {
    pub eqs: Vec<Equation>,
}

impl FactorSystem {
    /// Product-form residuals `s_n Π f / (s_d Π g) + 1`.
    pub fn residuals(&self, x: &[Cx]) -> Result<Vec<Cx>> {
        self.eqs
            .iter()
            .enumerate()
            .map(|(e, eq)| {
                let ev = eq.eval(x);
                if ev.den.norm() <= 1e-14 * ev.den_mag || ev.den_mag == 0.0 {
                    return Err(Error::PoleHit(format!("denominator of equation {e}")));
                }
                Ok(ev.cleared / ev.den)
            })
            .collect()
    }

    fn cleared(&self, x: &[Cx]) -> Vec<Cx> {
        self.eqs.iter().map(|eq| eq.eval(x).cleared).collect()
    }

    pub fn jacobian(&self, x: &[Cx], mode: JacobianMode) -> DMatrix<Cx> {
        let n = x.len();
        match mode {
            JacobianMode::Analytic => {
                DMatrix::from_fn(self.eqs.len(), n, |e, t| self.eqs[e].cleared_grad(x, t))
            }
            JacobianMode::FiniteDifference => {
                let mut jac = DMatrix::zeros(self.eqs.len(), n);
                for t in 0..n {
                    let h = 1e-6 * (1.0 + x[t].norm());
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[t] += h;
                    xm[t] -= h;
                    let (fp, fm) = (self.cleared(&xp), self.cleared(&xm));
                    for e in 0..self.eqs.len() {
                        jac[(e, t)] = (fp[e] - fm[e]) / (2.0 * h);
                    }
                }
                jac
            }
        }
    }

    /// Damped Newton on the cleared system. Returns the final point and its
    /// largest product-form residual; `None` when an iterate hits a pole or
    /// the linear system is singular.
    pub fn newton(
        &self,
        x0: Vec<Cx>,
        tol: f64,
        max_iter: usize,
        mode: JacobianMode,
        admissible: impl Fn(&[Cx]) -> bool,
    ) -> Option<(Vec<Cx>, f64)> {
        let mut x = x0;
        for _ in 0..max_iter {
            let r = self.residuals(&x).ok()?;
            let rmax = r.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if rmax <= tol {
                return Some((x, rmax));
            }
            let weights: Vec<f64> = self.eqs.iter().map(|eq| 1.0 / eq.eval(&x).den.norm()).collect();
            let merit = |y: &[Cx]| -> f64 {
                self.cleared(y).iter().zip(&weights).map(|(g, w)| (g * w).norm_sqr()).sum()
            };
            let g = DVector::from_vec(self.cleared(&x));
            let jac = self.jacobian(&x, mode);
            let step = jac.lu().solve(&(-g))?;
            let phi0 = merit(&x);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let y: Vec<Cx> = x.iter().zip(step.iter()).map(|(a, d)| a + d * alpha).collect();
                if admissible(&y) {
                    let phi = merit(&y);
                    if phi.is_finite() && phi <= (1.0 - 1e-4 * alpha) * phi0 {
                        x = y;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        let r = self.residuals(&x).ok()?;
        Some((x, r.iter().map(|c| c.norm()).fold(0.0, f64::max)))
    }
}
