//! Rational (XXX) and classical (Gaudin) degenerations.
//!
//! With `q = e^{Rε}`, `z_s = e^{Rσ_s}`, `u = e^{Rυ}` and `κ_i = e^{εϰ_i}`,
//! the XXZ equations tend to the XXX ones as `R → 0`; expanding the XXX
//! residual to first order in `ε` gives the Gaudin equations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::system::{Equation, Factor, FactorSystem, JacobianMode};
use super::{BetheProblem, BetheRoots, ResidualReport};
use crate::error::{Error, Result};
use crate::polycore::Cx;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConvention {
    /// Partial weight sums `L_s^k` used as they stand.
    Displayed,
    /// `L_s^k + k/2 - 3/2` at level `k`; this is what the XXZ equations
    /// reduce to under `u = e^{Rυ}`.
    #[default]
    Shifted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub sigma: Vec<Cx>,
    /// Weights `l_s^1..l_s^{N-1}` per puncture.
    pub weights: Vec<Vec<u32>>,
    /// Additive twists `ϰ_1..ϰ_N`, summing to zero.
    pub kappa_exp: Vec<Cx>,
    /// Starting roots `υ_{k,a}`.
    pub upsilon: Vec<Vec<Cx>>,
    #[serde(default)]
    pub convention: WeightConvention,
}

impl LimitParams {
    fn r(&self) -> Vec<usize> {
        self.upsilon.iter().map(|l| l.len()).collect()
    }

    fn partial(&self, s: usize, k: usize) -> u32 {
        self.weights[s].iter().take(k).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.kappa_exp.len() != self.n || self.upsilon.len() != self.n - 1 {
            return Err(Error::invalid("limit parameters: inconsistent rank"));
        }
        if self.sigma.len() != self.weights.len() || self.weights.iter().any(|w| w.len() != self.n - 1) {
            return Err(Error::invalid("limit parameters: one weight vector of length N-1 per puncture"));
        }
        let s: Cx = self.kappa_exp.iter().sum();
        if s.norm() > 1e-12 * (1.0 + self.kappa_exp.iter().map(|c| c.norm()).sum::<f64>()) {
            return Err(Error::invalid("/kappa_exp: entries must sum to zero"));
        }
        if !(self.epsilon.is_finite() && self.epsilon != 0.0) {
            return Err(Error::invalid("/epsilon: must be finite and nonzero"));
        }
        Ok(())
    }

    fn kappa(&self, eps: f64) -> Vec<Cx> {
        self.kappa_exp.iter().map(|k| (k * eps).exp()).collect()
    }

    fn offset(&self, k: usize) -> f64 {
        match self.convention {
            WeightConvention::Displayed => 0.0,
            WeightConvention::Shifted => k as f64 / 2.0 - 1.5,
        }
    }
}

/// Equation `(k, a)`:
/// `κ_{k+1}/κ_k Π_s (υ + εL̃_s^k - σ_s)/(υ + εL̃_s^{k-1} - σ_s)
///  Π_c (υ - υ_{k±1,c} + ε/2)/(υ - υ_{k±1,c} - ε/2)
///  (-1) Π_{b≠a} (υ - υ_b - ε)/(υ - υ_b + ε) + 1`.
fn xxx_system(p: &LimitParams, eps: f64) -> FactorSystem {
    let r = p.r();
    let kappa = p.kappa(eps);
    let mut off = vec![0];
    for &rk in &r {
        off.push(off.last().unwrap() + rk);
    }
    let one = Cx::new(1.0, 0.0);
    let mut eqs = Vec::new();
    for k in 1..p.n {
        for a in 0..r[k - 1] {
            let var = off[k - 1] + a;
            let (mut num, mut den) = (Vec::new(), Vec::new());
            for (s, &sig) in p.sigma.iter().enumerate() {
                let (lo, hi) = (p.partial(s, k - 1), p.partial(s, k));
                if lo == hi {
                    continue;
                }
                let sh = p.offset(k);
                num.push(Factor::new(one, None, Cx::new(eps * (hi as f64 + sh), 0.0) - sig));
                den.push(Factor::new(one, None, Cx::new(eps * (lo as f64 + sh), 0.0) - sig));
            }
            for kk in [k.wrapping_sub(1), k + 1] {
                if kk == 0 || kk >= p.n {
                    continue;
                }
                for c in 0..r[kk - 1] {
                    let j = off[kk - 1] + c;
                    num.push(Factor::new(one, Some((j, -one)), Cx::new(eps / 2.0, 0.0)));
                    den.push(Factor::new(one, Some((j, -one)), Cx::new(-eps / 2.0, 0.0)));
                }
            }
            for b in 0..r[k - 1] {
                if b != a {
                    let j = off[k - 1] + b;
                    num.push(Factor::new(one, Some((j, -one)), Cx::new(-eps, 0.0)));
                    den.push(Factor::new(one, Some((j, -one)), Cx::new(eps, 0.0)));
                }
            }
            eqs.push(Equation { var, num_scale: -kappa[k], den_scale: kappa[k - 1], num, den });
        }
    }
    FactorSystem { eqs }
}

pub fn xxx_residual(p: &LimitParams, eps: f64, upsilon: &BetheRoots) -> Result<ResidualReport> {
    p.validate()?;
    let r = p.r();
    if upsilon.u.iter().map(|l| l.len()).ne(r.iter().copied()) {
        return Err(Error::BadShape("root counts differ from the parameters".into()));
    }
    let res = xxx_system(p, eps).residuals(&upsilon.flatten())?;
    Ok(ResidualReport::new(BetheRoots::from_flat(&res, &r).u, 1e-10))
}

/// `ϰ_{k+1} - ϰ_k + Σ_s l_s^k/(υ - σ_s) + Σ_c 1/(υ - υ_{k-1,c})
///  - Σ_{b≠a} 2/(υ_a - υ_b) + Σ_d 1/(υ - υ_{k+1,d})`.
pub(crate) fn gaudin_values(p: &LimitParams, x: &[Cx]) -> Result<Vec<Cx>> {
    let r = p.r();
    let u = BetheRoots::from_flat(x, &r).u;
    let mut out = Vec::new();
    for k in 1..p.n {
        for a in 0..r[k - 1] {
            let v = u[k - 1][a];
            let mut g = p.kappa_exp[k] - p.kappa_exp[k - 1];
            let mut add = |d: Cx, c: f64| -> Result<()> {
                if d.norm() <= 1e-14 * (1.0 + v.norm()) {
                    return Err(Error::PoleHit(format!("υ_{{{k},{}}}", a + 1)));
                }
                g += c / d;
                Ok(())
            };
            for (s, &sig) in p.sigma.iter().enumerate() {
                let l = p.weights[s][k - 1];
                if l > 0 {
                    add(v - sig, l as f64)?;
                }
            }
            for kk in [k.wrapping_sub(1), k + 1] {
                if kk >= 1 && kk < p.n {
                    for &w in &u[kk - 1] {
                        add(v - w, 1.0)?;
                    }
                }
            }
            for (b, &w) in u[k - 1].iter().enumerate() {
                if b != a {
                    add(v - w, -2.0)?;
                }
            }
            out.push(g);
        }
    }
    Ok(out)
}

fn gaudin_jacobian(p: &LimitParams, x: &[Cx]) -> DMatrix<Cx> {
    let r = p.r();
    let mut off = vec![0];
    for &rk in &r {
        off.push(off.last().unwrap() + rk);
    }
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for k in 1..p.n {
        for a in 0..r[k - 1] {
            let e = off[k - 1] + a;
            let v = x[e];
            for (s, &sig) in p.sigma.iter().enumerate() {
                let l = p.weights[s][k - 1] as f64;
                jac[(e, e)] -= l / ((v - sig) * (v - sig));
            }
            for kk in [k.wrapping_sub(1), k + 1] {
                if kk >= 1 && kk < p.n {
                    for c in 0..r[kk - 1] {
                        let j = off[kk - 1] + c;
                        let d2 = (v - x[j]) * (v - x[j]);
                        jac[(e, e)] -= 1.0 / d2;
                        jac[(e, j)] += 1.0 / d2;
                    }
                }
            }
            for b in 0..r[k - 1] {
                if b != a {
                    let j = off[k - 1] + b;
                    let d2 = (v - x[j]) * (v - x[j]);
                    jac[(e, e)] += 2.0 / d2;
                    jac[(e, j)] -= 2.0 / d2;
                }
            }
        }
    }
    jac
}

pub fn gaudin_residual(p: &LimitParams, upsilon: &BetheRoots) -> Result<ResidualReport> {
    p.validate()?;
    let vals = gaudin_values(p, &upsilon.flatten())?;
    Ok(ResidualReport::new(BetheRoots::from_flat(&vals, &p.r()).u, 1e-10))
}

/// Newton from `p.upsilon` on the Gaudin equations.
pub fn solve_gaudin(p: &LimitParams) -> Result<BetheRoots> {
    p.validate()?;
    let r = p.r();
    let mut x: Vec<Cx> = p.upsilon.iter().flatten().copied().collect();
    for _ in 0..100 {
        let g = gaudin_values(p, &x)?;
        let gmax = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if gmax <= 1e-13 {
            return Ok(BetheRoots::from_flat(&x, &r));
        }
        let step = gaudin_jacobian(p, &x)
            .lu()
            .solve(&DVector::from_vec(g.iter().map(|c| -c).collect()))
            .ok_or_else(|| Error::invalid("singular Gaudin Jacobian"))?;
        let mut alpha = 1.0;
        loop {
            let y: Vec<Cx> = x.iter().zip(step.iter()).map(|(a, d)| a + d * alpha).collect();
            if let Ok(gy) = gaudin_values(p, &y) {
                if gy.iter().map(|c| c.norm()).fold(0.0, f64::max) < gmax || alpha < 1e-6 {
                    x = y;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-9 {
                return Err(Error::InvalidInput("Gaudin Newton iteration stalled".into()));
            }
        }
    }
    let g = gaudin_values(p, &x)?;
    let gmax = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if gmax <= 1e-11 {
        Ok(BetheRoots::from_flat(&x, &r))
    } else {
        let roots = BetheRoots::from_flat(&x, &r);
        let rep = ResidualReport::new(BetheRoots::from_flat(&g, &r).u, 1e-11);
        Err(Error::NoConvergence { best: Box::new((roots, rep)) })
    }
}

/// Newton from `seed` on the XXX equations at step `eps`.
pub fn solve_xxx(p: &LimitParams, eps: f64, seed: &BetheRoots) -> Result<BetheRoots> {
    p.validate()?;
    let r = p.r();
    let sys = xxx_system(p, eps);
    match sys.newton(seed.flatten(), 1e-13, 100, JacobianMode::Analytic, |_| true) {
        Some((x, rmax)) if rmax <= 1e-12 => Ok(BetheRoots::from_flat(&x, &r)),
        other => {
            let x = other.map(|o| o.0).unwrap_or_else(|| seed.flatten());
            let roots = BetheRoots::from_flat(&x, &r);
            let rep = xxx_residual(p, eps, &roots).unwrap_or_default();
            Err(Error::NoConvergence { best: Box::new((roots, rep)) })
        }
    }
}

/// XXZ residuals at radius `R`, normalized so the self factor is `-1`.
fn xxz_normalized(p: &LimitParams, radius: f64, upsilon: &BetheRoots) -> Result<Vec<Cx>> {
    let eps = p.epsilon;
    let mut b = BetheProblem::builder(p.n, Cx::new((radius * eps / 2.0).exp(), 0.0)).kappa(p.kappa(eps)).roots(p.r());
    for (s, &sig) in p.sigma.iter().enumerate() {
        b = b.puncture((sig * radius).exp(), p.weights[s].clone());
    }
    let prob = b.window(4).build()?;
    let q = prob.q();
    let roots = BetheRoots { u: upsilon.u.iter().map(|l| l.iter().map(|v| (v * radius).exp()).collect()).collect() };
    let res = super::xxz::xxz_residual(&prob, &roots)?;
    Ok(res.residuals.iter().flatten().map(|r| q * (r - 1.0) + 1.0).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    /// `(R, max |r_XXZ - r_XXX|)` at XXX-exact roots.
    pub xxz_to_xxx: Vec<(f64, f64)>,
    pub xxz_ratios: Vec<f64>,
    pub xxz_order: f64,
    /// `(ε, max |-r_XXX/ε - G|)` at Gaudin-exact roots.
    pub xxx_to_gaudin: Vec<(f64, f64)>,
    pub gaudin_ratios: Vec<f64>,
    pub gaudin_order: f64,
    pub upsilon_xxx: BetheRoots,
    pub upsilon_gaudin: BetheRoots,
}

fn fit_order(pts: &[(f64, f64)]) -> (Vec<f64>, f64) {
    let ratios = pts.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let logs: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if logs.len() < 2 {
        return (ratios, f64::NAN);
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (ratios, sxy / sxx)
}

/// Deviations along the two degenerations. Roots are first polished to
/// XXX-exact (at `p.epsilon`) and Gaudin-exact solutions from `p.upsilon`.
pub fn limit_flow(p: &LimitParams, radii: &[f64], epsilons: &[f64]) -> Result<LimitReport> {
    p.validate()?;
    let seed = BetheRoots { u: p.upsilon.clone() };
    let ux = solve_xxx(p, p.epsilon, &seed)?;
    let ug = solve_gaudin(p)?;
    let mut leg1 = Vec::new();
    for &radius in radii {
        let rz = xxz_normalized(p, radius, &ux)?;
        let rx = xxx_residual(p, p.epsilon, &ux)?;
        let dev = rz.iter().zip(rx.residuals.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        leg1.push((radius, dev));
    }
    let g = gaudin_values(p, &ug.flatten())?;
    let mut leg2 = Vec::new();
    for &eps in epsilons {
        let rx = xxx_residual(p, eps, &ug)?;
        let dev = rx.residuals.iter().flatten().zip(&g).map(|(r, g)| (-r / eps - g).norm()).fold(0.0, f64::max);
        leg2.push((eps, dev));
    }
    let (xxz_ratios, xxz_order) = fit_order(&leg1);
    let (gaudin_ratios, gaudin_order) = fit_order(&leg2);
    Ok(LimitReport {
        xxz_to_xxx: leg1,
        xxz_ratios,
        xxz_order,
        xxx_to_gaudin: leg2,
        gaudin_ratios,
        gaudin_order,
        upsilon_xxx: ux,
        upsilon_gaudin: ug,
    })
}
