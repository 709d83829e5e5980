use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::{Equation, Factor, FactorSystem, JacobianMode};
use super::{BetheProblem, BetheRoots, ResidualReport};
use crate::error::{Error, Result};
use crate::polycore::{Cx, Poly, QFrame};
use crate::structpoly::pi_poly;

fn offsets(r: &[usize]) -> Vec<usize> {
    let mut off = vec![0];
    for &rk in r {
        off.push(off.last().unwrap() + rk);
    }
    off
}

fn check_shape(prob: &BetheProblem, roots: &BetheRoots) -> Result<()> {
    if roots.u.len() != prob.n - 1 {
        return Err(Error::BadShape(format!("expected {} levels, found {}", prob.n - 1, roots.u.len())));
    }
    for (k, (lvl, &rk)) in roots.u.iter().zip(&prob.r).enumerate() {
        if lvl.len() != rk {
            return Err(Error::BadShape(format!("level {} has {} roots, expected {rk}", k + 1, lvl.len())));
        }
    }
    Ok(())
}

/// Build the product-form system. Equation `(k, a)`:
///
/// `κ_{k+1}/κ_k · Π_s (q^{L_s^k+k/2-3/2} u - z_s)/(q^{L_s^{k-1}+k/2-3/2} u - z_s)
///  · Π_{c} (q^{1/2} u - u_{k±1,c})/(q^{-1/2} u - u_{k±1,c})
///  · (-q^{-1}) Π_{b≠a} (q^{-1} u - u_{k,b})/(q u - u_{k,b}) + 1`.
pub(crate) fn xxz_system(prob: &BetheProblem) -> FactorSystem {
    let f = &prob.frame;
    let off = offsets(&prob.r);
    let one = Cx::new(1.0, 0.0);
    let mut eqs = Vec::new();
    for k in 1..prob.n {
        for a in 0..prob.r[k - 1] {
            let var = off[k - 1] + a;
            let mut num = Vec::new();
            let mut den = Vec::new();
            for (m, p) in prob.punctures.punctures.iter().enumerate() {
                let (lo, hi) = (prob.punctures.partial_weight(m, k - 1), prob.punctures.partial_weight(m, k));
                if lo == hi {
                    continue;
                }
                num.push(Factor::new(f.half_pow(2 * hi as i32 + k as i32 - 3), None, -p.z));
                den.push(Factor::new(f.half_pow(2 * lo as i32 + k as i32 - 3), None, -p.z));
            }
            for kk in [k.wrapping_sub(1), k + 1] {
                if kk == 0 || kk >= prob.n {
                    continue;
                }
                for c in 0..prob.r[kk - 1] {
                    let j = off[kk - 1] + c;
                    num.push(Factor::new(f.half_pow(1), Some((j, -one)), Cx::new(0.0, 0.0)));
                    den.push(Factor::new(f.half_pow(-1), Some((j, -one)), Cx::new(0.0, 0.0)));
                }
            }
            for b in 0..prob.r[k - 1] {
                if b == a {
                    continue;
                }
                let j = off[k - 1] + b;
                num.push(Factor::new(f.q_pow(-1), Some((j, -one)), Cx::new(0.0, 0.0)));
                den.push(Factor::new(f.q_pow(1), Some((j, -one)), Cx::new(0.0, 0.0)));
            }
            eqs.push(Equation {
                var,
                num_scale: -prob.kappa(k + 1) * f.q_pow(-1),
                den_scale: prob.kappa(k),
                num,
                den,
            });
        }
    }
    FactorSystem { eqs }
}

/// Product-form residuals. Zero exactly at solutions; a vanishing
/// denominator raises `PoleHit`.
pub fn xxz_residual(prob: &BetheProblem, roots: &BetheRoots) -> Result<ResidualReport> {
    check_shape(prob, roots)?;
    let res = xxz_system(prob).residuals(&roots.flatten())?;
    let levels = BetheRoots::from_flat(&res, &prob.r).u;
    Ok(ResidualReport::new(levels, prob.frame.tol.newton_conv))
}

/// Residuals computed from Baxter polynomials `Q_k = Π_a (z - u_{k,a})` and
/// `Π_k`:
/// `κ_{k+1} Π_k^{(1/2)} Q_{k-1}^{(1/2)} Q_k^{(-1)} Q_{k+1}^{(1/2)}
///  / (κ_k Π_k^{(-1/2)} Q_{k-1}^{(-1/2)} Q_k^{(1)} Q_{k+1}^{(-1/2)}) + 1`
/// at each `u_{k,a}`.
pub fn xxz_residual_tq(prob: &BetheProblem, roots: &BetheRoots) -> Result<ResidualReport> {
    check_shape(prob, roots)?;
    let f = &prob.frame;
    let n = prob.n;
    let q: Vec<Poly> = (0..=n)
        .map(|k| if k == 0 || k == n { Poly::one() } else { Poly::from_roots(&roots.u[k - 1]) })
        .collect();
    let mut out = Vec::new();
    for k in 1..n {
        let pi = pi_poly(k, &prob.punctures, f)?;
        let num = f.shift(&pi, 1) * f.shift(&q[k - 1], 1) * f.shift(&q[k], -2) * f.shift(&q[k + 1], 1);
        let den = f.shift(&pi, -1) * f.shift(&q[k - 1], -1) * f.shift(&q[k], 2) * f.shift(&q[k + 1], -1);
        let mut lvl = Vec::new();
        for (a, &u) in roots.u[k - 1].iter().enumerate() {
            let d = prob.kappa(k) * den.eval(u);
            if d.norm() <= 1e-14 * (1.0 + prob.kappa(k + 1).norm() * num.eval(u).norm()) {
                return Err(Error::PoleHit(format!("u_{{{k},{}}}", a + 1)));
            }
            lvl.push(prob.kappa(k + 1) * num.eval(u) / d + 1.0);
        }
        out.push(lvl);
    }
    Ok(ResidualReport::new(out, prob.frame.tol.newton_conv))
}

/// `SL(2)` equations in the form
/// `Π_m (w_i - q^{1-k_m} z_m)/(w_i - q z_m) = -ζ^{-2} q^{l-K} Π_j (q w_i - w_j)/(w_i - q w_j)`
/// with `K = Σ k_m`, `l` the number of roots and the `j = i` factor equal
/// to `-1`. Returns `LHS - RHS` per root.
pub fn sl2_q_residual(z: &[Cx], k: &[u32], zeta: Cx, frame: &QFrame, w: &[Cx]) -> Result<Vec<Cx>> {
    if z.len() != k.len() {
        return Err(Error::BadShape("puncture and weight lists differ in length".into()));
    }
    let q = frame.q();
    let big_k: i32 = k.iter().map(|&x| x as i32).sum();
    let l = w.len() as i32;
    let pole = |v: Cx, scale: f64| v.norm() <= 1e-14 * scale;
    w.iter()
        .enumerate()
        .map(|(i, &wi)| {
            let mut lhs = Cx::new(1.0, 0.0);
            for (&zm, &km) in z.iter().zip(k) {
                let d = wi - q * zm;
                if pole(d, wi.norm() + (q * zm).norm()) {
                    return Err(Error::PoleHit(format!("w_{} = q z", i + 1)));
                }
                lhs *= (wi - frame.q_pow(1 - km as i32) * zm) / d;
            }
            let mut rhs = -zeta.powi(-2) * frame.q_pow(l - big_k);
            for (j, &wj) in w.iter().enumerate() {
                if j == i {
                    rhs *= -1.0;
                    continue;
                }
                let d = wi - q * wj;
                if pole(d, wi.norm() + (q * wj).norm()) {
                    return Err(Error::PoleHit(format!("w_{} = q w_{}", i + 1, j + 1)));
                }
                rhs *= (q * wi - wj) / d;
            }
            Ok(lhs - rhs)
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Checks `z_s ∉ q^{(1-k)/2} q^Z u_{k,a}` and
/// `u_{k,a} ∉ q^{(k-k')/2} q^Z u_{k',a'}` over the frame's lattice window.
pub fn nondegenerate_check(prob: &BetheProblem, roots: &BetheRoots) -> Result<NondegeneracyReport> {
    check_shape(prob, roots)?;
    let f = &prob.frame;
    let mut violations = Vec::new();
    let labelled: Vec<(usize, usize, Cx)> = roots
        .u
        .iter()
        .enumerate()
        .flat_map(|(k, lvl)| lvl.iter().enumerate().map(move |(a, &u)| (k + 1, a + 1, u)))
        .collect();
    for &(k, a, u) in &labelled {
        if u.norm() == 0.0 {
            violations.push(format!("u_{{{k},{a}}} = 0"));
            continue;
        }
        for (s, p) in prob.punctures.punctures.iter().enumerate() {
            if let Some(m) = f.lattice_related(p.z, f.half_pow(1 - k as i32) * u)? {
                violations.push(format!("z_{} = q^{{{m}+(1-{k})/2}} u_{{{k},{a}}}", s + 1));
            }
        }
    }
    for (i, &(k, a, u)) in labelled.iter().enumerate() {
        for &(k2, a2, u2) in &labelled[i + 1..] {
            if u.norm() == 0.0 || u2.norm() == 0.0 {
                continue;
            }
            if let Some(m) = f.lattice_related(u, f.half_pow(k as i32 - k2 as i32) * u2)? {
                violations.push(format!("u_{{{k},{a}}} = q^{{{m}+({k}-{k2})/2}} u_{{{k2},{a2}}}"));
            }
        }
    }
    Ok(NondegeneracyReport { ok: violations.is_empty(), violations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub starts: usize,
    pub rng_seed: u64,
    pub max_iter: usize,
    pub jacobian: JacobianMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { starts: 32, rng_seed: 0, max_iter: 100, jacobian: JacobianMode::Analytic }
    }
}

/// Solve with the default options apart from `rng_seed` and `starts`.
pub fn solve_newton(
    prob: &BetheProblem,
    seed_roots: Option<&BetheRoots>,
    rng_seed: u64,
    starts: usize,
) -> Result<(BetheRoots, ResidualReport)> {
    solve_newton_with(prob, seed_roots, &SolverOptions { starts, rng_seed, ..SolverOptions::default() })
}

/// Newton iteration on the pole-cleared equations. With `seed_roots` a
/// single run starts there; otherwise `starts` random starts are tried and
/// the converged one with the smallest index is returned.
pub fn solve_newton_with(
    prob: &BetheProblem,
    seed_roots: Option<&BetheRoots>,
    opts: &SolverOptions,
) -> Result<(BetheRoots, ResidualReport)> {
    let sys = xxz_system(prob);
    let total = prob.root_count();
    if total == 0 {
        let roots = BetheRoots { u: vec![Vec::new(); prob.n - 1] };
        let rep = xxz_residual(prob, &roots)?;
        return Ok((roots, rep));
    }
    let tol = prob.frame.tol.newton_conv;
    let admissible = |x: &[Cx]| admissible(x, &prob.r);
    let mut best: Option<(Vec<Cx>, f64)> = None;
    let starts: Vec<Vec<Cx>> = match seed_roots {
        Some(s) => {
            check_shape(prob, s)?;
            vec![s.flatten()]
        }
        None => (0..opts.starts.max(1)).map(|i| random_start(prob, opts.rng_seed, i as u64)).collect(),
    };
    for x0 in starts {
        let Some((x, rmax)) = sys.newton(x0.clone(), tol, opts.max_iter, opts.jacobian, admissible) else {
            continue;
        };
        let mut roots = BetheRoots::from_flat(&x, &prob.r);
        roots.canonicalize();
        if rmax <= tol && nondegenerate_check(prob, &roots)?.ok {
            let rep = xxz_residual(prob, &roots)?;
            if rep.converged {
                return Ok((roots, rep));
            }
        }
        if best.as_ref().map_or(true, |b| rmax < b.1) {
            best = Some((x, rmax));
        }
    }
    let (x, _) = best.unwrap_or_else(|| (random_start(prob, opts.rng_seed, 0), f64::INFINITY));
    let roots = BetheRoots::from_flat(&x, &prob.r);
    let rep = xxz_residual(prob, &roots).unwrap_or_default();
    Err(Error::NoConvergence { best: Box::new((roots, rep)) })
}

fn admissible(x: &[Cx], r: &[usize]) -> bool {
    let mut off = 0;
    for &rk in r {
        let lvl = &x[off..off + rk];
        for (a, u) in lvl.iter().enumerate() {
            if !(u.re.is_finite() && u.im.is_finite()) || u.norm() < 1e-12 {
                return false;
            }
            for v in &lvl[a + 1..] {
                if (u - v).norm() <= 1e-8 * (u.norm() + v.norm()) {
                    return false;
                }
            }
        }
        off += rk;
    }
    true
}

/// Log-uniform points on an annulus around the scales `|q^{j+(k-1)/2} z_s|`.
fn random_start(prob: &BetheProblem, seed: u64, start: u64) -> Vec<Cx> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start);
    let f = &prob.frame;
    let jmax = prob.punctures.punctures.iter().map(|p| p.weights.iter().sum::<u32>()).max().unwrap_or(0) as i32 + 1;
    let mut x = Vec::with_capacity(prob.root_count());
    for k in 1..prob.n {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for p in &prob.punctures.punctures {
            for j in -jmax..=jmax {
                let r = (f.half_pow(2 * j + k as i32 - 1) * p.z).norm();
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        if hi == 0.0 {
            lo = 1.0;
            hi = 1.0;
        }
        let (llo, lhi) = ((lo / 4.0).ln(), (hi * 4.0).ln());
        for _ in 0..prob.r[k - 1] {
            let rad = rng.gen_range(llo..lhi).exp();
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            x.push(Cx::from_polar(rad, ang));
        }
    }
    x
}
