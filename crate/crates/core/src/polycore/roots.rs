//! Simultaneous root finding by the Aberth–Ehrlich iteration.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Cx, Poly, ToleranceConfig};
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
const RESTARTS: usize = 4;

/// All complex roots of `p` with multiplicity.
///
/// Randomness is only used to perturb starting points after a stalled run;
/// pass a seeded generator for reproducible output.
pub fn roots<R: Rng>(p: &Poly, tol: &ToleranceConfig, rng: &mut R) -> Result<Vec<Cx>> {
    let lead = p.leading().ok_or(Error::ZeroPolynomial)?;
    let zeros = p.coeffs().iter().take_while(|c| c.norm() == 0.0).count();
    let a: Vec<Cx> = p.coeffs()[zeros..].iter().map(|c| c / lead).collect();
    let n = a.len() - 1;
    let mut out = vec![Cx::new(0.0, 0.0); zeros];
    match n {
        0 => return Ok(out),
        1 => {
            out.push(-a[0]);
            return Ok(out);
        }
        _ => {}
    }

    let mut z = initial_guesses(&a);
    for attempt in 0..=RESTARTS {
        if attempt > 0 {
            for zi in z.iter_mut() {
                let jitter = Cx::from_polar(rng.gen_range(0.05..0.2), rng.gen_range(0.0..std::f64::consts::TAU));
                *zi = *zi * (Cx::new(1.0, 0.0) + jitter) + jitter * 1e-3;
            }
        }
        if aberth(&a, &mut z, tol) {
            recenter_clusters(&a, &mut z);
            out.extend(z);
            return Ok(out);
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS * (RESTARTS + 1) })
}

/// Roots with a generator seeded from `seed`.
pub fn roots_seeded(p: &Poly, tol: &ToleranceConfig, seed: u64) -> Result<Vec<Cx>> {
    roots(p, tol, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn aberth(a: &[Cx], z: &mut [Cx], tol: &ToleranceConfig) -> bool {
    let n = z.len();
    let abs: Vec<f64> = a.iter().map(|c| c.norm()).collect();
    let mut done = vec![false; n];
    let mut polish = 0;
    for _ in 0..MAX_ITERATIONS {
        for i in 0..n {
            if done[i] && polish == 0 {
                continue;
            }
            let zi = z[i];
            let (mut p, mut dp) = (Cx::new(0.0, 0.0), Cx::new(0.0, 0.0));
            let mut bound = 0.0;
            let r = zi.norm();
            for k in (0..a.len()).rev() {
                dp = dp * zi + p;
                p = p * zi + a[k];
                bound = bound * r + abs[k];
            }
            if p.norm() == 0.0 || (polish == 0 && p.norm() <= 4.0 * f64::EPSILON * bound) {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Cx::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    s += (zi - zj).inv();
                }
            }
            let w = ratio / (Cx::new(1.0, 0.0) - ratio * s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                if polish > 0 {
                    continue;
                }
                return false;
            }
            z[i] = zi - w;
            if w.norm() <= tol.root_find * (1.0 + zi.norm()) {
                done[i] = true;
            }
        }
        // a few unfrozen sweeps let clustered approximations of a multiple
        // root settle symmetrically
        if polish > 0 {
            polish -= 1;
            if polish == 0 {
                return true;
            }
        } else if done.iter().all(|&d| d) {
            polish = 3;
        }
    }
    false
}

/// Move each cluster of approximations so its centroid sits on the
/// corresponding root of the `(m-1)`-th derivative, which is simple.
fn recenter_clusters(a: &[Cx], z: &mut [Cx]) {
    let p = Poly::new(a.to_vec());
    let mut seen = vec![false; z.len()];
    for i in 0..z.len() {
        if seen[i] {
            continue;
        }
        let members: Vec<usize> =
            (i..z.len()).filter(|&j| !seen[j] && (z[j] - z[i]).norm() <= 1e-5 * (1.0 + z[i].norm())).collect();
        for &j in &members {
            seen[j] = true;
        }
        let m = members.len();
        if m < 2 {
            continue;
        }
        let centroid = members.iter().map(|&j| z[j]).sum::<Cx>() / m as f64;
        let mut d = p.clone();
        for _ in 0..m - 1 {
            d = d.derivative();
        }
        let mut c = centroid;
        for _ in 0..8 {
            let (v, dv) = d.eval_with_derivative(c);
            if dv.norm() == 0.0 || v.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            c -= step;
            if step.norm() <= f64::EPSILON * (1.0 + c.norm()) {
                break;
            }
        }
        if (c - centroid).norm() <= 1e-5 * (1.0 + c.norm()) {
            for &j in &members {
                z[j] += c - centroid;
            }
        }
    }
}

/// Starting points on circles read off the upper convex hull of
/// `(i, log|a_i|)`.
fn initial_guesses(a: &[Cx]) -> Vec<Cx> {
    let n = a.len() - 1;
    let logs: Vec<f64> = a
        .iter()
        .map(|c| if c.norm() > 0.0 { c.norm().ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..=n {
        if logs[i] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let (i1, i2) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (i2 as f64 - i1 as f64) * (logs[i] - logs[i1])
                - (i as f64 - i1 as f64) * (logs[i2] - logs[i1]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut z = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (k0, k1) = (w[0], w[1]);
        let m = k1 - k0;
        let u = ((logs[k0] - logs[k1]) / m as f64).exp();
        for j in 0..m {
            let ang = std::f64::consts::TAU * (j as f64 / m as f64 + k0 as f64 / n as f64) + sigma;
            z.push(Cx::from_polar(u, ang));
        }
    }
    z
}
