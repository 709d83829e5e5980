//! Closed-form fixtures and random instance generators.
//!
//! [`run_all`] evaluates every fixture and is what the command-line
//! `selftest` runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bethe::{nondegenerate_check, solve_newton, xxz_residual, BetheProblem, BetheRoots};
use crate::canonical::{classical_sl2, sl2_canonical, ClassicalMode};
use crate::error::Result;
use crate::polycore::{cr, cx, roots_seeded, Cx, Poly, QFrame};
use crate::qqsys::{dress, QSystem};
use crate::reconstruct::correspondence_check;
use crate::special::{ktheory_relation, trs_relations, KTheoryInstance, TRSInstance};
use crate::structpoly::{check_ffunc, Puncture, PunctureData};
use crate::wronskian::{d_factorize, desnanot_jacobi_sides, SectionData, TwistData};

/// `N = 2`, `q = 4`, `κ = (1/3, 3)`, one puncture at 1 of weight 1 and one
/// root, which sits at `5/8`.
pub fn sl2_fixture() -> BetheProblem {
    BetheProblem::builder(2, cr(2.0))
        .kappa(vec![cr(1.0 / 3.0), cr(3.0)])
        .puncture(cr(1.0), vec![1])
        .roots(vec![1])
        .build()
        .expect("fixture is valid")
}

fn small_cx(rng: &mut ChaCha8Rng, r: f64) -> Cx {
    cx(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// Random problem of rank `n` with at most two punctures and at most two
/// roots per level. Returns `None` when the draw fails validation.
pub fn random_problem(n: usize, seed: u64) -> Option<BetheProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_q = cx(1.15, 0.1) + small_cx(&mut rng, 0.1);
    let mut kappa: Vec<Cx> = (0..n - 1).map(|_| (small_cx(&mut rng, 0.8)).exp()).collect();
    kappa.push(kappa.iter().product::<Cx>().inv());
    let l = rng.gen_range(1..=2);
    let mut b = BetheProblem::builder(n, sqrt_q).kappa(kappa);
    let mut tot = vec![0u32; n - 1];
    for _ in 0..l {
        let mut w = vec![0u32; n - 1];
        while w.iter().all(|&x| x == 0) {
            w = (0..n - 1).map(|_| rng.gen_range(0..=1)).collect();
        }
        for (t, x) in tot.iter_mut().zip(&w) {
            *t += x;
        }
        b = b.puncture(small_cx(&mut rng, 1.5), w);
    }
    // r_k stays inside the weight diagram: r_k <= L^k + r_{k-1}
    let mut r = Vec::with_capacity(n - 1);
    let mut prev = 0usize;
    for t in tot.iter().take(n - 1) {
        let cap = (*t as usize + prev).min(2);
        let rk = if r.is_empty() { rng.gen_range(1..=cap.max(1)) } else { rng.gen_range(0..=cap) };
        r.push(rk);
        prev = rk;
    }
    b.roots(r).build().ok()
}

/// A random problem with a converged, nondegenerate solution.
pub fn random_solved(n: usize, seed: u64) -> Option<(BetheProblem, BetheRoots)> {
    let p = random_problem(n, seed)?;
    let (roots, rep) = solve_newton(&p, None, seed, 32).ok()?;
    if !rep.converged || !nondegenerate_check(&p, &roots).ok()?.ok {
        return None;
    }
    Some((p, roots))
}

/// Take solved instances from consecutive seeds until `count` are found.
pub fn solved_instances(ns: &[usize], count: usize, first_seed: u64) -> Vec<(BetheProblem, BetheRoots)> {
    let mut out = Vec::with_capacity(count);
    let mut seed = first_seed;
    while out.len() < count && seed < first_seed + 50 * count as u64 {
        let n = ns[(seed as usize) % ns.len()];
        if let Some(x) = random_solved(n, seed) {
            out.push(x);
        }
        seed += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureResult {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

type Check = fn() -> Result<f64>;

fn cubic_roots() -> Result<f64> {
    let p = Poly::from_real(&[-6.0, 11.0, -6.0, 1.0]);
    let mut r = roots_seeded(&p, &Default::default(), 0)?;
    r.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(r.iter().zip([1.0, 2.0, 3.0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

fn half_shift() -> Result<f64> {
    let f = QFrame::with_sqrt_q(cr(2.0))?;
    let p = Poly::from_real(&[1.0, 1.0, 1.0]);
    Ok(f.shift(&p, 1).rel_distance(&Poly::from_real(&[1.0, 2.0, 4.0])))
}

fn ffunc() -> Result<f64> {
    let f = QFrame::with_sqrt_q(cx(1.3, 0.2))?;
    let data = PunctureData::new(vec![
        Puncture { z: cx(0.5, 0.1), weights: vec![1, 2, 0] },
        Puncture { z: cx(-1.2, 0.7), weights: vec![0, 1, 3] },
    ]);
    check_ffunc(4, &data, &f)
}

fn desnanot_constant() -> Result<f64> {
    let m: Vec<Vec<Poly>> = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]]
        .iter()
        .map(|r| r.iter().map(|&x| Poly::from_real(&[x])).collect())
        .collect();
    let (l, r) = desnanot_jacobi_sides(&m)?;
    Ok((l.coeff(0) + 24.0).norm().max((r.coeff(0) + 24.0).norm()))
}

fn sl2_root() -> Result<f64> {
    let p = sl2_fixture();
    let (roots, _) = solve_newton(&p, None, 0, 4)?;
    Ok((roots.u[0][0] - 0.625).norm())
}

fn sl2_qtilde() -> Result<f64> {
    let p = sl2_fixture();
    let sys = QSystem::from_bethe(&p, &BetheRoots { u: vec![vec![cr(0.625)]] })?;
    let d = dress(&sys, &p.punctures, &p.frame)?;
    Ok(sys.qtilde(1).rel_distance(&Poly::from_real(&[1.6])).max(d.d[2].rel_distance(&Poly::from_real(&[-1.0, 0.5]))))
}

fn sl2_wronskian() -> Result<f64> {
    let p = sl2_fixture();
    let s = SectionData { s: vec![Poly::from_real(&[-0.6]), Poly::from_real(&[-0.625, 1.0])] };
    let tw = TwistData { zeta: vec![cr(3.0), cr(1.0 / 3.0)] };
    let fac = d_factorize(2, &s, &tw, &p.punctures, &p.frame)?;
    Ok(fac.d.rel_distance(&Poly::from_real(&[-1.0, 1.0])))
}

fn sl2_residual() -> Result<f64> {
    let p = sl2_fixture();
    Ok(xxz_residual(&p, &BetheRoots { u: vec![vec![cr(0.625)]] })?.max_abs)
}

fn sl2_certificate() -> Result<f64> {
    let p = sl2_fixture();
    let cert = correspondence_check(&p, &BetheRoots { u: vec![vec![cr(0.625)]] })?;
    let worst = cert.stages.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(if cert.pass { worst } else { f64::INFINITY })
}

fn sl2_transfer() -> Result<f64> {
    let p = sl2_fixture();
    let c = sl2_canonical(&Poly::from_real(&[-0.625, 1.0]), &Poly::from_real(&[-0.6]), cr(3.0), &p.punctures, &p.frame)?;
    Ok(c.t_remainder.max(c.wronskian_residual))
}

fn classical_irregular() -> Result<f64> {
    let (z1, a) = (cr(0.5), cr(2.0));
    let w = z1 + a.inv();
    let rep = classical_sl2(&Poly::linear(w), &Poly::linear(2.0 * z1 - w), &[z1], &[2], ClassicalMode::Irregular { a })?;
    Ok(rep.wronskian_residual.max(rep.bethe_residuals[0].norm()).max((rep.c[0] - 2.0 * a).norm()))
}

fn trs_two_body() -> Result<f64> {
    let pm = (27.0 - 465f64.sqrt()) / 22.0;
    let inst = TRSInstance { q: cr(3.0), zeta: cr(2.0), z_plus: cr(1.0), z_minus: cr(2.0), p_plus: cr(27.0 - 11.0 * pm), p_minus: cr(pm) };
    let rep = trs_relations(&inst)?;
    Ok(rep.residuals.iter().map(|r| r.norm()).fold(0.0, f64::max))
}

fn ktheory_two_body() -> Result<f64> {
    let pm = (27.0 + 465f64.sqrt()) / 22.0;
    let f = QFrame::with_sqrt_q(cr(3f64.sqrt()))?;
    let inst = KTheoryInstance::new(2, f, vec![cr(2.0), cr(0.5)], vec![cr(1.0), cr(2.0)], vec![vec![cr(27.0 - 11.0 * pm)], vec![cr(pm)]])?;
    let rep = ktheory_relation(&inst, None)?;
    Ok(rep.max_coefficient_residual.max(rep.sample_residual))
}

pub const FIXTURES: &[(&str, Check, f64)] = &[
    ("roots_cubic", cubic_roots, 1e-12),
    ("half_shift", half_shift, 1e-15),
    ("f_functional_equation", ffunc, 1e-10),
    ("desnanot_jacobi_constant", desnanot_constant, 1e-12),
    ("sl2_root", sl2_root, 1e-10),
    ("sl2_residual", sl2_residual, 1e-12),
    ("sl2_qtilde", sl2_qtilde, 1e-12),
    ("sl2_wronskian", sl2_wronskian, 1e-10),
    ("sl2_certificate", sl2_certificate, 1e-8),
    ("sl2_transfer", sl2_transfer, 1e-9),
    ("classical_irregular", classical_irregular, 1e-10),
    ("trs_two_body", trs_two_body, 1e-10),
    ("ktheory_two_body", ktheory_two_body, 1e-10),
];

pub fn run_all() -> Vec<FixtureResult> {
    FIXTURES
        .iter()
        .map(|&(name, check, tol)| match check() {
            Ok(residual) => FixtureResult { name, residual, pass: residual <= tol },
            Err(_) => FixtureResult { name, residual: f64::INFINITY, pass: false },
        })
        .collect()
}
