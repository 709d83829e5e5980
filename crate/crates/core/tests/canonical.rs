use qoper::bethe::{solve_newton, BetheProblem};
use qoper::canonical::{
    classical_sl2, sl2_canonical, sl2_companion_samples, sl2_scalar_residual, sl2_transfer_remainder, sl3_canonical,
    sl3_companion_samples, sl3_scalar_residual, ClassicalMode,
};
use qoper::polycore::{cr, cx, Cx};
use qoper::reconstruct::correspondence_check;
use qoper::structpoly::lambda_poly;
use qoper::wronskian::{SectionData, TwistData};
use qoper::{Error, Poly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sl2_fixture() -> BetheProblem {
    BetheProblem::builder(2, cr(2.0))
        .kappa(vec![cr(1.0 / 3.0), cr(3.0)])
        .puncture(cr(1.0), vec![1])
        .roots(vec![1])
        .build()
        .unwrap()
}

fn sl2_random(seed: u64) -> BetheProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || cx(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
    let k = c() + 1.7;
    BetheProblem::builder(2, cx(1.2, 0.15))
        .kappa(vec![k, k.inv()])
        .puncture(c(), vec![1])
        .puncture(c(), vec![2])
        .roots(vec![2])
        .build()
        .unwrap()
}

/// `(Q_-, Q_+, ζ)` read off the reconstructed sections.
fn sl2_data(p: &BetheProblem, seed: u64) -> (Poly, Poly, Cx) {
    let (roots, rep) = solve_newton(p, None, seed, 32).unwrap();
    assert!(rep.converged);
    let cert = correspondence_check(p, &roots).unwrap();
    assert!(cert.pass);
    (cert.sections[1].clone(), cert.sections[0].clone(), p.kappa(2))
}

#[test]
fn sl2_fixture_transfer() {
    let p = sl2_fixture();
    let (qm, qp, zeta) = sl2_data(&p, 1);
    assert!(qm.monicize().unwrap().0.rel_distance(&Poly::from_real(&[-0.625, 1.0])) < 1e-10);
    let c = sl2_canonical(&qm, &qp, zeta, &p.punctures, &p.frame).unwrap();
    assert!(c.t_remainder < 1e-12);
    assert_eq!(c.t.deg(), 1);
}

#[test]
fn sl2_scalar_equation_solutions() {
    for seed in 0..4 {
        let p = sl2_random(seed);
        let (qm, qp, zeta) = sl2_data(&p, seed);
        let c = sl2_canonical(&qm, &qp, zeta, &p.punctures, &p.frame).unwrap();
        let q = p.q();
        let z0 = cx(0.31, -0.47);
        let lattice = |j: i32| z0 * q.powi(j);
        // f(q^j z0) = ζ^{-j} Q_-(q^j z0) and ζ^j Q_+(q^j z0)
        let phi: Vec<Cx> = (0..8).map(|j| zeta.powi(-j) * qm.eval(lattice(j))).collect();
        let psi: Vec<Cx> = (0..8).map(|j| zeta.powi(j) * qp.eval(lattice(j))).collect();
        assert!(sl2_scalar_residual(&c, z0, &phi, &p.frame).unwrap() < 1e-10);
        assert!(sl2_scalar_residual(&c, z0, &psi, &p.frame).unwrap() < 1e-10);
        let gen = sl2_companion_samples(&c, z0, [phi[0], phi[1]], 8, &p.frame).unwrap();
        for (a, b) in gen.iter().zip(&phi) {
            assert!((a - b).norm() < 1e-8 * (1.0 + b.norm()));
        }
    }
}

#[test]
fn sl2_transfer_polynomiality_detects_perturbation() {
    for seed in 0..4 {
        let p = sl2_random(seed);
        let (qm, _, zeta) = sl2_data(&p, seed);
        let rho = lambda_poly(1, &p.punctures, &p.frame).unwrap();
        assert!(sl2_transfer_remainder(&qm, zeta, &rho, &p.frame).unwrap() < 1e-9);
        let w = qoper::polycore::roots_seeded(&qm.monicize().unwrap().0, &p.frame.tol, 0).unwrap();
        let moved = Poly::from_roots(&[w[0] * (1.0 + 1e-2), w[1]]);
        assert!(sl2_transfer_remainder(&moved, zeta, &rho, &p.frame).unwrap() > 1e-4);
    }
}

fn sl3_problem(seed: u64) -> BetheProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let k1 = c() + 1.5;
    let k2 = c() - 1.5;
    BetheProblem::builder(3, cx(1.25, -0.1))
        .kappa(vec![k1, k2, (k1 * k2).inv()])
        .puncture(c(), vec![1, 0])
        .puncture(c() * 2.0, vec![1, 1])
        .roots(vec![2, 1])
        .build()
        .unwrap()
}

#[test]
fn sl3_canonical_suite() {
    let mut checked = 0;
    for seed in 0..6 {
        let p = sl3_problem(seed);
        let Ok((roots, rep)) = solve_newton(&p, None, seed, 32) else { continue };
        assert!(rep.converged);
        let cert = correspondence_check(&p, &roots).unwrap();
        assert!(cert.pass);
        let twists = TwistData { zeta: p.kappa.iter().rev().copied().collect() };
        let sections = SectionData { s: cert.sections.clone() };
        let c = sl3_canonical(&sections, &twists, &p.punctures, &p.frame).unwrap();
        assert!(c.alt_form_residual < 1e-9, "{}", c.alt_form_residual);
        assert!(c.t1_remainder < 1e-9 && c.t2_remainder < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        for _ in 0..10 {
            let z = cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let prod: Cx = c.a.iter().map(|r| r.eval(z).unwrap()).product();
            assert!((prod - 1.0).norm() < 1e-10);
        }

        let z0 = cx(0.43, 0.29);
        for init in [[cr(1.0), cr(0.0), cr(0.0)], [cr(0.3), cr(1.0), cr(-0.5)], [cx(0.2, 1.0), cr(-0.7), cr(1.0)]] {
            let f = sl3_companion_samples(&c, z0, init, 8, &p.frame).unwrap();
            assert!(sl3_scalar_residual(&c, z0, &f, &p.frame).unwrap() < 1e-8);
        }
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn classical_regular_closed_form() {
    // two punctures of weight 1, one root at the midpoint
    let z = [cr(-1.0), cr(1.0)];
    let qm = Poly::linear(cr(0.0));
    let qp = Poly::from_real(&[1.0, 0.4, 1.0]);
    let rep = classical_sl2(&qm, &qp, &z, &[1, 1], ClassicalMode::Regular).unwrap();
    assert!(rep.wronskian_residual < 1e-12);
    assert!(rep.bethe_residuals[0].norm() < 1e-12);
    let t = rep.t.unwrap();
    for zz in [cx(0.3, 0.2), cx(-2.0, 0.5), cx(0.1, -1.4)] {
        let closed: Cx = (0..2).map(|m| 0.75 / (zz - z[m]).powu(2) + rep.c[m] / (zz - z[m])).sum();
        assert!((t.eval(zz).unwrap() - closed).norm() < 1e-10);
    }
    assert!((rep.c[0] - cr(0.75)).norm() < 1e-12);
}

#[test]
fn classical_irregular_fixture() {
    let (z1, a) = (cx(0.4, -0.3), cx(1.7, 0.6));
    let w = z1 + a.inv();
    let qm = Poly::linear(w);
    let qp = Poly::linear(2.0 * z1 - w);
    let rep = classical_sl2(&qm, &qp, &[z1], &[2], ClassicalMode::Irregular { a }).unwrap();
    assert!(rep.wronskian_residual < 1e-10);
    assert!(rep.bethe_residuals[0].norm() < 1e-10);
    assert!((rep.c[0] - 2.0 * a).norm() < 1e-10);
}

#[test]
fn classical_rejects_non_bethe_root() {
    let z = [cr(-1.0), cr(1.0)];
    let qm = Poly::linear(cr(0.2));
    let qp = Poly::from_real(&[0.1, 0.0, 0.0, 1.0]);
    assert!(matches!(
        classical_sl2(&qm, &qp, &z, &[1, 1], ClassicalMode::Regular),
        Err(Error::WronskianMismatch { .. })
    ));
}
