use proptest::prelude::*;
use qoper::bethe::{xxz_residual, BetheRoots};
use qoper::polycore::{cr, cx, roots_seeded, Cx};
use qoper::qqsys::{build_qtilde, dress, qq_residual, qqv_residual, QSystem};
use qoper::reconstruct::{dsystem_from_sections, reconstruct_sections};
use qoper::selftest::{random_problem, solved_instances};
use qoper::structpoly::{check_ffunc, pi_poly, Puncture, PunctureData};
use qoper::wronskian::{desnanot_jacobi_check, SectionData};
use qoper::{Error, Poly, QFrame};

fn cxv(len: usize, r: f64) -> impl Strategy<Value = Vec<Cx>> {
    prop::collection::vec((-r..r, -r..r).prop_map(|(a, b)| cx(a, b)), len)
}

fn poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    (0..=max_deg).prop_flat_map(|d| cxv(d + 1, 1.0)).prop_map(Poly::new)
}

fn sqrt_q() -> impl Strategy<Value = Cx> {
    (1.05f64..1.6, -0.3f64..0.3).prop_map(|(a, b)| cx(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_is_additive(p in poly(6), a in -6i32..6, b in -6i32..6, s in sqrt_q()) {
        let f = QFrame::with_sqrt_q(s).unwrap();
        let lhs = f.shift(&f.shift(&p, a), b);
        prop_assert!(lhs.rel_distance(&f.shift(&p, a + b)) < 1e-12);
    }

    #[test]
    fn roots_reconstitute(r in cxv(5, 2.0), seed in 0u64..1000) {
        let p = Poly::from_roots(&r);
        let found = roots_seeded(&p, &Default::default(), seed).unwrap();
        prop_assert!(Poly::from_roots(&found).rel_distance(&p) < 1e-10);
    }

    #[test]
    fn lattice_relation_is_antisymmetric(a in cxv(1, 2.0), n in -5i32..5, s in sqrt_q()) {
        let f = QFrame::with_sqrt_q(s).unwrap();
        let x = a[0] + 0.5;
        let y = x * f.q_pow(n);
        prop_assert_eq!(f.lattice_related(x, y).unwrap(), Some(-n));
        prop_assert_eq!(f.lattice_related(y, x).unwrap(), Some(n));
    }

    #[test]
    fn f_functional_equation(
        n in 2usize..=4,
        zs in cxv(3, 2.0),
        w in prop::collection::vec(prop::collection::vec(0u32..=3, 3), 3),
        l in 1usize..=3,
        s in sqrt_q(),
    ) {
        let f = QFrame::with_sqrt_q(s).unwrap();
        let data = PunctureData::new(
            (0..l).map(|i| Puncture { z: zs[i], weights: w[i][..n - 1].to_vec() }).collect(),
        );
        prop_assert!(check_ffunc(n, &data, &f).unwrap() <= 1e-10);
    }

    #[test]
    fn desnanot_jacobi(size in 3usize..=5, seed in 0u64..1000, entries in cxv(75, 1.0)) {
        let m: Vec<Vec<Poly>> = (0..size)
            .map(|i| (0..size).map(|j| Poly::new(entries[3 * (i * size + j)..3 * (i * size + j) + 3].to_vec())).collect())
            .collect();
        prop_assert!(desnanot_jacobi_check(&m, seed).unwrap() <= 1e-10);
    }

    #[test]
    fn residuals_follow_root_permutation(seed in 0u64..200, u in cxv(4, 1.5)) {
        let Some(p) = random_problem(3, seed) else { return Ok(()) };
        let mut it = u.into_iter();
        let roots = BetheRoots { u: p.r.iter().map(|&rk| it.by_ref().take(rk).collect()).collect() };
        if roots.u.iter().map(|l| l.len()).ne(p.r.iter().copied()) {
            return Ok(());
        }
        let Ok(base) = xxz_residual(&p, &roots) else { return Ok(()) };
        let mut rev = roots.clone();
        rev.u[0].reverse();
        let swapped = xxz_residual(&p, &rev).unwrap();
        for (a, b) in base.residuals[0].iter().rev().zip(&swapped.residuals[0]) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn qq_and_dressed_relations_agree() {
    for (p, roots) in solved_instances(&[2, 3], 12, 1000) {
        let sys = QSystem::from_bethe(&p, &roots).unwrap();
        let d = dress(&sys, &p.punctures, &p.frame).unwrap();
        let (a, b) = (qq_residual(&sys, &p.frame).max_abs, qqv_residual(&d, &p.frame).max_abs);
        assert!(a <= 1e-8 && b <= 1e-8, "{a} {b}");
    }
}

#[test]
fn qtilde_exists_exactly_on_solutions() {
    let got = solved_instances(&[2, 3], 20, 0);
    assert_eq!(got.len(), 20);
    for (p, roots) in got {
        let sys = QSystem::from_bethe(&p, &roots).unwrap();
        assert!(qq_residual(&sys, &p.frame).max_abs <= 1e-8);
        for k in 1..p.n {
            if roots.u[k - 1].is_empty() {
                continue;
            }
            let mut moved = roots.u[k - 1].clone();
            moved[0] += 1e-3;
            let pi = pi_poly(k, &p.punctures, &p.frame).unwrap();
            let e = build_qtilde(&sys.q[k - 1], &Poly::from_roots(&moved), &sys.q[k + 1], &pi, p.kappa(k), p.kappa(k + 1), &p.frame)
                .unwrap_err();
            assert!(matches!(e, Error::Inconsistent { residual } if residual > 1e-6), "{e:?}");
        }
    }
}

fn nonzero_constant(p: Poly) -> Poly {
    let mut c = p.into_coeffs();
    if c[0].norm() < 0.2 {
        c[0] += 0.5;
    }
    Poly::new(c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minors_determine_sections(
        n in 2usize..=4,
        polys in prop::collection::vec(poly(4), 4),
        k in cxv(3, 0.9),
        s in sqrt_q(),
    ) {
        let f = QFrame::with_sqrt_q(s).unwrap();
        let sections = SectionData { s: polys.into_iter().take(n).map(nonzero_constant).collect() };
        let mut kappa: Vec<Cx> = k.iter().take(n - 1).map(|x| (x + cr(0.1)).exp()).collect();
        kappa.push(kappa.iter().product::<Cx>().inv());
        for i in 0..n {
            for j in 0..i {
                prop_assume!(f.lattice_disjoint(kappa[i], kappa[j]).unwrap());
            }
        }
        let d = dsystem_from_sections(&sections, &kappa, &f).unwrap();
        let (back, log) = reconstruct_sections(&d, &f).unwrap();
        prop_assert!(log.max_residual() <= 1e-8);
        for (a, b) in back.s.iter().zip(&sections.s) {
            prop_assert!(a.rel_distance(b) <= 1e-8, "{a} vs {b}");
        }
    }
}
