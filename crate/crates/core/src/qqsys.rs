//! Baxter polynomials and the QQ-system.
//!
//! `Q_k = Π_a (z - u_{k,a})`, `Q_0 = Q_N = 1`, and `Q̃_k` solves
//!
//! `κ_{k+1} Q_k^{(-1/2)} Q̃_k^{(1/2)} - κ_k Q_k^{(1/2)} Q̃_k^{(-1/2)}
//!  = (κ_{k+1} - κ_k) Q_{k-1} Q_{k+1} Π_k`.
//!
//! Multiplying by `F_k^{(1/2)} F_k^{(-1/2)}` turns this into the relation for
//! `D_k = Q_k F_k`, `D̃_k = Q̃_k F_k` with right-hand side
//! `(κ_{k+1} - κ_k) D_{k-1} D_{k+1}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bethe::{BetheProblem, BetheRoots, ResidualReport};
use crate::error::{Error, Result};
use crate::polycore::{Cx, Poly, QFrame};
use crate::structpoly::{f_poly, pi_poly};

/// Polynomials of the QQ-system for levels `1..N-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSystem {
    /// `Q_0, ..., Q_N`.
    pub q: Vec<Poly>,
    /// `Q̃_1, ..., Q̃_{N-1}`.
    pub qtilde: Vec<Poly>,
    /// `Π_1, ..., Π_{N-1}`.
    pub pi: Vec<Poly>,
    pub kappa: Vec<Cx>,
}

impl QSystem {
    pub fn rank(&self) -> usize {
        self.q.len() - 1
    }

    /// `Q̃_k` with 1-based `k`.
    pub fn qtilde(&self, k: usize) -> &Poly {
        &self.qtilde[k - 1]
    }

    /// Baxter polynomials from Bethe roots and `Q̃_k` from the linear solve.
    pub fn from_bethe(prob: &BetheProblem, roots: &BetheRoots) -> Result<Self> {
        let n = prob.n;
        let f = &prob.frame;
        let q: Vec<Poly> = (0..=n)
            .map(|k| if k == 0 || k == n { Poly::one() } else { Poly::from_roots(&roots.u[k - 1]) })
            .collect();
        let pi: Vec<Poly> = (1..n).map(|k| pi_poly(k, &prob.punctures, f)).collect::<Result<_>>()?;
        let mut qtilde = Vec::with_capacity(n - 1);
        for k in 1..n {
            let (t, _) = build_qtilde(&q[k - 1], &q[k], &q[k + 1], &pi[k - 1], prob.kappa(k), prob.kappa(k + 1), f)?;
            qtilde.push(t);
        }
        Ok(QSystem { q, qtilde, pi, kappa: prob.kappa.clone() })
    }
}

/// Column `i` of the linear system: `z^i (κ_{k+1} q^{i/2} Q^{(-1/2)} - κ_k q^{-i/2} Q^{(1/2)})`.
fn bracket(qk: &Poly, i: usize, kk: Cx, kk1: Cx, f: &QFrame) -> Poly {
    let a = f.shift(qk, -1).scale(kk1 * f.half_pow(i as i32));
    let b = f.shift(qk, 1).scale(kk * f.half_pow(-(i as i32)));
    let mut c = vec![Cx::new(0.0, 0.0); i];
    c.extend((a - b).into_coeffs());
    Poly::new(c)
}

pub(crate) fn qq_matrix(qk: &Poly, deg_t: usize, rows: usize, kk: Cx, kk1: Cx, f: &QFrame) -> DMatrix<Cx> {
    let cols: Vec<Poly> = (0..=deg_t).map(|i| bracket(qk, i, kk, kk1, f)).collect();
    DMatrix::from_fn(rows, deg_t + 1, |r, c| cols[c].coeff(r))
}

/// Least-squares solve with unit-norm column scaling; `row_order` permutes
/// the equations.
pub(crate) fn solve_scaled(a: &DMatrix<Cx>, b: &DVector<Cx>, row_order: &[usize]) -> Option<DVector<Cx>> {
    let a = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[(row_order[r], c)]);
    let b = DVector::from_fn(b.len(), |r, _| b[row_order[r]]);
    let norms: Vec<f64> = (0..a.ncols()).map(|c| a.column(c).norm()).collect();
    if norms.contains(&0.0) {
        return None;
    }
    let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] / norms[c]);
    let svd = scaled.svd(true, true);
    let x = svd.solve(&b, 1e-14).ok()?;
    Some(DVector::from_fn(x.len(), |i, _| x[i] / norms[i]))
}

/// Solve the QQ relation at one level for `Q̃_k`. Returns the polynomial and
/// the relative coefficient residual.
pub fn build_qtilde(
    q_prev: &Poly,
    q_k: &Poly,
    q_next: &Poly,
    pi_k: &Poly,
    kappa_k: Cx,
    kappa_k1: Cx,
    frame: &QFrame,
) -> Result<(Poly, f64)> {
    build_qtilde_ordered(q_prev, q_k, q_next, pi_k, kappa_k, kappa_k1, frame, None)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_qtilde_ordered(
    q_prev: &Poly,
    q_k: &Poly,
    q_next: &Poly,
    pi_k: &Poly,
    kappa_k: Cx,
    kappa_k1: Cx,
    frame: &QFrame,
    row_order: Option<&[usize]>,
) -> Result<(Poly, f64)> {
    if q_k.is_zero() || q_prev.is_zero() || q_next.is_zero() || pi_k.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if let Some(m) = frame.lattice_related(kappa_k, kappa_k1)? {
        if m >= 0 {
            return Err(Error::DegenerateTwists(format!("κ_k = q^{m} κ_{{k+1}}")));
        }
    }
    let rhs = (q_prev * q_next * pi_k).scale(kappa_k1 - kappa_k);
    let r = q_k.deg();
    let dr = rhs.deg();
    if dr < r {
        return Err(Error::Inconsistent { residual: 1.0 });
    }
    let d = dr - r;
    let lead_factor = kappa_k1 * frame.half_pow(d as i32 - r as i32) - kappa_k * frame.half_pow(r as i32 - d as i32);
    if lead_factor.norm() <= 1e-10 * (kappa_k.norm() + kappa_k1.norm()) * frame.half_pow((d as i32 - r as i32).abs()).norm() {
        return Err(Error::DegenerateTwists(format!("leading coefficient cancels at degree {d}")));
    }
    let rows = dr + 1;
    let a = qq_matrix(q_k, d, rows, kappa_k, kappa_k1, frame);
    let b = DVector::from_fn(rows, |i, _| rhs.coeff(i));
    let identity: Vec<usize> = (0..rows).collect();
    let x = solve_scaled(&a, &b, row_order.unwrap_or(&identity)).ok_or(Error::Inconsistent { residual: f64::INFINITY })?;
    let t = Poly::new(x.iter().copied().collect());
    let lhs = qq_lhs(q_k, &t, kappa_k, kappa_k1, frame);
    let residual = lhs.rel_distance(&rhs);
    if residual > 1e-8 {
        return Err(Error::Inconsistent { residual });
    }
    Ok((t, residual))
}

/// `κ_{k+1} Q^{(-1/2)} T^{(1/2)} - κ_k Q^{(1/2)} T^{(-1/2)}`.
fn qq_lhs(q: &Poly, t: &Poly, kk: Cx, kk1: Cx, f: &QFrame) -> Poly {
    (f.shift(q, -1) * f.shift(t, 1)).scale(kk1) - (f.shift(q, 1) * f.shift(t, -1)).scale(kk)
}

/// Relative coefficient residual of the QQ relation at each level.
pub fn qq_residual(sys: &QSystem, frame: &QFrame) -> ResidualReport {
    let n = sys.rank();
    let mut out = Vec::new();
    for k in 1..n {
        let (kk, kk1) = (sys.kappa[k - 1], sys.kappa[k]);
        let lhs = qq_lhs(&sys.q[k], &sys.qtilde[k - 1], kk, kk1, frame);
        let rhs = (&sys.q[k - 1] * &sys.q[k + 1] * &sys.pi[k - 1]).scale(kk1 - kk);
        out.push(vec![Cx::new(lhs.rel_distance(&rhs), 0.0)]);
    }
    ResidualReport::new(out, frame.tol.rel_identity)
}

/// Dressed polynomials `D_k = Q_k F_k` (`k = 0..N`) and `D̃_k = Q̃_k F_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DSystem {
    pub d: Vec<Poly>,
    pub dtilde: Vec<Poly>,
    pub f: Vec<Poly>,
    pub kappa: Vec<Cx>,
}

impl DSystem {
    pub fn rank(&self) -> usize {
        self.d.len() - 1
    }

    /// `D̃_k` with 1-based `k`.
    pub fn dtilde(&self, k: usize) -> &Poly {
        &self.dtilde[k - 1]
    }
}

pub fn dress(sys: &QSystem, structure: &crate::structpoly::PunctureData, frame: &QFrame) -> Result<DSystem> {
    let n = sys.rank();
    let f: Vec<Poly> = (0..=n).map(|k| f_poly(k, structure, frame)).collect::<Result<_>>()?;
    let d = (0..=n).map(|k| &sys.q[k] * &f[k]).collect();
    let dtilde = (1..n).map(|k| &sys.qtilde[k - 1] * &f[k]).collect();
    Ok(DSystem { d, dtilde, f, kappa: sys.kappa.clone() })
}

/// Relative coefficient residual of the dressed relation at each level.
pub fn qqv_residual(sys: &DSystem, frame: &QFrame) -> ResidualReport {
    let n = sys.rank();
    let mut out = Vec::new();
    for k in 1..n {
        let (kk, kk1) = (sys.kappa[k - 1], sys.kappa[k]);
        let lhs = qq_lhs(&sys.d[k], &sys.dtilde[k - 1], kk, kk1, frame);
        let rhs = (&sys.d[k - 1] * &sys.d[k + 1]).scale(kk1 - kk);
        out.push(vec![Cx::new(lhs.rel_distance(&rhs), 0.0)]);
    }
    ResidualReport::new(out, frame.tol.rel_identity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::cr;

    #[test]
    fn sl2_fixture_qtilde() {
        let p = BetheProblem::builder(2, cr(2.0))
            .kappa(vec![cr(1.0 / 3.0), cr(3.0)])
            .puncture(cr(1.0), vec![1])
            .roots(vec![1])
            .build()
            .unwrap();
        let roots = BetheRoots { u: vec![vec![cr(0.625)]] };
        let sys = QSystem::from_bethe(&p, &roots).unwrap();
        assert!(sys.qtilde(1).rel_distance(&Poly::from_real(&[1.6])) < 1e-14);
        assert!(qq_residual(&sys, &p.frame).max_abs < 1e-14);
        let d = dress(&sys, &p.punctures, &p.frame).unwrap();
        assert!(qqv_residual(&d, &p.frame).max_abs < 1e-14);
        // D_1 = Q_1 = z - 5/8, D̃_1 = 8/5, D_2 = F_2 = z/2 - 1
        assert!(d.d[2].rel_distance(&Poly::from_real(&[-1.0, 0.5])) < 1e-15);
    }

    #[test]
    fn perturbed_roots_are_inconsistent() {
        let f = QFrame::with_sqrt_q(cr(2.0)).unwrap();
        let q = Poly::from_roots(&[cr(0.626)]);
        let pi = Poly::from_real(&[-1.0, 0.5]);
        let e = build_qtilde(&Poly::one(), &q, &Poly::one(), &pi, cr(1.0 / 3.0), cr(3.0), &f).unwrap_err();
        assert!(matches!(e, Error::Inconsistent { residual } if residual > 1e-6));
    }

    #[test]
    fn degenerate_twists() {
        let f = QFrame::with_sqrt_q(cr(2.0)).unwrap();
        let q = Poly::from_roots(&[cr(0.5)]);
        let e = build_qtilde(&Poly::one(), &q, &Poly::one(), &Poly::one(), cr(4.0), cr(1.0), &f).unwrap_err();
        assert!(matches!(e, Error::DegenerateTwists(_)));
    }

    proptest::proptest! {
        #[test]
        fn qtilde_ignores_equation_order(seed in 0u64..400, perm_seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let Some((p, roots)) = crate::selftest::random_solved(2, seed) else { return Ok(()) };
            let sys = QSystem::from_bethe(&p, &roots).unwrap();
            let rows = (&sys.q[0] * &sys.q[2] * &sys.pi[0]).deg() + 1;
            let mut order: Vec<usize> = (0..rows).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
            let (t, _) = build_qtilde_ordered(&sys.q[0], &sys.q[1], &sys.q[2], &sys.pi[0], p.kappa(1), p.kappa(2), &p.frame, Some(&order)).unwrap();
            proptest::prop_assert!(t.rel_distance(sys.qtilde(1)) < 1e-9);
        }
    }
}
