//! Sections of the Miura q-oper from a dressed QQ-system, and the
//! end-to-end certificate that Bethe roots and q-oper data correspond.
//!
//! Sections are labelled `𝔮_1..𝔮_N`; row `i` of the Wronskian matrices
//! carries the twist `κ_{N+1-i}`. The recursion starts from
//! `𝔮_N = D_1`, `𝔮_{N-1} = D̃_1` and, for `k = 2..N-1`, solves
//! `det M_{N-k, N-k+2..N} = V_{N-k, N-k+2..N} D̃_k` for `𝔮_{N-k}`, then checks
//! `det M_{N-k..N} = V_{N-k..N} D_{k+1}`.

use serde::{Deserialize, Serialize};

use crate::bethe::{nondegenerate_check, xxz_residual, BetheProblem, BetheRoots};
use crate::error::{Error, Result};
use crate::polycore::{Cx, Poly, QFrame};
use crate::qqsys::{dress, qq_residual, qqv_residual, DSystem, QSystem};
use crate::wronskian::{d_factorize, m_det, poly_det, vandermonde_det, SectionData, ShiftConvention, TwistData};

/// Find `f_k` with `det [γ_j^c f_j(q^c z)]_{j,c} = g`, rows `j = 1..k`,
/// columns `c = 0..k-1`, given `f_1..f_{k-1}` and `γ_1..γ_k`.
pub fn solve_next_poly(f_known: &[Poly], gammas: &[Cx], g: &Poly, frame: &QFrame) -> Result<Poly> {
    let k = f_known.len() + 1;
    if gammas.len() != k {
        return Err(Error::BadShape(format!("{} twists for {k} rows", gammas.len())));
    }
    if g.is_zero() || f_known.iter().any(|f| f.is_zero()) {
        return Err(Error::ZeroPolynomial);
    }
    if f_known.iter().any(|f| f.coeff(0).norm() <= 1e-14 * f.max_abs_coeff()) {
        return Err(Error::ZeroConstantTerm);
    }
    let known_deg: usize = f_known.iter().map(|f| f.deg()).sum();
    let d = g.deg().checked_sub(known_deg).ok_or_else(|| Error::BadShape("target degree below known degrees".into()))?;
    let q = frame.q();

    // cofactors of the last row
    let rows: Vec<Vec<Poly>> = f_known
        .iter()
        .zip(gammas)
        .map(|(f, &gm)| (0..k).map(|c| frame.shift(f, 2 * c as i32).scale(gm.powu(c as u32))).collect())
        .collect();
    let cof: Vec<Poly> = (0..k)
        .map(|c| {
            let minor: Vec<Vec<Poly>> =
                rows.iter().map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, p)| p.clone()).collect()).collect();
            let s = if (k - 1 + c) % 2 == 0 { 1.0 } else { -1.0 };
            poly_det(&minor).map(|p| p.scale(Cx::new(s, 0.0)))
        })
        .collect::<Result<_>>()?;
    let b: Vec<Poly> = (0..=d)
        .map(|s| {
            let x = gammas[k - 1] * q.powu(s as u32);
            cof.iter().enumerate().fold(Poly::zero(), |acc, (c, p)| &acc + &p.scale(x.powu(c as u32)))
        })
        .collect();
    let mut a = vec![Cx::new(0.0, 0.0); d + 1];
    for n in 0..=d {
        let pivot = b[n].coeff(0);
        let scale = b[n].max_abs_coeff();
        if pivot.norm() <= 1e-12 * scale || scale == 0.0 {
            return Err(Error::VandermondeDegenerate);
        }
        let mut acc = g.coeff(n);
        for (s, bs) in b.iter().enumerate().take(n) {
            acc -= a[s] * bs.coeff(n - s);
        }
        a[n] = acc / pivot;
    }
    let f = Poly::new(a);
    let mut all = f_known.to_vec();
    all.push(f.clone());
    let m: Vec<Vec<Poly>> = all
        .iter()
        .zip(gammas)
        .map(|(p, &gm)| (0..k).map(|c| frame.shift(p, 2 * c as i32).scale(gm.powu(c as u32))).collect())
        .collect();
    let residual = poly_det(&m)?.rel_distance(g);
    if residual > 1e-8 {
        return Err(Error::IdentityFailure { what: "next section determinant".into(), residual });
    }
    Ok(f)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub k: usize,
    /// Relative residual of `det M_{N-k..N} = V_{N-k..N} D_{k+1}`.
    pub minor_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionLog {
    pub steps: Vec<StepLog>,
}

impl ReconstructionLog {
    pub fn max_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.minor_residual).fold(0.0, f64::max)
    }
}

/// `V(κ_{N+1-i_1}, κ_{N+1-i_2}, ...)`.
fn v_rows(rows: &[usize], kappa: &[Cx]) -> Cx {
    let n = kappa.len();
    vandermonde_det(&rows.iter().map(|&i| kappa[n - i]).collect::<Vec<_>>())
}

/// The minors that [`reconstruct_sections`] consumes, computed directly
/// from sections: `D_k = det M_{N-k+1..N}/V` and
/// `D̃_k = det M_{N-k, N-k+2..N}/V`. No singularity data is attached, so
/// every `F_k` is set to 1.
pub fn dsystem_from_sections(sections: &SectionData, kappa: &[Cx], frame: &QFrame) -> Result<DSystem> {
    let n = kappa.len();
    if sections.s.len() != n || n < 2 {
        return Err(Error::BadShape(format!("{} sections for {n} twists", sections.s.len())));
    }
    let twists = TwistData { zeta: kappa.iter().rev().copied().collect() };
    let minor = |rows: &[usize]| -> Result<Poly> {
        let det = m_det(rows, sections, &twists, frame, ShiftConvention::Symmetric)?;
        Ok(det.scale(v_rows(rows, kappa).inv()))
    };
    let mut d = vec![Poly::one()];
    let mut dtilde = Vec::with_capacity(n - 1);
    for k in 1..=n {
        d.push(minor(&(n + 1 - k..=n).collect::<Vec<_>>())?);
        if k < n {
            let mut rows = vec![n - k];
            rows.extend(n - k + 2..=n);
            dtilde.push(minor(&rows)?);
        }
    }
    Ok(DSystem { d, dtilde, f: vec![Poly::one(); n + 1], kappa: kappa.to_vec() })
}

pub fn reconstruct_sections(dsys: &DSystem, frame: &QFrame) -> Result<(SectionData, ReconstructionLog)> {
    let n = dsys.rank();
    let kappa = &dsys.kappa;
    let twists = TwistData { zeta: kappa.iter().rev().copied().collect() };
    let mut s = vec![Poly::zero(); n];
    s[n - 1] = dsys.d[1].clone();
    s[n - 2] = dsys.dtilde(1).clone();
    let mut log = ReconstructionLog::default();
    for k in 1..n {
        if k >= 2 {
            // 𝔮_{N+1-j} for j = 1..k-1, shifted by (1-k)/2
            let f_known: Vec<Poly> = (1..k).map(|j| frame.shift(&s[n - j], 1 - k as i32)).collect();
            let mut gammas: Vec<Cx> = kappa[..k - 1].to_vec();
            gammas.push(kappa[k]);
            let mut rows = vec![n - k];
            rows.extend(n - k + 2..=n);
            let sign = if (k * (k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let g = dsys.dtilde(k).scale(v_rows(&rows, kappa) * sign);
            let f = solve_next_poly(&f_known, &gammas, &g, frame).map_err(|e| match e {
                Error::IdentityFailure { residual, .. } => Error::MinorMismatch { step: k, residual },
                e => e,
            })?;
            s[n - k - 1] = frame.shift(&f, k as i32 - 1).trim(frame.tol.trim);
        }
        let rows: Vec<usize> = (n - k..=n).collect();
        let sections = SectionData { s: s.clone() };
        let det = m_det(&rows, &sections, &twists, frame, ShiftConvention::Symmetric)?;
        let target = dsys.d[k + 1].scale(v_rows(&rows, kappa));
        let minor_residual = det.rel_distance(&target);
        log.steps.push(StepLog { k, minor_residual });
        if minor_residual > 1e-8 {
            return Err(Error::MinorMismatch { step: k, residual: minor_residual });
        }
    }
    Ok((SectionData { s }, log))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub stages: Vec<Stage>,
    pub sections: Vec<Poly>,
    pub alphas: Vec<Cx>,
    pub pass: bool,
}

/// Which twists the factorization stage pairs with the reconstructed rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistOrder {
    /// `ζ_k = κ_{N+1-k}`.
    Reversed,
    /// `ζ_k = κ_k`; only useful as a negative control.
    Direct,
}

pub fn correspondence_check(prob: &BetheProblem, roots: &BetheRoots) -> Result<Certificate> {
    correspondence_check_with(prob, roots, TwistOrder::Reversed)
}

/// Run Bethe roots through the QQ-system, reconstruct the sections and
/// factor their quantum Wronskians back into Bethe roots.
pub fn correspondence_check_with(prob: &BetheProblem, roots: &BetheRoots, order: TwistOrder) -> Result<Certificate> {
    let f = &prob.frame;
    let n = prob.n;
    let stage_tol = 1e-8;
    let mut stages = Vec::new();
    let mut push = |name: &str, residual: f64, tol: f64| {
        stages.push(Stage { name: name.into(), residual, pass: residual <= tol });
    };

    let bethe = xxz_residual(prob, roots).map_err(Error::at("bethe"))?;
    push("bethe", bethe.max_abs, 1e-9);
    let nd = nondegenerate_check(prob, roots).map_err(Error::at("nondegenerate"))?;
    push("nondegenerate", nd.violations.len() as f64, 0.0);

    let qsys = QSystem::from_bethe(prob, roots).map_err(Error::at("qq"))?;
    push("qq", qq_residual(&qsys, f).max_abs, stage_tol);
    let dsys = dress(&qsys, &prob.punctures, f).map_err(Error::at("qqv"))?;
    push("qqv", qqv_residual(&dsys, f).max_abs, stage_tol);

    let (sections, log) = reconstruct_sections(&dsys, f).map_err(Error::at("reconstruct"))?;
    push("reconstruct", log.max_residual(), stage_tol);

    let zeta: Vec<Cx> = match order {
        TwistOrder::Reversed => prob.kappa.iter().rev().copied().collect(),
        TwistOrder::Direct => prob.kappa.clone(),
    };
    let twists = TwistData { zeta };
    let mut zero_err = 0.0f64;
    let mut alpha_err = 0.0f64;
    let mut alphas = Vec::with_capacity(n);
    for k in 1..=n {
        let fac = d_factorize(k, &sections, &twists, &prob.punctures, f).map_err(Error::at("factorize"))?;
        let rk = if k < n { prob.r[k - 1] } else { 0 };
        let expected: Vec<Cx> = if k < n {
            roots.u[k - 1].iter().map(|u| f.half_pow(1 - k as i32) * u).collect()
        } else {
            Vec::new()
        };
        zero_err = zero_err.max(match_roots(&fac.bethe_zeros, &expected));
        let kappa_rev: Vec<Cx> = (1..=k).rev().map(|j| prob.kappa(j)).collect();
        let alpha = f.half_pow(((k - 1) * rk) as i32) * vandermonde_det(&kappa_rev);
        alpha_err = alpha_err.max((fac.alpha - alpha).norm() / alpha.norm());
        alphas.push(fac.alpha);
    }
    push("bethe_zeros", zero_err, stage_tol);
    push("alpha", alpha_err, stage_tol);

    let pass = stages.iter().all(|s| s.pass);
    Ok(Certificate { stages, sections: sections.s, alphas, pass })
}

/// Largest relative distance under a greedy nearest matching; infinite on a
/// count mismatch.
pub(crate) fn match_roots(found: &[Cx], expected: &[Cx]) -> f64 {
    if found.len() != expected.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; found.len()];
    let mut worst = 0.0f64;
    for e in expected {
        let (i, d) = found
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, x)| (i, (x - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("counts match");
        used[i] = true;
        worst = worst.max(d / e.norm().max(1e-300));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::cr;

    #[test]
    fn next_poly_inverts_determinant() {
        let f = QFrame::with_sqrt_q(cr(1.5)).unwrap();
        let known = vec![Poly::from_real(&[1.0, -0.5]), Poly::from_real(&[2.0, 0.3, 1.0])];
        let unknown = Poly::from_real(&[-0.7, 1.1]);
        let gammas = [cr(0.5), cr(1.7), cr(-1.2)];
        let m: Vec<Vec<Poly>> = known
            .iter()
            .chain([&unknown])
            .zip(&gammas)
            .map(|(p, &g)| (0..3).map(|c| f.shift(p, 2 * c).scale(g.powu(c as u32))).collect())
            .collect();
        let g = poly_det(&m).unwrap();
        let got = solve_next_poly(&known, &gammas, &g, &f).unwrap();
        assert!(got.rel_distance(&unknown) < 1e-12);
    }

    #[test]
    fn zero_constant_term_rejected() {
        let f = QFrame::with_sqrt_q(cr(1.5)).unwrap();
        let e = solve_next_poly(&[Poly::from_real(&[0.0, 1.0])], &[cr(1.0), cr(2.0)], &Poly::from_real(&[1.0, 1.0]), &f);
        assert!(matches!(e, Err(Error::ZeroConstantTerm)));
    }
}
