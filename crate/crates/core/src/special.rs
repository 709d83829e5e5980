//! Two-body trigonometric Ruijsenaars–Schneider relations and the
//! determinantal quantum K-theory relation.

use serde::{Deserialize, Serialize};

use crate::bethe::{json_error, BetheProblem};
use crate::error::{Error, Result};
use crate::polycore::{is_finite, product, Cx, Poly, QFrame};
use crate::wronskian::{poly_det, vandermonde_det, ShiftConvention};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TRSInstance {
    pub q: Cx,
    pub zeta: Cx,
    pub z_plus: Cx,
    pub z_minus: Cx,
    pub p_plus: Cx,
    pub p_minus: Cx,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TRSReport {
    /// `A p_+ + B p_- - q(z_+ + z_-)` and `p_+ p_-/q - z_+ z_-`.
    pub residuals: [Cx; 2],
    /// `z_+ + z_-` and `z_+ z_-` implied by the momenta.
    pub implied_sum: Cx,
    pub implied_product: Cx,
}

fn trs_coefficients(q: Cx, zeta: Cx) -> Result<(Cx, Cx)> {
    let d = zeta - zeta.inv();
    if d.norm() <= 1e-12 * (1.0 + zeta.norm()) {
        return Err(Error::DegenerateTwist("ζ = ±1".into()));
    }
    Ok(((zeta - q / zeta) / d, (q * zeta - zeta.inv()) / d))
}

/// `(ζ - qζ^{-1})/(ζ - ζ^{-1}) p_+ + (qζ - ζ^{-1})/(ζ - ζ^{-1}) p_- = q(z_+ + z_-)`,
/// `p_+ p_-/q = z_+ z_-`.
pub fn trs_relations(inst: &TRSInstance) -> Result<TRSReport> {
    let (a, b) = trs_coefficients(inst.q, inst.zeta)?;
    let implied_sum = (a * inst.p_plus + b * inst.p_minus) / inst.q;
    let implied_product = inst.p_plus * inst.p_minus / inst.q;
    Ok(TRSReport {
        residuals: [
            a * inst.p_plus + b * inst.p_minus - inst.q * (inst.z_plus + inst.z_minus),
            implied_product - inst.z_plus * inst.z_minus,
        ],
        implied_sum,
        implied_product,
    })
}

/// Both momentum pairs `(p_+, p_-)` for given positions.
pub fn trs_solve(q: Cx, zeta: Cx, z_plus: Cx, z_minus: Cx) -> Result<[(Cx, Cx); 2]> {
    let (a, b) = trs_coefficients(q, zeta)?;
    if a.norm() == 0.0 {
        return Err(Error::DegenerateTwist("q ζ^{-2} = 1".into()));
    }
    // p_+ = (s - b p_-)/a with s = q(z_+ + z_-); b p_-² - s p_- + a q z_+ z_- = 0
    let s = q * (z_plus + z_minus);
    let c = a * q * z_plus * z_minus;
    let disc = (s * s - 4.0 * b * c).sqrt();
    let roots = [(s + disc) / (2.0 * b), (s - disc) / (2.0 * b)];
    Ok(roots.map(|pm| ((s - b * pm) / a, pm)))
}

/// `ζ^{-1} Q_+ Q_-(qz) - ζ Q_+(qz) Q_-` with `Q_- = z - p_-`,
/// `Q_+ = c(z - p_+)`, `c = q^{-1}(ζ^{-1} - ζ)^{-1}`.
pub fn trs_wronskian(inst: &TRSInstance) -> Result<Poly> {
    let d = inst.zeta.inv() - inst.zeta;
    if d.norm() <= 1e-12 || (inst.q * inst.zeta * inst.zeta - 1.0).norm() <= 1e-12 {
        return Err(Error::DegenerateTwist("leading coefficient of the Wronskian vanishes".into()));
    }
    let c = (inst.q * d).inv();
    let qm = Poly::linear(inst.p_minus);
    let qp = Poly::linear(inst.p_plus).scale(c);
    Ok((&qp * &qm.scale_arg(inst.q)).scale(inst.zeta.inv()) - (&qp.scale_arg(inst.q) * &qm).scale(inst.zeta))
}

/// Data of the determinantal relation. `kappa[a]` is the twist of row `a`;
/// on the Bethe side this is `κ_{N-a}` (0-based `a`).
#[derive(Clone, Debug, PartialEq)]
pub struct KTheoryInstance {
    pub n: usize,
    pub frame: QFrame,
    pub kappa: Vec<Cx>,
    pub a: Vec<Cx>,
    /// `p[a] = [p_{a,1}, ..., p_{a,ρ_a}]`.
    pub p: Vec<Vec<Cx>>,
}

#[derive(Serialize, Deserialize)]
struct KTheoryFile {
    #[serde(rename = "N")]
    n: usize,
    sqrt_q: Cx,
    kappa: Vec<Cx>,
    a: Vec<Cx>,
    p: Vec<Vec<Cx>>,
}

impl KTheoryInstance {
    pub fn new(n: usize, frame: QFrame, kappa: Vec<Cx>, a: Vec<Cx>, p: Vec<Vec<Cx>>) -> Result<Self> {
        if kappa.len() != n {
            return Err(Error::invalid(format!("/kappa: expected {n} entries")));
        }
        if p.len() != n {
            return Err(Error::invalid(format!("/p: expected {n} coefficient lists")));
        }
        for (i, k) in kappa.iter().enumerate() {
            if !is_finite(*k) || k.norm() == 0.0 {
                return Err(Error::invalid(format!("/kappa/{i}: must be finite and nonzero")));
            }
        }
        for (i, x) in a.iter().chain(p.iter().flatten()).enumerate() {
            if !is_finite(*x) {
                return Err(Error::invalid(format!("non-finite entry at position {i} of /a or /p")));
            }
        }
        Ok(KTheoryInstance { n, frame, kappa, a, p })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: KTheoryFile = serde_json::from_str(s).map_err(json_error)?;
        let frame = QFrame::new(f.sqrt_q, Default::default(), 16).map_err(|e| Error::invalid(format!("/sqrt_q: {e}")))?;
        KTheoryInstance::new(f.n, frame, f.kappa, f.a, f.p)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(KTheoryFile {
            n: self.n,
            sqrt_q: self.frame.sqrt_q(),
            kappa: self.kappa.clone(),
            a: self.a.clone(),
            p: self.p.clone(),
        })
        .expect("instance serializes")
    }

    /// Instance built from reconstructed sections `𝔮_1..𝔮_N` of a Bethe
    /// problem whose punctures all carry the defining representation.
    pub fn from_sections(prob: &BetheProblem, sections: &[Poly]) -> Result<Self> {
        let (p, _) = extract_p_coeffs(sections)?;
        let kappa = prob.kappa.iter().rev().copied().collect();
        let a = prob.punctures.punctures.iter().map(|s| s.z).collect();
        KTheoryInstance::new(prob.n, prob.frame.clone(), kappa, a, p)
    }

    pub fn sections(&self) -> Vec<Poly> {
        self.p.iter().map(|pa| assemble(pa)).collect()
    }
}

/// `s(z) = Σ_{i=0}^{ρ} (-1)^i p_i z^{ρ-i}` with `p_0 = 1`.
pub fn assemble(p: &[Cx]) -> Poly {
    let rho = p.len();
    let mut c = vec![Cx::new(0.0, 0.0); rho + 1];
    c[rho] = Cx::new(1.0, 0.0);
    for (i, &pi) in p.iter().enumerate() {
        let i = i + 1;
        c[rho - i] = if i % 2 == 0 { pi } else { -pi };
    }
    Poly::new(c)
}

/// Monicize each section and read off `p_{a,i}`; returns the coefficient
/// lists and the removed leading coefficients.
pub fn extract_p_coeffs(sections: &[Poly]) -> Result<(Vec<Vec<Cx>>, Vec<Cx>)> {
    let mut ps = Vec::with_capacity(sections.len());
    let mut scales = Vec::with_capacity(sections.len());
    for s in sections {
        let (m, lead) = s.monicize()?;
        let rho = m.deg();
        ps.push((1..=rho).map(|i| if i % 2 == 0 { m.coeff(rho - i) } else { -m.coeff(rho - i) }).collect());
        scales.push(lead);
    }
    Ok((ps, scales))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KTheoryReport {
    /// Coefficient differences of the monic-normalized sides.
    pub coefficient_residuals: Vec<f64>,
    pub max_coefficient_residual: f64,
    pub sample_residual: f64,
    pub degree: usize,
    pub lead_lhs: Cx,
    pub lead_rhs: Cx,
    pub det_v: Cx,
}

/// Compare `det M(z)`, rows `κ_a^c s_a(q^{(1-N)/2+c} z)`, with
/// `det V(κ) · Π(z) Π(qz) ⋯ Π(q^{N-2} z)` shifted by `q^{(1-N)/2}`, where
/// `Π = Π_s (z - a_s)`. Both sides are made monic before comparison; their
/// leading coefficients are reported separately.
pub fn ktheory_relation(inst: &KTheoryInstance, sample_points: Option<&[Cx]>) -> Result<KTheoryReport> {
    let n = inst.n;
    let f = &inst.frame;
    let l = inst.a.len();
    let s = inst.sections();
    let total: usize = s.iter().map(|p| p.deg()).sum();
    if total != (n - 1) * l {
        return Err(Error::BadDegrees(format!("Σρ_a = {total}, expected (N-1)L = {}", (n - 1) * l)));
    }
    let conv = ShiftConvention::Symmetric;
    let m: Vec<Vec<Poly>> = s
        .iter()
        .zip(&inst.kappa)
        .map(|(sa, &k)| (0..n).map(|c| f.shift(sa, conv.halfsteps(c, n)).scale(k.powu(c as u32))).collect())
        .collect();
    let lhs = poly_det(&m)?.trim(1e3 * f.tol.trim);
    let pi = Poly::from_roots(&inst.a);
    let shifted: Vec<Poly> = (0..n.saturating_sub(1)).map(|i| f.shift(&pi, 2 * i as i32)).collect();
    let det_v = vandermonde_det(&inst.kappa);
    let rhs = f.shift(&product(&shifted), 1 - n as i32).scale(det_v);
    if lhs.deg() != rhs.deg() {
        return Err(Error::BadDegrees(format!("deg det M = {}, expected {}", lhs.deg(), rhs.deg())));
    }
    let (ln, lead_lhs) = lhs.monicize()?;
    let (rn, lead_rhs) = rhs.monicize()?;
    let coefficient_residuals: Vec<f64> = (0..=rn.deg()).map(|i| (ln.coeff(i) - rn.coeff(i)).norm()).collect();
    let max_coefficient_residual = coefficient_residuals.iter().copied().fold(0.0, f64::max);
    let default_points: Vec<Cx>;
    let pts = match sample_points {
        Some(p) => p,
        None => {
            let count = (l + 3).max(8);
            default_points = (0..count)
                .map(|j| Cx::from_polar(1.3, 0.37 + std::f64::consts::TAU * j as f64 / count as f64))
                .collect();
            &default_points
        }
    };
    let sample_residual = pts
        .iter()
        .map(|&z| {
            let (a, b) = (ln.eval(z), rn.eval(z));
            (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
        })
        .fold(0.0, f64::max);
    Ok(KTheoryReport {
        coefficient_residuals,
        max_coefficient_residual,
        sample_residual,
        degree: rn.deg(),
        lead_lhs,
        lead_rhs,
        det_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::cr;

    #[test]
    fn p_coefficients_follow_sign_convention() {
        let (p, _) = extract_p_coeffs(&[Poly::from_real(&[2.0, -3.0, 1.0])]).unwrap();
        assert_eq!(p[0], vec![cr(3.0), cr(2.0)]);
        assert_eq!(assemble(&p[0]), Poly::from_real(&[2.0, -3.0, 1.0]));
        let (p, _) = extract_p_coeffs(&[Poly::linear(cr(0.7))]).unwrap();
        assert_eq!(p[0], vec![cr(0.7)]);
    }

    #[test]
    fn zero_momenta_collapse_product() {
        let inst = TRSInstance { q: cr(3.0), zeta: cr(2.0), z_plus: cr(1.0), z_minus: cr(2.0), p_plus: cr(0.0), p_minus: cr(0.0) };
        let r = trs_relations(&inst).unwrap();
        assert_eq!(r.implied_product, cr(0.0));
    }

    #[test]
    fn degenerate_twist() {
        let inst = TRSInstance { q: cr(3.0), zeta: cr(-1.0), z_plus: cr(1.0), z_minus: cr(2.0), p_plus: cr(0.0), p_minus: cr(0.0) };
        assert!(matches!(trs_relations(&inst), Err(Error::DegenerateTwist(_))));
    }
}
