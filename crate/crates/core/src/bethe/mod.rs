//! Nested XXZ Bethe ansatz equations: residuals, a multi-start Newton
//! solver, nondegeneracy checks, and the rational and classical limits.

mod classical;
mod limits;
mod system;
mod xxz;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{is_finite, Cx, QFrame, ToleranceConfig};
use crate::structpoly::{Puncture, PunctureData};

pub use classical::{classical_sl2_residual, classical_sln_residual, inhomogeneous_sl2_residual};
pub use limits::{
    gaudin_residual, limit_flow, solve_gaudin, solve_xxx, xxx_residual, LimitParams, LimitReport,
    WeightConvention,
};
pub use system::JacobianMode;
pub use xxz::{
    nondegenerate_check, sl2_q_residual, solve_newton, solve_newton_with, xxz_residual,
    xxz_residual_tq, NondegeneracyReport, SolverOptions,
};

/// A Bethe problem for `SL(N)`: twists `κ_1..κ_N`, punctures with weights,
/// and root counts `r_1..r_{N-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheProblem {
    pub n: usize,
    pub frame: QFrame,
    pub kappa: Vec<Cx>,
    pub punctures: PunctureData,
    pub r: Vec<usize>,
}

/// Roots `u_{k,a}`, one vector per level `k = 1..N-1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BetheRoots {
    pub u: Vec<Vec<Cx>>,
}

impl BetheRoots {
    pub fn flatten(&self) -> Vec<Cx> {
        self.u.iter().flatten().copied().collect()
    }

    pub(crate) fn from_flat(x: &[Cx], r: &[usize]) -> Self {
        let mut u = Vec::with_capacity(r.len());
        let mut off = 0;
        for &rk in r {
            u.push(x[off..off + rk].to_vec());
            off += rk;
        }
        BetheRoots { u }
    }

    /// Sort each level lexicographically by real then imaginary part.
    pub fn canonicalize(&mut self) {
        for level in &mut self.u {
            level.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        }
    }
}

/// Residuals per level with the largest modulus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residuals: Vec<Vec<Cx>>,
    pub max_abs: f64,
    pub converged: bool,
}

impl ResidualReport {
    pub(crate) fn new(residuals: Vec<Vec<Cx>>, tol: f64) -> Self {
        let max_abs = residuals.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        ResidualReport { residuals, max_abs, converged: max_abs <= tol }
    }
}

/// Output record of `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub u: Vec<Vec<Cx>>,
    pub residual_max: f64,
    pub converged: bool,
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    #[serde(rename = "N")]
    n: usize,
    sqrt_q: Cx,
    kappa: Vec<Cx>,
    punctures: Vec<Puncture>,
    r: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<ToleranceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window: Option<i32>,
}

impl BetheProblem {
    pub fn builder(n: usize, sqrt_q: Cx) -> BetheProblemBuilder {
        BetheProblemBuilder { n, sqrt_q, kappa: Vec::new(), punctures: Vec::new(), r: Vec::new(), tol: None, window: None }
    }

    pub fn q(&self) -> Cx {
        self.frame.q()
    }

    /// `κ_k` with 1-based `k`.
    pub fn kappa(&self, k: usize) -> Cx {
        self.kappa[k - 1]
    }

    pub fn root_count(&self) -> usize {
        self.r.iter().sum()
    }

    pub fn default_window(punctures: &PunctureData, r: &[usize]) -> i32 {
        (punctures.total_weight() as usize + r.iter().sum::<usize>() + 4) as i32
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(s).map_err(json_error)?;
        let mut b = BetheProblem::builder(file.n, file.sqrt_q).kappa(file.kappa).roots(file.r);
        b.punctures = file.punctures;
        b.tol = file.tol;
        b.window = file.window;
        b.build()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let file = ProblemFile {
            n: self.n,
            sqrt_q: self.frame.sqrt_q(),
            kappa: self.kappa.clone(),
            punctures: self.punctures.punctures.clone(),
            r: self.r.clone(),
            tol: (self.frame.tol != ToleranceConfig::default()).then_some(self.frame.tol),
            window: None,
        };
        serde_json::to_value(file).expect("problem serializes")
    }

    /// Same problem with a different frame tolerance set.
    pub fn with_tolerances(&self, tol: ToleranceConfig) -> Result<Self> {
        let frame = QFrame::new(self.frame.sqrt_q(), tol, self.frame.lattice_window)?;
        Ok(BetheProblem { frame, ..self.clone() })
    }
}

/// Map a serde error to a message that names the offending JSON pointer when
/// one can be read off.
pub(crate) fn json_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let pointer = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.starts_with("missing field") || msg.starts_with("unknown field"))
        .map(|f| format!("/{f}"))
        .unwrap_or_default();
    Error::invalid(format!("{pointer}: {msg}"))
}

pub struct BetheProblemBuilder {
    n: usize,
    sqrt_q: Cx,
    kappa: Vec<Cx>,
    punctures: Vec<Puncture>,
    r: Vec<usize>,
    tol: Option<ToleranceConfig>,
    window: Option<i32>,
}

impl BetheProblemBuilder {
    pub fn kappa(mut self, kappa: Vec<Cx>) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn puncture(mut self, z: Cx, weights: Vec<u32>) -> Self {
        self.punctures.push(Puncture { z, weights });
        self
    }

    pub fn roots(mut self, r: Vec<usize>) -> Self {
        self.r = r;
        self
    }

    pub fn tol(mut self, tol: ToleranceConfig) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn window(mut self, w: i32) -> Self {
        self.window = Some(w);
        self
    }

    pub fn build(self) -> Result<BetheProblem> {
        let n = self.n;
        if n < 2 {
            return Err(Error::invalid("/N: rank must be at least 2"));
        }
        if self.kappa.len() != n {
            return Err(Error::invalid(format!("/kappa: expected {n} entries, found {}", self.kappa.len())));
        }
        if self.r.len() != n - 1 {
            return Err(Error::invalid(format!("/r: expected {} entries, found {}", n - 1, self.r.len())));
        }
        for (i, k) in self.kappa.iter().enumerate() {
            if !is_finite(*k) || k.norm() == 0.0 {
                return Err(Error::invalid(format!("/kappa/{i}: must be finite and nonzero")));
            }
        }
        let prod: Cx = self.kappa.iter().product();
        if (prod - 1.0).norm() > 1e-9 {
            return Err(Error::invalid(format!("/kappa: product is {prod}, expected 1")));
        }
        let punctures = PunctureData::new(self.punctures);
        let window = self.window.unwrap_or_else(|| BetheProblem::default_window(&punctures, &self.r));
        let frame = QFrame::new(self.sqrt_q, self.tol.unwrap_or_default(), window)
            .map_err(|e| Error::invalid(format!("/sqrt_q: {e}")))?;
        punctures.validate(n, &frame)?;
        for a in 0..n {
            for b in a + 1..n {
                if (self.kappa[a] - self.kappa[b]).norm() <= 1e-12 * self.kappa[a].norm() {
                    return Err(Error::invalid(format!("/kappa/{b}: twists must be distinct")));
                }
            }
        }
        Ok(BetheProblem { n, frame, kappa: self.kappa, punctures, r: self.r })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::cr;

    #[test]
    fn json_roundtrip() {
        let p = BetheProblem::builder(2, cr(2.0))
            .kappa(vec![cr(1.0 / 3.0), cr(3.0)])
            .puncture(cr(1.0), vec![1])
            .roots(vec![1])
            .build()
            .unwrap();
        let v = p.to_json_value();
        assert_eq!(v["N"], 2);
        let back = BetheProblem::from_json_str(&v.to_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_errors_name_fields() {
        let e = BetheProblem::from_json_str(r#"{"N":2,"sqrt_q":[2,0],"punctures":[],"r":[1]}"#).unwrap_err();
        assert!(e.to_string().contains("/kappa"), "{e}");
        let e = BetheProblem::from_json_str(
            r#"{"N":2,"sqrt_q":[2,0],"kappa":[[1,0]],"punctures":[],"r":[1]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("/kappa"), "{e}");
    }
}
