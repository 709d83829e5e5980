//! Structure polynomials attached to the regular singularities.
//!
//! For punctures `z_m` with weights `l_m^i` and partial sums
//! `L_m^i = l_m^1 + ... + l_m^i`:
//!
//! * `Λ_i(z) = Π_m Π_{j=L_m^{i-1}}^{L_m^i - 1} (z - q^{-j} z_m)`
//! * `P_i = Λ_1 ⋯ Λ_i`
//! * `W_k = P_1 · P_2(qz) ⋯ P_{k-1}(q^{k-2} z)`
//! * `Π_k(z) = Λ_k(q^{k/2-1} z)`
//! * `F_k(z) = W_k(q^{(1-k)/2} z)`, `F_0 = 1`
//!
//! They satisfy `F_{k-1} F_{k+1} = Π_k F_k(q^{1/2} z) F_k(q^{-1/2} z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{is_finite, product, Cx, Poly, QFrame};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Puncture {
    pub z: Cx,
    /// `l^1, ..., l^{N-1}`.
    pub weights: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PunctureData {
    pub punctures: Vec<Puncture>,
}

impl PunctureData {
    pub fn new(punctures: Vec<Puncture>) -> Self {
        PunctureData { punctures }
    }

    /// Check shape against rank `n` and require nonzero, pairwise
    /// q-lattice-disjoint positions.
    pub fn validate(&self, n: usize, frame: &QFrame) -> Result<()> {
        for (m, p) in self.punctures.iter().enumerate() {
            if p.weights.len() + 1 != n {
                return Err(Error::invalid(format!(
                    "/punctures/{m}/weights: expected {} entries, found {}",
                    n - 1,
                    p.weights.len()
                )));
            }
            if !is_finite(p.z) || p.z.norm() == 0.0 {
                return Err(Error::invalid(format!("/punctures/{m}/z: must be finite and nonzero")));
            }
        }
        for a in 0..self.punctures.len() {
            for b in a + 1..self.punctures.len() {
                if let Some(k) = frame.lattice_related(self.punctures[a].z, self.punctures[b].z)? {
                    return Err(Error::invalid(format!(
                        "/punctures/{b}/z: equals q^{k} times puncture {a}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `L_m^i`; weights past the stored length count as zero.
    pub fn partial_weight(&self, m: usize, i: usize) -> u32 {
        self.punctures[m].weights.iter().take(i).sum()
    }

    /// Total degree `Σ_m L_m^{N-1}`.
    pub fn total_weight(&self) -> u32 {
        self.punctures.iter().map(|p| p.weights.iter().sum::<u32>()).sum()
    }

    pub fn lambda_roots(&self, i: usize, frame: &QFrame) -> Vec<Cx> {
        let mut out = Vec::new();
        if i == 0 {
            return out;
        }
        for (m, p) in self.punctures.iter().enumerate() {
            for j in self.partial_weight(m, i - 1)..self.partial_weight(m, i) {
                out.push(frame.q_pow(-(j as i32)) * p.z);
            }
        }
        out
    }

    pub fn p_roots(&self, i: usize, frame: &QFrame) -> Vec<Cx> {
        let mut out = Vec::new();
        for (m, p) in self.punctures.iter().enumerate() {
            for j in 0..self.partial_weight(m, i) {
                out.push(frame.q_pow(-(j as i32)) * p.z);
            }
        }
        out
    }

    /// Roots of `W_k` together with its leading coefficient.
    pub fn w_roots(&self, k: usize, frame: &QFrame) -> (Vec<Cx>, Cx) {
        let mut roots = Vec::new();
        let mut lead = Cx::new(1.0, 0.0);
        for i in 1..k {
            let s = frame.q_pow(i as i32 - 1);
            let r = self.p_roots(i, frame);
            lead *= s.powu(r.len() as u32);
            roots.extend(r.into_iter().map(|x| x / s));
        }
        (roots, lead)
    }
}

fn check_index(i: usize, min: usize, what: &str) -> Result<()> {
    if i < min {
        return Err(Error::BadIndices(format!("{what} index {i} must be at least {min}")));
    }
    Ok(())
}

pub fn lambda_poly(i: usize, data: &PunctureData, frame: &QFrame) -> Result<Poly> {
    check_index(i, 1, "Λ")?;
    Ok(Poly::from_roots(&data.lambda_roots(i, frame)))
}

pub fn p_poly(i: usize, data: &PunctureData, frame: &QFrame) -> Result<Poly> {
    check_index(i, 1, "P")?;
    Ok(Poly::from_roots(&data.p_roots(i, frame)))
}

pub fn w_poly(k: usize, data: &PunctureData, frame: &QFrame) -> Result<Poly> {
    check_index(k, 1, "W")?;
    let parts: Vec<Poly> = (1..k)
        .map(|i| p_poly(i, data, frame).map(|p| frame.shift(&p, 2 * (i as i32 - 1))))
        .collect::<Result<_>>()?;
    Ok(product(&parts))
}

/// `Π_k(z) = Λ_k(q^{k/2-1} z)`; the leading coefficient is
/// `q^{(k/2-1) deg Λ_k}` and is kept.
pub fn pi_poly(k: usize, data: &PunctureData, frame: &QFrame) -> Result<Poly> {
    check_index(k, 1, "Π")?;
    Ok(frame.shift(&lambda_poly(k, data, frame)?, k as i32 - 2))
}

pub fn f_poly(k: usize, data: &PunctureData, frame: &QFrame) -> Result<Poly> {
    if k == 0 {
        return Ok(Poly::one());
    }
    Ok(frame.shift(&w_poly(k, data, frame)?, 1 - k as i32))
}

/// Largest relative coefficient residual of
/// `F_{k-1} F_{k+1} = Π_k F_k^{(1/2)} F_k^{(-1/2)}` over `k = 1..n-1`.
pub fn check_ffunc(n: usize, data: &PunctureData, frame: &QFrame) -> Result<f64> {
    let f: Vec<Poly> = (0..=n).map(|k| f_poly(k, data, frame)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for k in 1..n {
        let lhs = &f[k - 1] * &f[k + 1];
        let rhs = pi_poly(k, data, frame)? * frame.shift(&f[k], 1) * frame.shift(&f[k], -1);
        worst = worst.max(lhs.rel_distance(&rhs));
    }
    Ok(worst)
}
