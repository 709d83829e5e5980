//! Quantum Wronskian determinants and their factorization.
//!
//! For sections `s_1, ..., s_N` and twists `ζ_1, ..., ζ_N`, the matrix
//! `M_{i_1..i_j}` has row `i` equal to `ζ_i^c s_i^{(shift_c)}` for
//! `c = 0..j-1`. With the one-sided convention `shift_c = c`; with the
//! symmetric one `shift_c = (1-j)/2 + c`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{roots_seeded, Cx, Poly, QFrame};
use crate::structpoly::PunctureData;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistData {
    pub zeta: Vec<Cx>,
}

impl TwistData {
    /// Twists `ζ_1..ζ_N`; requires `Π ζ = 1` and pairwise distinct entries.
    pub fn new(zeta: Vec<Cx>, frame: &QFrame) -> Result<Self> {
        let prod: Cx = zeta.iter().product();
        if (prod - 1.0).norm() > frame.tol.rel_identity.max(1e-10) * 10.0 {
            return Err(Error::invalid(format!("twist product is {prod}, expected 1")));
        }
        for a in 0..zeta.len() {
            if zeta[a].norm() == 0.0 {
                return Err(Error::invalid("twists must be nonzero"));
            }
            for b in a + 1..zeta.len() {
                if (zeta[a] - zeta[b]).norm() <= frame.tol.rel_identity * zeta[a].norm() {
                    return Err(Error::DegenerateTwist(format!("ζ_{} = ζ_{}", a + 1, b + 1)));
                }
            }
        }
        Ok(TwistData { zeta })
    }

    /// Twists read off the Bethe-side parameters: `ζ_k = κ_{N+1-k}`.
    pub fn from_kappa(kappa: &[Cx], frame: &QFrame) -> Result<Self> {
        TwistData::new(kappa.iter().rev().copied().collect(), frame)
    }

    pub fn rank(&self) -> usize {
        self.zeta.len()
    }

    /// True when no ratio `ζ_a/ζ_b` is an integer power of `q`.
    pub fn lattice_disjoint(&self, frame: &QFrame) -> Result<bool> {
        for a in 0..self.zeta.len() {
            for b in a + 1..self.zeta.len() {
                if frame.lattice_related(self.zeta[a], self.zeta[b])?.is_some() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionData {
    pub s: Vec<Poly>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftConvention {
    OneSided,
    Symmetric,
}

impl ShiftConvention {
    /// Half-step shift of column `c` in a `j`-column matrix.
    pub fn halfsteps(self, c: usize, j: usize) -> i32 {
        match self {
            ShiftConvention::OneSided => 2 * c as i32,
            ShiftConvention::Symmetric => 1 - j as i32 + 2 * c as i32,
        }
    }
}

/// Determinant of a square matrix of polynomials. Plain cofactor expansion
/// up to size 4, expansion with shared minors above.
pub fn poly_det(m: &[Vec<Poly>]) -> Result<Poly> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::BadShape(format!("matrix with {n} rows is not square")));
    }
    if n <= 4 {
        Ok(cofactor_det(m))
    } else {
        subset_det(m)
    }
}

fn cofactor_det(m: &[Vec<Poly>]) -> Poly {
    match m.len() {
        0 => Poly::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        n => {
            let mut acc = Poly::zero();
            for c in 0..n {
                if m[0][c].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = &m[0][c] * &cofactor_det(&minor);
                acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Laplace expansion along rows, bottom up, sharing every minor between
/// branches: `det(rows i.., cols S) = Σ_{c∈S} ±m[i][c] det(rows i+1.., S∖c)`.
/// Division free, so no polynomial long division enters the result.
fn subset_det(m: &[Vec<Poly>]) -> Result<Poly> {
    let n = m.len();
    if n > 20 {
        return Err(Error::BadShape(format!("determinant of size {n} is out of range")));
    }
    let mut minors: Vec<Option<Poly>> = vec![None; 1 << n];
    minors[0] = Some(Poly::one());
    let mut level: Vec<usize> = vec![0];
    for i in (0..n).rev() {
        let mut next = Vec::new();
        for &mask in &level {
            for c in 0..n {
                let bit = 1 << c;
                if mask & bit != 0 || minors[mask | bit].is_some() {
                    continue;
                }
                let full = mask | bit;
                let mut acc = Poly::zero();
                for (pos, cc) in (0..n).filter(|cc| full & (1 << cc) != 0).enumerate() {
                    if m[i][cc].is_zero() {
                        continue;
                    }
                    let sub = minors[full & !(1 << cc)].as_ref().expect("smaller minors come first");
                    let term = &m[i][cc] * sub;
                    acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                minors[full] = Some(acc);
                next.push(full);
            }
        }
        level = next;
    }
    Ok(minors[(1 << n) - 1].take().unwrap_or_else(Poly::zero))
}

/// `Π_{i<j} (γ_j - γ_i)`.
pub fn vandermonde_det(gammas: &[Cx]) -> Cx {
    let mut v = Cx::new(1.0, 0.0);
    for j in 0..gammas.len() {
        for i in 0..j {
            v *= gammas[j] - gammas[i];
        }
    }
    v
}

/// The matrix `M_{indices}` (1-based row labels).
pub fn m_matrix(
    indices: &[usize],
    sections: &SectionData,
    twists: &TwistData,
    frame: &QFrame,
    convention: ShiftConvention,
) -> Result<Vec<Vec<Poly>>> {
    let n = sections.s.len();
    if twists.rank() != n {
        return Err(Error::BadShape(format!("{n} sections but {} twists", twists.rank())));
    }
    for (a, &i) in indices.iter().enumerate() {
        if i == 0 || i > n {
            return Err(Error::BadIndices(format!("row {i} outside 1..={n}")));
        }
        if indices[..a].contains(&i) {
            return Err(Error::BadIndices(format!("row {i} repeated")));
        }
    }
    let j = indices.len();
    Ok(indices
        .iter()
        .map(|&i| {
            let zeta = twists.zeta[i - 1];
            (0..j)
                .map(|c| frame.shift(&sections.s[i - 1], convention.halfsteps(c, j)).scale(zeta.powu(c as u32)))
                .collect()
        })
        .collect())
}

pub fn m_det(
    indices: &[usize],
    sections: &SectionData,
    twists: &TwistData,
    frame: &QFrame,
    convention: ShiftConvention,
) -> Result<Poly> {
    poly_det(&m_matrix(indices, sections, twists, frame, convention)?)
}

/// `D_k = α_k W_k V_k` with `V_k` monic; `bethe_zeros` are the roots of `V_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DFactorization {
    pub alpha: Cx,
    #[serde(rename = "V")]
    pub v: Poly,
    pub bethe_zeros: Vec<Cx>,
    #[serde(skip)]
    pub d: Poly,
    #[serde(skip)]
    pub remainder: f64,
}

/// Factor the one-sided determinant of the last `k` rows as
/// `α_k W_k V_k`.
pub fn d_factorize(
    k: usize,
    sections: &SectionData,
    twists: &TwistData,
    structure: &PunctureData,
    frame: &QFrame,
) -> Result<DFactorization> {
    let n = sections.s.len();
    if k > n {
        return Err(Error::BadIndices(format!("k = {k} exceeds rank {n}")));
    }
    if k == 0 {
        return Ok(DFactorization {
            alpha: Cx::new(1.0, 0.0),
            v: Poly::one(),
            bethe_zeros: Vec::new(),
            d: Poly::one(),
            remainder: 0.0,
        });
    }
    let rows: Vec<usize> = (n - k + 1..=n).collect();
    let d = m_det(&rows, sections, twists, frame, ShiftConvention::OneSided)?.trim(frame.tol.trim);
    if d.is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    let (w_roots, w_lead) = structure.w_roots(k, frame);
    let mut quot = d.clone();
    let mut remainder = 0.0f64;
    for r in &w_roots {
        let scale = quot.max_abs_coeff() * (1.0 + r.norm()).powi(quot.deg() as i32);
        let (q2, rem) = quot.div_linear(*r);
        remainder = remainder.max(rem.norm() / scale.max(f64::MIN_POSITIVE));
        quot = q2;
    }
    let tol = frame.tol.rel_identity.max(1e-7);
    if remainder > tol {
        return Err(Error::NotDivisible { what: format!("D_{k} by W_{k}"), remainder });
    }
    let quot = quot.trim(frame.tol.trim);
    let (v, lead) = quot.monicize()?;
    let bethe_zeros = if v.deg() > 0 { roots_seeded(&v, &frame.tol, k as u64)? } else { Vec::new() };
    Ok(DFactorization { alpha: lead / w_lead, v, bethe_zeros, d, remainder })
}

/// The three products in the Desnanot–Jacobi identity
/// `det M^1_1 det M^2_n - det M^1_n det M^2_1 = det M^{12}_{1n} det M`,
/// where `M^i_j` drops row `i` and column `j`.
fn desnanot_jacobi_terms(m: &[Vec<Poly>]) -> Result<[Poly; 3]> {
    let n = m.len();
    if n < 3 || m.iter().any(|r| r.len() != n) {
        return Err(Error::BadShape(format!("need a square matrix of size at least 3, got {n}")));
    }
    let minor = |rows: &[usize], cols: &[usize]| -> Result<Poly> {
        let sub: Vec<Vec<Poly>> = (0..n)
            .filter(|i| !rows.contains(i))
            .map(|i| (0..n).filter(|j| !cols.contains(j)).map(|j| m[i][j].clone()).collect())
            .collect();
        poly_det(&sub)
    };
    let last = n - 1;
    Ok([
        minor(&[0], &[0])? * minor(&[1], &[last])?,
        minor(&[0], &[last])? * minor(&[1], &[0])?,
        minor(&[0, 1], &[0, last])? * poly_det(m)?,
    ])
}

/// Left and right sides of the Desnanot–Jacobi identity.
pub fn desnanot_jacobi_sides(m: &[Vec<Poly>]) -> Result<(Poly, Poly)> {
    let [a, b, r] = desnanot_jacobi_terms(m)?;
    Ok((a - b, r))
}

/// Relative deviation in the Desnanot–Jacobi identity, sampled at ten
/// points drawn from `seed` and scaled by the largest of the three products.
pub fn desnanot_jacobi_check(m: &[Vec<Poly>], seed: u64) -> Result<f64> {
    let [a, b, r] = desnanot_jacobi_terms(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let z = Cx::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let (x, y, w) = (a.eval(z), b.eval(z), r.eval(z));
        let scale = x.norm().max(y.norm()).max(w.norm());
        if scale > 0.0 {
            worst = worst.max((x - y - w).norm() / scale);
        }
    }
    Ok(worst)
}
