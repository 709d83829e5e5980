use crate::error::{Error, Result};
use crate::polycore::Cx;

fn pole_guard(d: Cx, scale: f64, what: impl FnOnce() -> String) -> Result<Cx> {
    if d.norm() <= 1e-14 * scale.max(1.0) {
        return Err(Error::PoleHit(what()));
    }
    Ok(d.inv())
}

/// `Σ_m k_m/(z_m - w_i) - Σ_{j≠i} 2/(w_j - w_i)` for each `i`.
pub fn classical_sl2_residual(z: &[Cx], k: &[u32], w: &[Cx]) -> Result<Vec<Cx>> {
    if z.len() != k.len() {
        return Err(Error::BadShape("puncture and weight lists differ in length".into()));
    }
    w.iter()
        .enumerate()
        .map(|(i, &wi)| {
            let mut acc = Cx::new(0.0, 0.0);
            for (m, (&zm, &km)) in z.iter().zip(k).enumerate() {
                acc += pole_guard(zm - wi, zm.norm(), || format!("w_{} = z_{}", i + 1, m + 1))? * km as f64;
            }
            for (j, &wj) in w.iter().enumerate() {
                if j != i {
                    acc -= pole_guard(wj - wi, wj.norm(), || format!("w_{} = w_{}", i + 1, j + 1))? * 2.0;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Classical equations with an irregular singularity at infinity:
/// `2a + Σ_m k_m/(z_m - w_i) - Σ_{j≠i} 2/(w_j - w_i)`.
pub fn inhomogeneous_sl2_residual(z: &[Cx], k: &[u32], a: Cx, w: &[Cx]) -> Result<Vec<Cx>> {
    Ok(classical_sl2_residual(z, k, w)?.into_iter().map(|r| r + 2.0 * a).collect())
}

/// Type-A Gaudin equations without twist, oriented like the `SL(2)` form:
/// `Σ_s l_s^k/(z_s - w_{k,a}) - Σ_{b≠a} 2/(w_{k,b} - w_{k,a})
///  + Σ_{c} 1/(w_{k±1,c} - w_{k,a})`.
pub fn classical_sln_residual(n: usize, z: &[Cx], weights: &[Vec<u32>], w: &[Vec<Cx>]) -> Result<Vec<Vec<Cx>>> {
    if z.len() != weights.len() || weights.iter().any(|l| l.len() + 1 != n) || w.len() + 1 != n {
        return Err(Error::BadShape("classical system shape does not match rank".into()));
    }
    let mut out = Vec::with_capacity(n - 1);
    for k in 1..n {
        let mut lvl = Vec::new();
        for (a, &wa) in w[k - 1].iter().enumerate() {
            let mut acc = Cx::new(0.0, 0.0);
            for (s, &zs) in z.iter().enumerate() {
                let l = weights[s][k - 1];
                if l > 0 {
                    acc += pole_guard(zs - wa, zs.norm(), || format!("w_{{{k},{}}} = z_{}", a + 1, s + 1))? * l as f64;
                }
            }
            for (b, &wb) in w[k - 1].iter().enumerate() {
                if b != a {
                    acc -= pole_guard(wb - wa, wb.norm(), || format!("w_{{{k},{}}} = w_{{{k},{}}}", a + 1, b + 1))? * 2.0;
                }
            }
            for kk in [k.wrapping_sub(1), k + 1] {
                if kk >= 1 && kk < n {
                    for &wc in &w[kk - 1] {
                        acc += pole_guard(wc - wa, wc.norm(), || format!("w_{{{k},{}}} on level {kk}", a + 1))?;
                    }
                }
            }
            lvl.push(acc);
        }
        out.push(lvl);
    }
    Ok(out)
}
