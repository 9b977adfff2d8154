//! Independent cross-checks that do not share code paths with the exact
//! derivative machinery: finite differences of `ρ` itself and the
//! determinant lemma relating `det H` to `det U`.

use crate::error::Result;
use crate::levi::{rank_identity_from_jet, LeviJet};
use crate::linalg::{self, CMatrix};
use crate::potential::{CPoint, PolyPotential, C64};

/// Second-order central differences of the real function `ρ` in real
/// coordinates, combined into `∂²ρ/∂z^μ∂z̄^ν`.
pub fn fd_levi_matrix(p: &PolyPotential, z: &CPoint, h: f64) -> Result<CMatrix> {
    let n = p.dim();
    let base: Vec<f64> = z.coords().iter().flat_map(|c| [c.re, c.im]).collect();
    let f = |shifts: &[(usize, f64)]| -> Result<f64> {
        let mut x = base.clone();
        for &(k, d) in shifts {
            x[k] += d;
        }
        p.evaluate(&CPoint::from_parts(&x.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>()))
    };
    let d2 = |a: usize, b: usize| -> Result<f64> {
        Ok((f(&[(a, h), (b, h)])? - f(&[(a, h), (b, -h)])? - f(&[(a, -h), (b, h)])? + f(&[(a, -h), (b, -h)])?)
            / (4.0 * h * h))
    };
    let mut m = CMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in 0..n {
            let (xm, ym, xn, yn) = (2 * mu, 2 * mu + 1, 2 * nu, 2 * nu + 1);
            m[(mu, nu)] = C64::new(d2(xm, xn)? + d2(ym, yn)?, d2(xm, yn)? - d2(ym, xn)?) * 0.25;
        }
    }
    Ok(m)
}

/// `max |H − H_fd| / max(1, max |H|)` at one point.
pub fn hessian_fd_error(jet: &LeviJet, z: &CPoint, h: f64) -> Result<f64> {
    let exact = jet.eval(z)?.hessian;
    let fd = fd_levi_matrix(jet.potential(), z, h)?;
    let scale = exact.iter().map(|c| c.norm()).fold(1.0, f64::max);
    Ok((&exact - &fd).iter().map(|c| c.norm()).fold(0.0, f64::max) / scale)
}

/// `(ρ·det H − conj(g)ᵀ adj(H) g, ρ^{n+1} det U)`; the two agree exactly in
/// exact arithmetic.
pub fn determinant_lemma_sides(jet: &LeviJet, z: &CPoint) -> Result<(f64, f64)> {
    let jv = jet.eval(z)?;
    let n = jet.dim() as i32;
    let lhs = rank_identity_from_jet(&jv);
    let rhs = jv.rho.powi(n + 1) * linalg::determinant(&jv.log_levi()).re;
    Ok((lhs, rhs))
}

/// Relative gap `|lhs − rhs| / max(1, |rhs|)` of the determinant lemma.
pub fn determinant_lemma_gap(jet: &LeviJet, z: &CPoint) -> Result<f64> {
    let (lhs, rhs) = determinant_lemma_sides(jet, z)?;
    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
}
