//! Per-point Levi-form data for a polynomial potential `ρ`.
//!
//! `dd^c` is realized as the plain matrix of mixed Wirtinger derivatives
//! `H(μ,ν) = ∂²ρ / ∂z^μ ∂z̄^ν` with no `i/2π` or `1/4` factors. The Levi
//! form of `u = log ρ` is then
//!
//! ```text
//! U(μ,ν) = H(μ,ν)/ρ − ρ_μ · conj(ρ_ν)/ρ²
//! ```
//!
//! and `u` solves the homogeneous Monge-Ampère equation at a point exactly
//! when `det U` vanishes there.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::potential::{CPoint, PolyExpr, PolyPotential, PowerTable, C64};

/// Default relative rank tolerance: an eigenvalue counts as zero iff
/// `|λ| ≤ tol · max(1, |λ_max|)`.
pub const DEFAULT_TOL_RANK: f64 = 1e-8;

/// Degeneracy stratum of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    /// Levi matrix of full rank `n`.
    StrictlyPlurisubharmonic,
    /// Rank exactly `n − 1`.
    LowDegeneracy,
    /// Rank at most `n − 2`.
    Weak,
    /// `ρ ≤ 0`.
    OutsideDomain,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [
        Stratum::StrictlyPlurisubharmonic,
        Stratum::LowDegeneracy,
        Stratum::Weak,
        Stratum::OutsideDomain,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Stratum::StrictlyPlurisubharmonic => "P",
            Stratum::LowDegeneracy => "P_n-1",
            Stratum::Weak => "W",
            Stratum::OutsideDomain => "outside",
        }
    }

    pub(crate) fn from_rank(rank: usize, n: usize) -> Self {
        if rank == n {
            Stratum::StrictlyPlurisubharmonic
        } else if rank + 1 == n {
            Stratum::LowDegeneracy
        } else {
            Stratum::Weak
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Number of eigenvalues above the relative tolerance.
pub fn numerical_rank(eigenvalues: &[f64], tol_rank: f64) -> usize {
    let lmax = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let cut = tol_rank * lmax.max(1.0);
    eigenvalues.iter().filter(|l| l.abs() > cut).count()
}

#[derive(Clone, Debug)]
pub struct LeviData {
    pub point: CPoint,
    pub rho: f64,
    /// `ρ_μ`
    pub grad: Vec<C64>,
    /// `ρ_{μν̄}`, Hermitian by construction.
    pub hessian: CMatrix,
    pub det_h: C64,
    /// Eigenvalues of the Levi matrix, ascending.
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    pub stratum: Stratum,
}

/// Values of `ρ`, its gradient and Levi matrix at one point.
#[derive(Clone, Debug)]
pub struct JetValue {
    pub rho: f64,
    pub grad: CVector,
    pub hessian: CMatrix,
}

impl JetValue {
    /// `ρ_ν̄ = conj(ρ_μ)` for real `ρ`.
    pub fn grad_bar(&self) -> CVector {
        self.grad.map(|g| g.conj())
    }

    /// Levi matrix of `log ρ`; requires `ρ > 0`.
    pub fn log_levi(&self) -> CMatrix {
        let rho = C64::new(self.rho, 0.0);
        let g = &self.grad;
        let outer = g * g.adjoint();
        self.hessian.map(|h| h / rho) - outer.map(|o| o / (rho * rho))
    }
}

/// Symbolic first and mixed second derivatives of a potential, computed once
/// and evaluated at many points.
#[derive(Clone, Debug)]
pub struct LeviJet {
    potential: PolyPotential,
    grad: Vec<PolyExpr>,
    // upper triangle, row-major: (μ, ν) with μ ≤ ν
    hess: Vec<PolyExpr>,
    max_exponent: u32,
}

impl LeviJet {
    pub fn new(potential: &PolyPotential) -> Self {
        let n = potential.dim();
        let grad: Vec<PolyExpr> = (0..n).map(|mu| potential.wirtinger_z(mu).unwrap()).collect();
        let mut hess = Vec::with_capacity(n * (n + 1) / 2);
        for (mu, g) in grad.iter().enumerate() {
            for nu in mu..n {
                hess.push(g.wirtinger_zbar(nu).unwrap());
            }
        }
        Self {
            potential: potential.clone(),
            grad,
            hess,
            max_exponent: potential.as_expr().max_exponent(),
        }
    }

    pub fn potential(&self) -> &PolyPotential {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    fn check(&self, z: &CPoint) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        Ok(())
    }

    pub fn rho(&self, z: &CPoint) -> Result<f64> {
        self.check(z)?;
        let powers = PowerTable::new(z.coords(), self.max_exponent);
        Ok(self.potential.as_expr().evaluate_with(&powers).re)
    }

    pub fn eval(&self, z: &CPoint) -> Result<JetValue> {
        self.check(z)?;
        let n = self.dim();
        let powers = PowerTable::new(z.coords(), self.max_exponent);
        let rho = self.potential.as_expr().evaluate_with(&powers).re;
        let grad = CVector::from_iterator(n, self.grad.iter().map(|g| g.evaluate_with(&powers)));
        let mut hessian = CMatrix::zeros(n, n);
        let mut k = 0;
        for mu in 0..n {
            for nu in mu..n {
                let v = self.hess[k].evaluate_with(&powers);
                k += 1;
                if mu == nu {
                    hessian[(mu, mu)] = C64::new(v.re, 0.0);
                } else {
                    hessian[(mu, nu)] = v;
                    hessian[(nu, mu)] = v.conj();
                }
            }
        }
        Ok(JetValue { rho, grad, hessian })
    }

    pub fn levi_data(&self, z: &CPoint, tol_rank: f64) -> Result<LeviData> {
        let jet = self.eval(z)?;
        let eigenvalues = linalg::hermitian_eigenvalues(&jet.hessian);
        let rank = numerical_rank(&eigenvalues, tol_rank);
        let stratum = if jet.rho <= 0.0 {
            Stratum::OutsideDomain
        } else {
            Stratum::from_rank(rank, self.dim())
        };
        Ok(LeviData {
            point: z.clone(),
            rho: jet.rho,
            grad: jet.grad.iter().copied().collect(),
            det_h: linalg::determinant(&jet.hessian),
            hessian: jet.hessian,
            eigenvalues,
            rank,
            stratum,
        })
    }

    pub fn stratum(&self, z: &CPoint, tol_rank: f64) -> Result<Stratum> {
        Ok(self.levi_data(z, tol_rank)?.stratum)
    }

    /// `det U` together with its raw and scaled magnitudes.
    pub fn ma(&self, z: &CPoint) -> Result<MaResidual> {
        let jet = self.eval(z)?;
        if jet.rho <= 0.0 {
            return Err(Error::OutsideDomain { rho: jet.rho });
        }
        Ok(MaResidual::from_jet(&jet))
    }

    /// `|det U|`.
    pub fn ma_residual(&self, z: &CPoint) -> Result<f64> {
        Ok(self.ma(z)?.raw)
    }

    /// `ρ·det H − conj(g)ᵀ adj(H) g`, which equals `ρ^{n+1} det U`.
    pub fn rank_identity_residual(&self, z: &CPoint) -> Result<f64> {
        Ok(rank_identity_from_jet(&self.eval(z)?))
    }

    /// Eigenvalues (ascending) of the Levi form of `log ρ` restricted to
    /// `Ker ∂ρ`, the orthogonal complement of `conj(∇ρ)`.
    pub fn restricted_levi_eigen(&self, z: &CPoint) -> Result<Vec<f64>> {
        let jet = self.eval(z)?;
        if jet.rho <= 0.0 {
            return Err(Error::OutsideDomain { rho: jet.rho });
        }
        let gbar = jet.grad_bar();
        if gbar.norm() <= f64::EPSILON * jet.rho.max(1.0) {
            return Err(Error::ZeroGradient);
        }
        let basis = linalg::orthogonal_complement(&gbar);
        let u = jet.log_levi();
        // L(v, w) = vᵀ U w̄ restricted to the basis
        let restricted = basis.transpose() * u * basis.map(|c| c.conj());
        let restricted = (&restricted + restricted.adjoint()).map(|c| c * 0.5);
        Ok(linalg::hermitian_eigenvalues(&restricted))
    }
}

pub(crate) fn rank_identity_from_jet(jet: &JetValue) -> f64 {
    let adj = linalg::adjugate(&jet.hessian);
    let det = linalg::determinant(&jet.hessian);
    let quad = jet.grad.dotc(&(adj * &jet.grad));
    (det * jet.rho - quad).re
}

/// Monge-Ampère residual of `log ρ` at a point.
#[derive(Clone, Copy, Debug)]
pub struct MaResidual {
    pub det_u: C64,
    /// `|det U|`
    pub raw: f64,
    /// `|det U| / max(1, ‖U‖_F)^n`, comparable across potentials.
    pub scaled: f64,
}

impl MaResidual {
    pub fn from_jet(jet: &JetValue) -> Self {
        let u = jet.log_levi();
        let det_u = linalg::determinant(&u);
        let n = u.nrows() as i32;
        let raw = det_u.norm();
        let scaled = raw / linalg::frobenius_norm(&u).max(1.0).powi(n);
        Self { det_u, raw, scaled }
    }
}

pub fn levi_data(p: &PolyPotential, z: &CPoint, tol_rank: f64) -> Result<LeviData> {
    LeviJet::new(p).levi_data(z, tol_rank)
}

pub fn ma_residual(p: &PolyPotential, z: &CPoint) -> Result<f64> {
    LeviJet::new(p).ma_residual(z)
}

pub fn rank_identity_residual(p: &PolyPotential, z: &CPoint) -> Result<f64> {
    LeviJet::new(p).rank_identity_residual(z)
}

pub fn restricted_levi_eigen(p: &PolyPotential, z: &CPoint) -> Result<Vec<f64>> {
    LeviJet::new(p).restricted_levi_eigen(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::sampling::Sampler;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn potentials() -> Vec<(&'static str, PolyPotential)> {
        vec![
            ("ball2", catalog::ball(2)),
            ("ball3", catalog::ball(3)),
            ("weighted", catalog::weighted_quartic()),
            ("ball_squared", catalog::ball_squared()),
            ("quartic_sum", catalog::quartic_sum()),
            ("non_ma", catalog::non_ma()),
            ("mixed", catalog::mixed_bidegree()),
        ]
    }

    fn ma_potentials() -> Vec<PolyPotential> {
        vec![
            catalog::ball(2),
            catalog::ball(3),
            catalog::weighted_quartic(),
            catalog::ball_squared(),
            catalog::quartic_sum(),
        ]
    }

    #[test]
    fn levi_data_examples() {
        let w = catalog::weighted_quartic();
        let d = levi_data(&w, &CPoint::real(&[1.0, 1.0]), DEFAULT_TOL_RANK).unwrap();
        assert_eq!(d.hessian, CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(4.0)]));
        assert!((d.det_h - c(4.0)).norm() < 1e-14);
        assert_eq!(d.stratum, Stratum::StrictlyPlurisubharmonic);

        let d = levi_data(&w, &CPoint::real(&[1.0, 0.0]), DEFAULT_TOL_RANK).unwrap();
        assert_eq!(d.hessian, CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]));
        assert_eq!(d.det_h.norm(), 0.0);
        assert_eq!(d.stratum, Stratum::LowDegeneracy);

        let bad = catalog::non_ma();
        let d = levi_data(&bad, &CPoint::real(&[1.0, 1.0]), DEFAULT_TOL_RANK).unwrap();
        assert_eq!(d.hessian, CMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(2.0)]));
        assert!((d.det_h - c(3.0)).norm() < 1e-14);
        assert_eq!(d.stratum, Stratum::StrictlyPlurisubharmonic);
        assert_eq!(d.grad, vec![c(2.0), c(2.0)]);
    }

    #[test]
    fn weak_and_outside_strata() {
        // |z1|⁴ + |z2|⁴ at the origin direction (0, 0) is outside; a rank-0
        // point needs n ≥ 2 zero eigenvalues: |z1|⁴+|z2|⁴+|z3|² at (0,0,1).
        let p = PolyPotential::from_terms(
            3,
            [([2, 0, 0], [2, 0, 0], c(1.0)), ([0, 2, 0], [0, 2, 0], c(1.0)), ([0, 0, 1], [0, 0, 1], c(1.0))],
        )
        .unwrap();
        let d = levi_data(&p, &CPoint::real(&[0.0, 0.0, 1.0]), DEFAULT_TOL_RANK).unwrap();
        assert_eq!(d.rank, 1);
        assert_eq!(d.stratum, Stratum::Weak);
        let d = levi_data(&catalog::quartic_sum(), &CPoint::real(&[0.0, 0.0]), DEFAULT_TOL_RANK).unwrap();
        assert_eq!(d.stratum, Stratum::OutsideDomain);
        assert!(matches!(
            ma_residual(&catalog::quartic_sum(), &CPoint::real(&[0.0, 0.0])),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn ma_residual_examples() {
        let ball = catalog::ball(2);
        for z in [CPoint::real(&[1.0, 0.0]), CPoint::from_parts(&[(0.3, -1.2), (0.7, 0.1)])] {
            assert!(ma_residual(&ball, &z).unwrap() < 1e-12);
        }
        assert!(ma_residual(&catalog::weighted_quartic(), &CPoint::real(&[1.0, 1.0])).unwrap() < 1e-10);
        let bad = ma_residual(&catalog::non_ma(), &CPoint::real(&[1.0, 1.0])).unwrap();
        assert!((bad - 1.0 / 27.0).abs() < 1e-12, "{bad}");
    }

    #[test]
    fn rank_identity_examples() {
        let r = rank_identity_residual(&catalog::ball(2), &CPoint::real(&[1.0, 1.0])).unwrap();
        assert!(r.abs() < 1e-14);
        let r = rank_identity_residual(&catalog::non_ma(), &CPoint::real(&[1.0, 1.0])).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn restricted_eigen_examples() {
        let ball = catalog::ball(2);
        let z = CPoint::from_parts(&[(0.4, 0.2), (-0.3, 0.9)]);
        let ev = restricted_levi_eigen(&ball, &z).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0] - 1.0 / ball.evaluate(&z).unwrap()).abs() < 1e-12);

        let w = catalog::weighted_quartic();
        let ev = restricted_levi_eigen(&w, &CPoint::real(&[1.0, 0.0])).unwrap();
        assert!(ev[0].abs() < 1e-14);
        let ev = restricted_levi_eigen(&w, &CPoint::real(&[1.0, 1.0])).unwrap();
        assert!(ev[0] > 1e-3);

        // ρ = |z1|²+|z2|²−... a potential with vanishing gradient at an interior point
        let flat = PolyPotential::from_terms(1, [([0], [0], c(1.0)), ([1], [1], c(1.0))]).unwrap();
        assert!(matches!(restricted_levi_eigen(&flat, &CPoint::real(&[0.0])), Err(Error::ZeroGradient)));
    }

    #[test]
    fn hessian_is_exactly_hermitian() {
        let mut sampler = Sampler::new(11);
        for (_, p) in potentials() {
            let jet = LeviJet::new(&p);
            for z in sampler.uniform_box(p.dim(), 2.0, 50) {
                let h = jet.eval(&z).unwrap().hessian;
                assert_eq!(h, h.adjoint());
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let mut sampler = Sampler::new(2024);
        for (name, p) in potentials() {
            let jet = LeviJet::new(&p);
            for z in sampler.uniform_box(p.dim(), 1.0, 100) {
                let err = crate::oracle::hessian_fd_error(&jet, &z, 1e-3).unwrap();
                assert!(err < 1e-5, "{name} at {z}: {err}");
            }
        }
    }

    #[test]
    fn determinant_lemma_equivalence() {
        let mut sampler = Sampler::new(99);
        for (name, p) in potentials() {
            let jet = LeviJet::new(&p);
            for z in sampler.uniform_box_in_domain(&p, 1.0, 1000) {
                let (lhs, rhs) = crate::oracle::determinant_lemma_sides(&jet, &z).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0),
                    "{name} at {z}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn strata_are_consistent_with_eigenvalues() {
        let mut sampler = Sampler::new(5);
        for p in ma_potentials() {
            let jet = LeviJet::new(&p);
            for z in sampler.uniform_box_in_domain(&p, 1.0, 200) {
                let d = jet.levi_data(&z, DEFAULT_TOL_RANK).unwrap();
                match d.stratum {
                    Stratum::StrictlyPlurisubharmonic => assert!(d.eigenvalues.iter().all(|&l| l > 0.0)),
                    Stratum::Weak => assert!(d.eigenvalues.len() - d.rank >= 2),
                    _ => {}
                }
                assert!(d.det_h.im.abs() < 1e-10 * d.det_h.norm().max(1.0));
            }
        }
    }

    #[test]
    fn ma_examples_vanish_on_samples() {
        let mut sampler = Sampler::new(17);
        for p in ma_potentials() {
            let jet = LeviJet::new(&p);
            for z in sampler.uniform_box_in_domain(&p, 1.0, 500) {
                assert!(jet.ma_residual(&z).unwrap() < 1e-9, "at {z}");
            }
        }
    }
}
