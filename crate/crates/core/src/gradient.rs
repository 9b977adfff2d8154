//! The complex gradient `Z` of a potential and its extension across the
//! degenerate set.
//!
//! `Z = Σ Z^μ ∂/∂z^μ` solves `Σ_μ Z^μ ρ_{μν̄} = ρ_ν̄` for every `ν`, i.e.
//! `Hᵀ Z = conj(∇ρ)`. On the strictly plurisubharmonic stratum the system is
//! uniquely solvable; elsewhere the minimum-norm least-squares solution is
//! used and checked for consistency.
//!
//! Real fields are realized as flows in complex coordinates:
//!
//! | field | definition        | flow          | effect on ρ           |
//! |-------|-------------------|---------------|-----------------------|
//! | X     | `½(Z + Z̄)`        | `ż = Z/2`     | `X(ρ) = ρ` when MA    |
//! | Y     | `(i/2)(Z − Z̄)`    | `ż = (i/2)Z`  | `Y(ρ) = 0`            |
//! | Θ     | `i(Z − Z̄)`        | `ż = iZ`      | tangent to level sets |
//!
//! With these, `t + is ↦ φ_X(t, φ_Y(s, p))` is holomorphic with derivative
//! `Z/2`, and `ρ` grows like `e^t` along X.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrate::{integrate, Integrator};
use crate::levi::{numerical_rank, JetValue, LeviJet, Stratum, DEFAULT_TOL_RANK};
use crate::linalg::{self, CVector};
use crate::potential::{CPoint, PolyPotential, C64};
use crate::registry::{Registry, Strategy};
use crate::sampling::RHO_FLOOR;

/// Default relative threshold on `‖Hᵀ Z − ρ_·̄‖` above which a least-squares
/// solution is flagged inconsistent.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-8;

pub const DEFAULT_GRADIENT_SOLVER: &str = "extended";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMethod {
    DirectSolve,
    LeastSquaresExtension,
}

impl GradientMethod {
    pub fn label(self) -> &'static str {
        match self {
            GradientMethod::DirectSolve => "direct-solve",
            GradientMethod::LeastSquaresExtension => "least-squares-extension",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradientSample {
    pub point: CPoint,
    /// Components `Z^μ`.
    pub z: Vec<C64>,
    pub method: GradientMethod,
    /// `|Σ Z^μ ρ_μ − ρ|`
    pub euler_residual: f64,
    /// `‖Hᵀ Z − ρ_·̄‖`
    pub system_residual: f64,
    pub consistent: bool,
    pub rho: f64,
    pub rank: usize,
    pub stratum: Stratum,
}

impl GradientSample {
    /// Recomputes the Euler residual from the stored components.
    pub fn recompute_euler_residual(&self, jet: &LeviJet) -> Result<f64> {
        let jv = jet.eval(&self.point)?;
        Ok(euler_residual(&jv, &self.z))
    }
}

fn euler_residual(jv: &JetValue, z: &[C64]) -> f64 {
    let zrho: C64 = z.iter().zip(jv.grad.iter()).map(|(a, b)| a * b).sum();
    (zrho - C64::new(jv.rho, 0.0)).norm()
}

pub trait GradientSolver: Strategy {
    /// Solves `Hᵀ Z = conj(∇ρ)` given the numerical rank of `H`.
    fn solve(&self, jet: &JetValue, rank: usize) -> Result<(Vec<C64>, GradientMethod)>;
}

fn direct(jet: &JetValue, rank: usize) -> Result<Vec<C64>> {
    let n = jet.hessian.nrows();
    if rank < n {
        return Err(Error::SingularHessian { rank, dim: n });
    }
    linalg::lu_solve(&jet.hessian.transpose(), &jet.grad_bar())
        .map(|v| v.iter().copied().collect())
        .ok_or(Error::SingularHessian { rank, dim: n })
}

fn least_squares(jet: &JetValue) -> Vec<C64> {
    linalg::min_norm_solve(&jet.hessian.transpose(), &jet.grad_bar())
        .iter()
        .copied()
        .collect()
}

/// LU solve; fails off the strictly plurisubharmonic stratum.
#[derive(Clone, Copy, Debug, Default)]
pub struct DirectSolver;

impl Strategy for DirectSolver {
    fn name(&self) -> &'static str {
        "direct"
    }
    fn description(&self) -> &'static str {
        "LU solve of the defining system; errors where the Levi matrix is singular"
    }
}

impl GradientSolver for DirectSolver {
    fn solve(&self, jet: &JetValue, rank: usize) -> Result<(Vec<C64>, GradientMethod)> {
        Ok((direct(jet, rank)?, GradientMethod::DirectSolve))
    }
}

/// Minimum-norm least squares everywhere.
#[derive(Clone, Copy, Debug, Default)]
pub struct LeastSquaresSolver;

impl Strategy for LeastSquaresSolver {
    fn name(&self) -> &'static str {
        "lsq"
    }
    fn description(&self) -> &'static str {
        "minimum-norm least-squares solve (SVD) at every point"
    }
}

impl GradientSolver for LeastSquaresSolver {
    fn solve(&self, jet: &JetValue, _rank: usize) -> Result<(Vec<C64>, GradientMethod)> {
        Ok((least_squares(jet), GradientMethod::LeastSquaresExtension))
    }
}

/// Direct solve on full rank, least squares elsewhere.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtendedSolver;

impl Strategy for ExtendedSolver {
    fn name(&self) -> &'static str {
        "extended"
    }
    fn description(&self) -> &'static str {
        "direct solve on the strictly psh stratum, minimum-norm least squares on degenerate points"
    }
}

impl GradientSolver for ExtendedSolver {
    fn solve(&self, jet: &JetValue, rank: usize) -> Result<(Vec<C64>, GradientMethod)> {
        if rank == jet.hessian.nrows() {
            if let Ok(z) = direct(jet, rank) {
                return Ok((z, GradientMethod::DirectSolve));
            }
        }
        Ok((least_squares(jet), GradientMethod::LeastSquaresExtension))
    }
}

pub fn gradient_solvers() -> Registry<dyn GradientSolver> {
    let mut reg: Registry<dyn GradientSolver> = Registry::new("gradient solver");
    reg.register(Arc::new(DirectSolver))
        .register(Arc::new(LeastSquaresSolver))
        .register(Arc::new(ExtendedSolver));
    reg
}

/// Real fields derived from `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealFieldKind {
    X,
    Y,
    Theta,
}

impl RealFieldKind {
    /// Factor `a` with `ż = a·Z` for the flow of this field.
    pub fn flow_factor(self) -> C64 {
        match self {
            RealFieldKind::X => C64::new(0.5, 0.0),
            RealFieldKind::Y => C64::new(0.0, 0.5),
            RealFieldKind::Theta => C64::new(0.0, 1.0),
        }
    }
}

/// Complex gradient of a fixed potential, evaluated with a chosen solver.
#[derive(Clone)]
pub struct GradientField {
    jet: LeviJet,
    solver: Arc<dyn GradientSolver>,
    tol_rank: f64,
    tol_consistency: f64,
}

impl GradientField {
    pub fn new(p: &PolyPotential, solver: Arc<dyn GradientSolver>) -> Self {
        Self {
            jet: LeviJet::new(p),
            solver,
            tol_rank: DEFAULT_TOL_RANK,
            tol_consistency: DEFAULT_CONSISTENCY_TOL,
        }
    }

    /// Extended gradient: direct solve on `P`, least squares elsewhere.
    pub fn extended(p: &PolyPotential) -> Self {
        Self::new(p, Arc::new(ExtendedSolver))
    }

    pub fn with_tol_rank(mut self, tol_rank: f64) -> Self {
        self.tol_rank = tol_rank;
        self
    }

    pub fn with_consistency_tol(mut self, tol: f64) -> Self {
        self.tol_consistency = tol;
        self
    }

    pub fn jet(&self) -> &LeviJet {
        &self.jet
    }

    pub fn tol_rank(&self) -> f64 {
        self.tol_rank
    }

    pub fn solver_name(&self) -> &'static str {
        self.solver.name()
    }

    pub fn sample(&self, z: &CPoint) -> Result<GradientSample> {
        let jv = self.jet.eval(z)?;
        if jv.rho <= 0.0 {
            return Err(Error::OutsideDomain { rho: jv.rho });
        }
        let n = self.jet.dim();
        let rank = numerical_rank(&linalg::hermitian_eigenvalues(&jv.hessian), self.tol_rank);
        let (zc, method) = self.solver.solve(&jv, rank)?;
        let zv = CVector::from_column_slice(&zc);
        let rhs = jv.grad_bar();
        let system_residual = (jv.hessian.transpose() * &zv - &rhs).norm();
        Ok(GradientSample {
            point: z.clone(),
            euler_residual: euler_residual(&jv, &zc),
            consistent: system_residual <= self.tol_consistency * rhs.norm().max(1.0),
            system_residual,
            z: zc,
            method,
            rho: jv.rho,
            rank,
            stratum: Stratum::from_rank(rank, n),
        })
    }

    /// `Z(z)` alone.
    pub fn components(&self, z: &[C64]) -> Result<Vec<C64>> {
        Ok(self.sample(&CPoint::new(z.to_vec()))?.z)
    }

    /// Right-hand side of the flow of a real field.
    pub fn flow_rhs(&self, kind: RealFieldKind) -> impl Fn(&[C64]) -> Result<Vec<C64>> + '_ {
        let a = kind.flow_factor();
        move |z: &[C64]| Ok(self.components(z)?.into_iter().map(|c| c * a).collect())
    }
}

/// Gradient by direct solve; errors off the strictly psh stratum.
pub fn complex_gradient(p: &PolyPotential, z: &CPoint) -> Result<GradientSample> {
    GradientField::new(p, Arc::new(DirectSolver)).sample(z)
}

/// Gradient extended across degenerate points; `tol` is the relative
/// consistency threshold on the achieved system residual.
pub fn extended_gradient(p: &PolyPotential, z: &CPoint, tol: f64) -> Result<GradientSample> {
    GradientField::extended(p).with_consistency_tol(tol).sample(z)
}

/// Largest Euler residual `|Z(ρ) − ρ|` over the samples.
pub fn euler_residual_scan(field: &GradientField, samples: &[CPoint]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    samples
        .iter()
        .map(|z| field.sample(z).map(|s| s.euler_residual))
        .try_fold(0.0_f64, |m, r| r.map(|r| m.max(r)))
}

#[derive(Clone, Debug)]
pub struct CrReport {
    /// Largest `|∂Z^μ/∂z̄^ν|` estimate.
    pub max: f64,
    pub argmax: usize,
    /// Samples whose stencil touches a stratum other than the center's.
    pub straddling: Vec<usize>,
}

/// Central finite-difference estimate of `max |∂Z^μ/∂z̄^ν|` over samples.
pub fn cr_residual(field: &GradientField, samples: &[CPoint], h: f64) -> Result<CrReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = field.jet().dim();
    let mut report = CrReport {
        max: 0.0,
        argmax: 0,
        straddling: Vec::new(),
    };
    for (index, z) in samples.iter().enumerate() {
        let center = field.jet().levi_data(z, field.tol_rank())?.stratum;
        let mut straddles = false;
        let mut eval = |nu: usize, d: C64| -> Result<GradientSample> {
            let mut c = z.coords().to_vec();
            c[nu] += d;
            let pt = CPoint::new(c);
            if field.jet().rho(&pt)? <= RHO_FLOOR {
                return Err(Error::StencilOutside { index });
            }
            let s = field.sample(&pt)?;
            straddles |= s.stratum != center;
            Ok(s)
        };
        for nu in 0..n {
            let xp = eval(nu, C64::new(h, 0.0))?;
            let xm = eval(nu, C64::new(-h, 0.0))?;
            let yp = eval(nu, C64::new(0.0, h))?;
            let ym = eval(nu, C64::new(0.0, -h))?;
            for mu in 0..n {
                let dx = (xp.z[mu] - xm.z[mu]) / (2.0 * h);
                let dy = (yp.z[mu] - ym.z[mu]) / (2.0 * h);
                let dzbar = (dx + C64::new(0.0, 1.0) * dy) * 0.5;
                if dzbar.norm() > report.max {
                    report.max = dzbar.norm();
                    report.argmax = index;
                }
            }
        }
        if straddles {
            report.straddling.push(index);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrbitCheck {
    /// The start point is not degenerate.
    Skipped { abs_det: f64 },
    Completed {
        max_abs_det: f64,
        max_rho_deviation: f64,
        steps: usize,
    },
}

/// Integrates the Θ flow `ż = iZ` from a degenerate point and tracks
/// `|det H|` and `|ρ − ρ(z0)|` along the orbit.
pub fn theta_orbit_det_check(
    field: &GradientField,
    integrator: &dyn Integrator,
    z0: &CPoint,
    t_max: f64,
    step: f64,
) -> Result<OrbitCheck> {
    let start = field.jet().levi_data(z0, field.tol_rank())?;
    if start.stratum == Stratum::OutsideDomain {
        return Err(Error::OutsideDomain { rho: start.rho });
    }
    let lmax = start.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if start.det_h.norm() > field.tol_rank() * lmax.max(1.0) {
        return Ok(OrbitCheck::Skipped {
            abs_det: start.det_h.norm(),
        });
    }
    let rho0 = start.rho;
    let mut max_abs_det = start.det_h.norm();
    let mut max_dev: f64 = 0.0;
    let rhs = field.flow_rhs(RealFieldKind::Theta);
    let summary = integrate(integrator, &rhs, z0.coords(), t_max, step, &mut |_, z| {
        let d = field.jet().levi_data(&CPoint::new(z.to_vec()), field.tol_rank())?;
        max_abs_det = max_abs_det.max(d.det_h.norm());
        max_dev = max_dev.max((d.rho - rho0).abs());
        Ok(())
    })?;
    Ok(OrbitCheck::Completed {
        max_abs_det,
        max_rho_deviation: max_dev,
        steps: summary.steps,
    })
}
