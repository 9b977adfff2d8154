//! Bidegree checks for homogeneous polynomial potentials.
//!
//! A positive homogeneous polynomial of degree `2k` whose logarithm is
//! plurisubharmonic and solves the homogeneous Monge-Ampère equation has only
//! bidegree `(k, k)` terms, and its complex gradient is `Z = w/k`. The check
//! gathers the evidence gate by gate and never upgrades a missing
//! counterexample on the grid to a pass.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::homogeneity::{weight_equations, WeightVector};
use crate::levi::{LeviJet, MaResidual, Stratum, DEFAULT_TOL_RANK};
use crate::linalg;
use crate::potential::{CPoint, PolyExpr, PolyPotential, PowerTable, C64};
use crate::sampling::{tensor_grid, RHO_FLOOR};

/// Scaled Monge-Ampère residual allowed at every grid point.
pub const DEFAULT_BURNS_TOL: f64 = 1e-8;

/// Points per real axis of the default grid: `20^{2n}` points for `n ≤ 2`,
/// `8^{2n}` beyond that.
pub fn default_grid_per_axis(n: usize) -> usize {
    if n <= 2 {
        20
    } else {
        8
    }
}

/// Tensor grid on `[-radius, radius]^{2n}`, `per_axis` points per real axis
/// or the default count.
pub fn burns_grid(n: usize, radius: f64, per_axis: Option<usize>) -> Vec<CPoint> {
    tensor_grid(n, radius, per_axis.unwrap_or_else(|| default_grid_per_axis(n)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Vec<String>),
    /// Non-`(k,k)` terms are present but the grid found no Monge-Ampère
    /// violation.
    Inconclusive(Vec<String>),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn reasons(&self) -> &[String] {
        match self {
            Verdict::Pass => &[],
            Verdict::Fail(r) | Verdict::Inconclusive(r) => r,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())?;
        if !self.reasons().is_empty() {
            write!(f, ": {}", self.reasons().join("; "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GridResidual {
    pub point: CPoint,
    pub rho: f64,
    pub ma_scaled: f64,
    pub stratum: Stratum,
    /// `‖Z(w) − w/k‖`, only at strictly plurisubharmonic points.
    pub radial: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BurnsReport {
    pub degree2k: Option<u32>,
    pub is_homogeneous: bool,
    pub grid_points: usize,
    /// Minimum of `ρ` over the grid projected to the unit sphere.
    pub sphere_min: f64,
    pub ma_max_residual: f64,
    pub ma_argmax: Option<CPoint>,
    pub bidegree_mass: BTreeMap<(u32, u32), f64>,
    pub radial_field_residual: f64,
    pub component_identity_residual: f64,
    pub tol: f64,
    /// `(k,k)` support agrees with feasibility of the equal weights `1/k`.
    pub cross_check_consistent: bool,
    pub verdict: Verdict,
    pub residuals: Vec<GridResidual>,
}

impl BurnsReport {
    pub fn k(&self) -> Option<u32> {
        self.degree2k.map(|d| d / 2)
    }

    /// Mass on bidegrees other than `(k, k)`.
    pub fn off_diagonal_mass(&self) -> f64 {
        let k = self.k();
        self.bidegree_mass
            .iter()
            .filter(|((l, m), _)| Some(*l) != k || Some(*m) != k)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.residuals.first().map_or(0, |r| r.point.dim());
        let mut cols = Vec::new();
        for j in 1..=n {
            cols.push(format!("z{j}_re"));
            cols.push(format!("z{j}_im"));
        }
        cols.extend(["rho", "ma_scaled", "stratum", "radial_residual"].map(String::from));
        writeln!(w, "{}", cols.join(","))?;
        for r in &self.residuals {
            for c in r.point.coords() {
                write!(w, "{},{},", c.re, c.im)?;
            }
            let radial = r.radial.map_or(String::new(), |x| x.to_string());
            writeln!(w, "{},{},{},{}", r.rho, r.ma_scaled, r.stratum, radial)?;
        }
        Ok(())
    }
}

/// Derivatives `C_ᾱ` and `C_{μᾱ}` of one bidegree component.
struct ComponentJet {
    zbar: Vec<PolyExpr>,
    mixed: Vec<Vec<PolyExpr>>,
}

impl ComponentJet {
    fn new(c: &PolyExpr) -> Result<Self> {
        let n = c.dim();
        let mut zbar = Vec::with_capacity(n);
        let mut mixed = Vec::with_capacity(n);
        for a in 0..n {
            let d = c.wirtinger_zbar(a)?;
            mixed.push((0..n).map(|mu| d.wirtinger_z(mu)).collect::<Result<Vec<_>>>()?);
            zbar.push(d);
        }
        Ok(Self { zbar, mixed })
    }

    /// `max_ᾱ |C_ᾱ − Σ_μ (w^μ/k) C_{μᾱ}|` together with `max_ᾱ |C_ᾱ|`.
    fn identity(&self, w: &[C64], powers: &PowerTable, k: f64) -> (f64, f64) {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, d) in self.zbar.iter().enumerate() {
            let lhs = d.evaluate_with(powers);
            let rhs: C64 = self.mixed[a]
                .iter()
                .zip(w)
                .map(|(e, wm)| e.evaluate_with(powers) * wm / k)
                .sum();
            worst = worst.max((lhs - rhs).norm());
            scale = scale.max(lhs.norm());
        }
        (worst, scale)
    }
}

/// Runs every gate on the given grid. `tol` bounds the scaled Monge-Ampère
/// residual; the radial field gate uses `tol` as an absolute bound.
pub fn burns_check(p: &PolyPotential, grid: &[CPoint], tol: f64) -> Result<BurnsReport> {
    if grid.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = p.dim();
    let degree2k = p.homogeneous_degree();
    let components = p.bidegree_decompose();
    let bidegree_mass: BTreeMap<(u32, u32), f64> =
        components.iter().map(|(&bd, c)| (bd, c.coefficient_mass())).collect();

    let k = degree2k.map(|d| d / 2);
    let kk_support = k.is_some_and(|k| components.keys().all(|&bd| bd == (k, k)));
    let equal_weights_feasible = k.is_some_and(|k| {
        let c = WeightVector::new(vec![1.0 / k as f64; n]).expect("k ≥ 1");
        weight_equations(p).iter().all(|e| {
            let s: f64 = e.0.entries().iter().zip(c.entries()).map(|(a, c)| *a as f64 * c).sum();
            (s - 1.0).abs() < 1e-12
        })
    });

    let jet = LeviJet::new(p);
    let comp_jets = match k {
        Some(_) => components
            .values()
            .map(ComponentJet::new)
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let max_exp = p.as_expr().max_exponent();

    let mut sphere_min = f64::INFINITY;
    let mut ma_max: f64 = 0.0;
    let mut ma_argmax = None;
    let mut radial_max: f64 = 0.0;
    let mut comp_worst: f64 = 0.0;
    let mut comp_scale: f64 = 0.0;
    let mut residuals = Vec::with_capacity(grid.len());

    for w in grid {
        let r = w.norm();
        if r > 0.0 {
            let u = CPoint::new(w.coords().iter().map(|c| c / r).collect());
            sphere_min = sphere_min.min(p.evaluate(&u)?);
        }
        let jv = jet.eval(w)?;
        if jv.rho <= RHO_FLOOR {
            continue;
        }
        let ma = MaResidual::from_jet(&jv);
        if ma.scaled > ma_max {
            ma_max = ma.scaled;
            ma_argmax = Some(w.clone());
        }
        let eigs = linalg::hermitian_eigenvalues(&jv.hessian);
        let stratum = Stratum::from_rank(crate::levi::numerical_rank(&eigs, DEFAULT_TOL_RANK), n);
        let mut radial = None;
        if let (Some(k), Stratum::StrictlyPlurisubharmonic) = (k, stratum) {
            if let Some(z) = linalg::lu_solve(&jv.hessian.transpose(), &jv.grad_bar()) {
                let d = z
                    .iter()
                    .zip(w.coords())
                    .map(|(zi, wi)| (zi - wi / k as f64).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                radial_max = radial_max.max(d);
                radial = Some(d);
            }
        }
        if let Some(k) = k {
            let powers = PowerTable::new(w.coords(), max_exp);
            for cj in &comp_jets {
                let (res, scale) = cj.identity(w.coords(), &powers, k as f64);
                comp_worst = comp_worst.max(res);
                comp_scale = comp_scale.max(scale);
            }
        }
        residuals.push(GridResidual {
            point: w.clone(),
            rho: jv.rho,
            ma_scaled: ma.scaled,
            stratum,
            radial,
        });
    }

    let mut fails = Vec::new();
    if degree2k.is_none() {
        fails.push("not homogeneous of even degree".to_string());
    }
    if sphere_min.is_nan() || sphere_min <= 0.0 {
        fails.push(format!("not positive on the unit sphere (min {sphere_min:e})"));
    }
    let ma_ok = ma_max < tol;
    if !ma_ok {
        let at = ma_argmax.as_ref().map_or(String::new(), |z| format!(" at {z}"));
        fails.push(format!("Monge-Ampere residual {ma_max:e} >= {tol:e}{at}"));
    }
    let off = bidegree_mass
        .iter()
        .filter(|((l, m), _)| Some(*l) != k || Some(*m) != k)
        .map(|(bd, mass)| format!("({},{}) mass {mass}", bd.0, bd.1))
        .collect::<Vec<_>>();
    if degree2k.is_some() && !off.is_empty() {
        fails.push(format!("bidegree not (k,k): {}", off.join(", ")));
    }
    let radial_ok = radial_max < tol;
    if degree2k.is_some() && !radial_ok {
        fails.push(format!("radial field residual {radial_max:e} >= {tol:e}"));
    }
    let comp_ok = comp_worst <= tol * comp_scale.max(1.0);
    if degree2k.is_some() && !comp_ok {
        fails.push(format!("component identity residual {comp_worst:e}"));
    }

    let verdict = if fails.is_empty() {
        Verdict::Pass
    } else if degree2k.is_some() && sphere_min > 0.0 && ma_ok && !kk_support {
        Verdict::Inconclusive(fails)
    } else {
        Verdict::Fail(fails)
    };

    Ok(BurnsReport {
        degree2k,
        is_homogeneous: degree2k.is_some(),
        grid_points: grid.len(),
        sphere_min,
        ma_max_residual: ma_max,
        ma_argmax,
        bidegree_mass,
        radial_field_residual: radial_max,
        component_identity_residual: comp_worst,
        tol,
        cross_check_consistent: kk_support == equal_weights_feasible || degree2k.is_none(),
        verdict,
        residuals,
    })
}

/// `max |ρ(λz) − |λ|^{2k} ρ(z)| / ρ(z)`.
pub fn log_growth_check(p: &PolyPotential, k: u32, z_samples: &[CPoint], lambdas: &[C64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in z_samples {
        let rho = p.evaluate(z)?;
        if rho <= 0.0 {
            return Err(Error::OutsideDomain { rho });
        }
        for &l in lambdas {
            let moved = p.evaluate(&CPoint::new(z.coords().iter().map(|c| c * l).collect()))?;
            worst = worst.max((moved - l.norm().powi(2 * k as i32) * rho).abs() / rho);
        }
    }
    Ok(worst)
}
