//! Suite checks, registered by name. Each check samples with its own seed
//! offset, so selecting a subset with `--checks` does not change results.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, Result};
use mafol_core::burns::{burns_check, burns_grid, log_growth_check, Verdict, DEFAULT_BURNS_TOL};
use mafol_core::foliation::{leaf_log_linearity, leaf_stratum_invariance, level_set_invariance, linspace, LeafConfig};
use mafol_core::gradient::{cr_residual, theta_orbit_det_check, GradientField, OrbitCheck};
use mafol_core::homogeneity::{flow_level_map_check, linear_field_agreement, verify_weights, WeightOutcome};
use mafol_core::integrate::Integrator;
use mafol_core::levi::LeviJet;
use mafol_core::linalg;
use mafol_core::oracle::{determinant_lemma_gap, hessian_fd_error};
use mafol_core::sampling::default_lambdas;
use mafol_core::{find_weights, trace_leaf, CPoint, PolyPotential, Registry, Sampler, ScanConfig, Strategy, Stratum, C64};
use serde::Deserialize;

use crate::commands::{LEMMA_GAP_TOL, LEVEL_SET_TOL, LINEAR_FIELD_TOL, LOG_LINEARITY_TOL, WEIGHT_VERIFY_TOL};
use crate::expectations::PotentialExpectation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Inconclusive,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
            Status::Inconclusive => "inconclusive",
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Status {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            "skip" => Ok(Status::Skip),
            "inconclusive" => Ok(Status::Inconclusive),
            other => Err(anyhow!("unknown status '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub status: Status,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    fn measured(ok: bool, measured: f64, threshold: f64) -> Self {
        Self {
            status: Status::from_ok(ok),
            measured: Some(measured),
            threshold: Some(threshold),
            detail: String::new(),
        }
    }

    /// `measured < threshold` decides the status.
    fn below(measured: f64, threshold: f64) -> Self {
        Self::measured(measured < threshold, measured, threshold)
    }

    fn skip(reason: impl Into<String>) -> Self {
        Self {
            status: Status::Skip,
            measured: None,
            threshold: None,
            detail: reason.into(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Everything a check may look at for one potential.
pub struct CheckContext<'a> {
    pub potential: &'a PolyPotential,
    pub jet: LeviJet,
    pub field: GradientField,
    pub integrator: &'a dyn Integrator,
    pub cfg: &'a ScanConfig,
    pub expectation: &'a PotentialExpectation,
    /// Points per axis for the burns grid; `None` uses the default.
    pub burns_grid: Option<usize>,
}

impl CheckContext<'_> {
    fn sampler(&self, offset: u64) -> Sampler {
        Sampler::new(self.cfg.seed.wrapping_add(offset))
    }

    /// Samples with `0.1 < ρ < 10`, away from the center where relative
    /// residuals blow up.
    fn moderate_samples(&self, offset: u64, count: usize) -> Vec<CPoint> {
        self.sampler(offset)
            .uniform_box_where(self.potential, self.cfg.box_radius, count, |r| r > 0.1 && r < 10.0)
    }

    fn point(&self, text: &Option<String>) -> Result<Option<CPoint>> {
        text.as_deref()
            .map(|t| crate::session::parse_point(t, self.potential.dim()))
            .transpose()
    }
}

/// Default expectation of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    /// Holds for every well-formed potential.
    Always,
    /// Passes exactly when the potential is declared Monge-Ampère.
    FollowsMongeAmpere,
}

pub trait Check: Strategy {
    fn expect(&self) -> Expect;
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult>;

    fn expected(&self, exp: &PotentialExpectation) -> Status {
        if let Some(s) = exp.checks.get(self.name()) {
            return *s;
        }
        match self.expect() {
            Expect::Always => Status::Pass,
            Expect::FollowsMongeAmpere => Status::from_ok(exp.monge_ampere),
        }
    }
}

macro_rules! check {
    ($ty:ident, $name:literal, $desc:literal) => {
        pub struct $ty;
        impl Strategy for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn description(&self) -> &'static str {
                $desc
            }
        }
    };
}

check!(HermitianEval, "hermitian_eval", "imaginary part of rho vanishes relative to term mass");
check!(HessianFd, "hessian_fd", "exact Levi matrix against central finite differences");
check!(DeterminantLemma, "determinant_lemma", "rho det H - g* adj(H) g equals rho^(n+1) det U");
check!(EulerMaIdentity, "euler_ma_identity", "rho - Z(rho) equals rho^(n+1) det U / det H on P");
check!(MongeAmpere, "monge_ampere", "det of the Levi form of log rho vanishes");
check!(EulerIdentity, "euler_identity", "Z(rho) = rho on samples");
check!(Holomorphy, "holomorphy", "finite-difference dZ/dzbar vanishes");
check!(LeafFlow, "leaf_flow", "log rho grows like t and rho is constant in s along a leaf");
check!(LeafStrata, "leaf_strata", "leaves stay in the stratum of their base point");
check!(ThetaOrbit, "theta_orbit", "Theta orbit from a degenerate point keeps det H = 0 and rho fixed");
check!(Weights, "weights", "positive homogeneity weights exist and verify");
check!(LinearField, "linear_field", "Z equals the linear field (c_j z_j)");
check!(LevelMap, "level_map", "X flow maps {rho = 1} onto {rho = 2}");
check!(Burns, "burns", "homogeneous potentials have bidegree (k,k) and Z = w/k");
check!(LogGrowth, "log_growth", "rho(lambda z) = |lambda|^(2k) rho(z)");

impl Check for HermitianEval {
    fn expect(&self) -> Expect {
        Expect::Always
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let pts = ctx.sampler(1).uniform_box(ctx.potential.dim(), ctx.cfg.box_radius, ctx.cfg.samples);
        let mut worst: f64 = 0.0;
        for z in &pts {
            worst = worst.max(ctx.potential.evaluate_with_defect(z)?.1);
        }
        Ok(CheckResult::below(worst, 1e-12))
    }
}

impl Check for HessianFd {
    fn expect(&self) -> Expect {
        Expect::Always
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let pts = ctx.sampler(2).uniform_box(ctx.potential.dim(), ctx.cfg.box_radius, 100);
        let mut worst: f64 = 0.0;
        for z in &pts {
            worst = worst.max(hessian_fd_error(&ctx.jet, z, 1e-3)?);
        }
        Ok(CheckResult::below(worst, 1e-5).with_detail("100 points, h = 1e-3"))
    }
}

impl Check for DeterminantLemma {
    fn expect(&self) -> Expect {
        Expect::Always
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let pts = ctx
            .sampler(3)
            .uniform_box_in_domain(ctx.potential, ctx.cfg.box_radius, ctx.cfg.samples);
        let mut worst: f64 = 0.0;
        for z in &pts {
            worst = worst.max(determinant_lemma_gap(&ctx.jet, z)?);
        }
        Ok(CheckResult::below(worst, LEMMA_GAP_TOL))
    }
}

impl Check for EulerMaIdentity {
    fn expect(&self) -> Expect {
        Expect::Always
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let n = ctx.potential.dim() as i32;
        let mut worst: f64 = 0.0;
        let mut used = 0;
        for z in ctx.moderate_samples(4, ctx.cfg.samples) {
            let jv = ctx.jet.eval(&z)?;
            let s = ctx.field.sample(&z)?;
            if s.stratum != Stratum::StrictlyPlurisubharmonic {
                continue;
            }
            used += 1;
            let zrho: C64 = s.z.iter().zip(jv.grad.iter()).map(|(a, b)| a * b).sum();
            let lhs = C64::new(jv.rho, 0.0) - zrho;
            let det_u = linalg::determinant(&jv.log_levi());
            let rhs = det_u * jv.rho.powi(n + 1) / linalg::determinant(&jv.hessian);
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
        Ok(CheckResult::below(worst, 1e-8).with_detail(format!("{used} points in P")))
    }
}

impl Check for MongeAmpere {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let mut worst: f64 = 0.0;
        for z in ctx.moderate_samples(5, ctx.cfg.samples) {
            worst = worst.max(ctx.jet.ma_residual(&z)?);
        }
        Ok(CheckResult::below(worst, ctx.cfg.tol_ma))
    }
}

impl Check for EulerIdentity {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let mut worst: f64 = 0.0;
        for z in ctx.moderate_samples(6, ctx.cfg.samples) {
            worst = worst.max(ctx.field.sample(&z)?.euler_residual);
        }
        Ok(CheckResult::below(worst, ctx.cfg.tol_ma))
    }
}

impl Check for Holomorphy {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let mut pts = ctx.moderate_samples(7, 200);
        // Jitter the declared degenerate point well inside the stencil width
        // so some stencils cross into the neighbouring stratum.
        if let Some(z0) = ctx.point(&ctx.expectation.degenerate_point)? {
            let mut rng = ctx.sampler(13);
            let keep = pts.len().saturating_sub(20);
            pts.truncate(keep);
            for _ in 0..20 {
                let d = rng.direction(z0.dim());
                pts.push(CPoint::new(z0.coords().iter().zip(d.coords()).map(|(a, b)| a + b * 1e-6).collect()));
            }
        }
        let rep = cr_residual(&ctx.field, &pts, 1e-4)?;
        Ok(CheckResult::below(rep.max, 1e-6).with_detail(format!(
            "{} points, h = 1e-4, {} stencils straddle strata",
            pts.len(),
            rep.straddling.len()
        )))
    }
}

fn leaf_base(ctx: &CheckContext) -> Result<CPoint> {
    if let Some(z) = ctx.point(&ctx.expectation.leaf_base)? {
        return Ok(z);
    }
    ctx.moderate_samples(8, 1)
        .pop()
        .ok_or_else(|| anyhow!("no sample with 0.1 < rho < 10 in the box"))
}

fn leaf_config(ctx: &CheckContext) -> LeafConfig {
    LeafConfig {
        step: ctx.cfg.step,
        tol_rank: ctx.cfg.tol_rank,
        ..LeafConfig::default()
    }
}

impl Check for LeafFlow {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let base = leaf_base(ctx)?;
        let tr = trace_leaf(
            &ctx.field,
            ctx.integrator,
            &base,
            &linspace(0.0, 2.0, 5),
            &linspace(0.0, TAU, 5),
            &leaf_config(ctx),
        )?;
        let ll = leaf_log_linearity(&tr);
        let lv = level_set_invariance(&tr);
        let threshold = LOG_LINEARITY_TOL.min(LEVEL_SET_TOL);
        Ok(CheckResult::below(ll.max(lv), threshold)
            .with_detail(format!("base {base}: log-linearity {ll:e}, level-set variation {lv:e}")))
    }
}

impl Check for LeafStrata {
    fn expect(&self) -> Expect {
        Expect::Always
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let mut bases = vec![leaf_base(ctx)?];
        if let Some(z) = ctx.point(&ctx.expectation.degenerate_point)? {
            bases.push(z);
        }
        let mut violations = 0;
        let mut detail = Vec::new();
        for base in &bases {
            let tr = trace_leaf(
                &ctx.field,
                ctx.integrator,
                base,
                &linspace(-1.0, 1.0, 3),
                &linspace(0.0, TAU, 4),
                &leaf_config(ctx),
            )?;
            let rep = leaf_stratum_invariance(&tr, &ctx.field, ctx.cfg.tol_rank)?;
            violations += rep.violations.len();
            detail.push(format!("{base} in {}: {} violations", rep.base, rep.violations.len()));
        }
        Ok(CheckResult::measured(violations == 0, violations as f64, 0.0).with_detail(detail.join("; ")))
    }
}

impl Check for ThetaOrbit {
    fn expect(&self) -> Expect {
        Expect::Always
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let Some(z0) = ctx.point(&ctx.expectation.degenerate_point)? else {
            return Ok(CheckResult::skip("no degenerate_point declared"));
        };
        match theta_orbit_det_check(&ctx.field, ctx.integrator, &z0, 5.0, ctx.cfg.step)? {
            OrbitCheck::Skipped { abs_det } => Ok(CheckResult {
                status: Status::Fail,
                measured: Some(abs_det),
                threshold: Some(ctx.cfg.tol_rank),
                detail: format!("declared degenerate point {z0} has |det H| = {abs_det:e}"),
            }),
            OrbitCheck::Completed {
                max_abs_det,
                max_rho_deviation,
                ..
            } => {
                let rho0 = ctx.jet.rho(&z0)?;
                let ok = max_abs_det < ctx.cfg.tol_rank && max_rho_deviation < 1e-6 * rho0.max(1.0);
                Ok(CheckResult::measured(ok, max_abs_det, ctx.cfg.tol_rank)
                    .with_detail(format!("t in [0, 5], max |rho - rho0| = {max_rho_deviation:e} (threshold 1e-6)")))
            }
        }
    }
}

impl Check for Weights {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        match find_weights(ctx.potential) {
            WeightOutcome::Found { weights, unique, .. } => {
                let zs = ctx
                    .sampler(9)
                    .uniform_box_in_domain(ctx.potential, ctx.cfg.box_radius, 100);
                let v = verify_weights(ctx.potential, &weights, &zs, &default_lambdas())?;
                let u = if unique { "unique" } else { "not unique" };
                Ok(CheckResult::below(v, WEIGHT_VERIFY_TOL).with_detail(format!("c = {weights}, {u}")))
            }
            WeightOutcome::NotPositive { weights, .. } => Ok(CheckResult {
                status: Status::Fail,
                measured: None,
                threshold: None,
                detail: format!("weights not positive: {weights:?}"),
            }),
            WeightOutcome::Infeasible { inconsistent, residual } => {
                let eqs: Vec<String> = inconsistent.iter().map(ToString::to_string).collect();
                Ok(CheckResult {
                    status: Status::Fail,
                    measured: Some(residual),
                    threshold: None,
                    detail: format!("infeasible: {{{}}}", eqs.join(", ")),
                })
            }
        }
    }
}

impl Check for LinearField {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let Some(c) = find_weights(ctx.potential).weights().cloned() else {
            return Ok(CheckResult::skip("no positive weights"));
        };
        let zs = ctx
            .sampler(10)
            .uniform_box_in_domain(ctx.potential, ctx.cfg.box_radius, 100);
        Ok(CheckResult::below(linear_field_agreement(&ctx.field, &c, &zs)?, LINEAR_FIELD_TOL))
    }
}

impl Check for LevelMap {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let origin = CPoint::new(vec![C64::new(0.0, 0.0); ctx.potential.dim()]);
        if ctx.potential.evaluate(&origin)? >= 1.0 {
            return Ok(CheckResult::skip("rho(0) >= 1"));
        }
        let pts = ctx.sampler(11).on_level_set(ctx.potential, 1.0, 50)?;
        let r = flow_level_map_check(&ctx.field, ctx.integrator, 1.0, 2.0, &pts, ctx.cfg.step)?;
        Ok(CheckResult::below(r, 1e-5).with_detail("50 points, r1 = 1, r2 = 2"))
    }
}

impl Check for Burns {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        if ctx.potential.homogeneous_degree().is_none() {
            return Ok(CheckResult::skip("not homogeneous"));
        }
        let grid = burns_grid(ctx.potential.dim(), ctx.cfg.box_radius, ctx.burns_grid);
        let r = burns_check(ctx.potential, &grid, DEFAULT_BURNS_TOL)?;
        if !r.cross_check_consistent {
            return Ok(CheckResult {
                status: Status::Fail,
                measured: Some(r.ma_max_residual),
                threshold: Some(DEFAULT_BURNS_TOL),
                detail: "internal cross-check between bidegree support and equal weights failed".into(),
            });
        }
        let status = match r.verdict {
            Verdict::Pass => Status::Pass,
            Verdict::Fail(_) => Status::Fail,
            Verdict::Inconclusive(_) => Status::Inconclusive,
        };
        Ok(CheckResult {
            status,
            measured: Some(r.ma_max_residual),
            threshold: Some(DEFAULT_BURNS_TOL),
            detail: format!("k = {}, {} grid points; {}", r.k().unwrap_or(0), r.grid_points, r.verdict),
        })
    }
}

impl Check for LogGrowth {
    fn expect(&self) -> Expect {
        Expect::FollowsMongeAmpere
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult> {
        let Some(d) = ctx.potential.homogeneous_degree() else {
            return Ok(CheckResult::skip("not homogeneous"));
        };
        let zs = ctx
            .sampler(12)
            .uniform_box_in_domain(ctx.potential, ctx.cfg.box_radius, 100);
        let lambdas = [
            C64::new(2.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(1.0, 1.0),
            C64::new(0.5, 0.0),
            C64::new(-1.5, 0.5),
        ];
        Ok(CheckResult::below(log_growth_check(ctx.potential, d / 2, &zs, &lambdas)?, 1e-9))
    }
}

pub fn checks() -> Registry<dyn Check> {
    let mut reg: Registry<dyn Check> = Registry::new("check");
    let all: Vec<Arc<dyn Check>> = vec![
        Arc::new(HermitianEval),
        Arc::new(HessianFd),
        Arc::new(DeterminantLemma),
        Arc::new(EulerMaIdentity),
        Arc::new(MongeAmpere),
        Arc::new(EulerIdentity),
        Arc::new(Holomorphy),
        Arc::new(LeafFlow),
        Arc::new(LeafStrata),
        Arc::new(ThetaOrbit),
        Arc::new(Weights),
        Arc::new(LinearField),
        Arc::new(LevelMap),
        Arc::new(Burns),
        Arc::new(LogGrowth),
    ];
    for c in all {
        reg.register(c);
    }
    reg
}
