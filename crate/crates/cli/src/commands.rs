use std::io::{self, Write};
use std::path::Path;

use anyhow::Result;
use mafol_core::burns::{burns_check, default_grid_per_axis, DEFAULT_BURNS_TOL};
use mafol_core::foliation::{leaf_log_linearity, leaf_stratum_invariance, level_set_invariance, linspace, LeafConfig};
use mafol_core::gradient::gradient_solvers;
use mafol_core::homogeneity::{linear_field_agreement, verify_weights, WeightOutcome};
use mafol_core::integrate::integrators;
use mafol_core::levi::LeviJet;
use mafol_core::oracle::determinant_lemma_gap;
use mafol_core::sampling::{default_lambdas, tensor_grid};
use mafol_core::{find_weights, trace_leaf, CPoint, PolyPotential, Sampler, Stratum};

use crate::checks::checks;
use crate::session::{load_potential, mark, parse_point, Session};
use crate::Exit;

pub const LOG_LINEARITY_TOL: f64 = 1e-6;
pub const LEVEL_SET_TOL: f64 = 1e-6;
pub const LEMMA_GAP_TOL: f64 = 1e-9;
pub const IMAG_DEFECT_TOL: f64 = 1e-12;
pub const WEIGHT_VERIFY_TOL: f64 = 1e-9;
pub const LINEAR_FIELD_TOL: f64 = 1e-8;

pub struct AnalyzeRow {
    pub point: CPoint,
    pub rho: f64,
    pub abs_det: f64,
    pub stratum: Stratum,
    pub ma_residual: f64,
    pub euler_residual: Option<f64>,
    pub method: &'static str,
}

pub struct AnalyzeData {
    pub requested: usize,
    pub rows: Vec<AnalyzeRow>,
    pub max_lemma_gap: f64,
    pub max_imag_defect: f64,
}

impl AnalyzeData {
    pub fn max_ma(&self) -> f64 {
        self.rows.iter().map(|r| r.ma_residual).fold(0.0, f64::max)
    }

    pub fn max_euler(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.euler_residual).fold(0.0, f64::max)
    }

    pub fn census(&self, s: Stratum) -> usize {
        self.rows.iter().filter(|r| r.stratum == s).count()
    }

    pub fn invariants_hold(&self) -> bool {
        self.max_lemma_gap < LEMMA_GAP_TOL && self.max_imag_defect < IMAG_DEFECT_TOL
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        let n = self.rows.first().map_or(0, |r| r.point.dim());
        let mut cols = vec!["index".to_string()];
        for j in 1..=n {
            cols.push(format!("z{j}_re"));
            cols.push(format!("z{j}_im"));
        }
        cols.extend(["rho", "abs_detH", "stratum", "ma_residual", "euler_residual", "method"].map(String::from));
        writeln!(w, "{}", cols.join(","))?;
        for (i, r) in self.rows.iter().enumerate() {
            write!(w, "{i}")?;
            for c in r.point.coords() {
                write!(w, ",{},{}", c.re, c.im)?;
            }
            let euler = r.euler_residual.map_or(String::new(), |e| format!("{e:e}"));
            writeln!(
                w,
                ",{},{:e},{},{:e},{},{}",
                r.rho, r.abs_det, r.stratum, r.ma_residual, euler, r.method
            )?;
        }
        Ok(())
    }
}

pub fn analyze_data(p: &PolyPotential, session: &Session) -> Result<AnalyzeData> {
    let cfg = &session.cfg;
    let jet = LeviJet::new(p);
    let field = session.field(p);
    let points = Sampler::new(cfg.seed).uniform_box_in_domain(p, cfg.box_radius, cfg.samples);
    let mut data = AnalyzeData {
        requested: cfg.samples,
        rows: Vec::with_capacity(points.len()),
        max_lemma_gap: 0.0,
        max_imag_defect: 0.0,
    };
    for z in points {
        let d = jet.levi_data(&z, cfg.tol_rank)?;
        let ma = jet.ma_residual(&z)?;
        let (euler, method) = match field.sample(&z) {
            Ok(s) => (Some(s.euler_residual), s.method.label()),
            Err(mafol_core::Error::SingularHessian { .. }) => (None, "singular"),
            Err(e) => return Err(e.into()),
        };
        data.max_lemma_gap = data.max_lemma_gap.max(determinant_lemma_gap(&jet, &z)?);
        data.max_imag_defect = data.max_imag_defect.max(p.evaluate_with_defect(&z)?.1);
        data.rows.push(AnalyzeRow {
            rho: d.rho,
            abs_det: d.det_h.norm(),
            stratum: d.stratum,
            ma_residual: ma,
            euler_residual: euler,
            method,
            point: z,
        });
    }
    Ok(data)
}

pub fn analyze(path: &Path, session: &Session, out: &mut dyn Write) -> Result<Exit> {
    let p = load_potential(path)?;
    let data = analyze_data(&p, session)?;
    writeln!(out, "{}", session.header("analyze", path))?;
    let total = data.rows.len();
    if total < data.requested {
        writeln!(
            out,
            "note: only {total} of {} requested samples have rho > 1e-12 in the box",
            data.requested
        )?;
    }
    writeln!(out, "stratum census ({total} points):")?;
    for s in [Stratum::StrictlyPlurisubharmonic, Stratum::LowDegeneracy, Stratum::Weak] {
        let c = data.census(s);
        let pct = if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 };
        writeln!(out, "  {:<6} {:>8}  {:>5.1}%", s.label(), c, pct)?;
    }
    let tol = session.cfg.tol_ma;
    let ma = data.max_ma();
    writeln!(
        out,
        "max ma_residual      = {ma:e} (tol-ma {tol:e}): {}",
        if ma < tol { "Monge-Ampere holds on the samples" } else { "Monge-Ampere fails on the samples" }
    )?;
    writeln!(out, "max euler_residual   = {:e} (tol-ma {tol:e})", data.max_euler())?;
    writeln!(
        out,
        "max determinant-lemma gap = {:e} (threshold {LEMMA_GAP_TOL:e}): {}",
        data.max_lemma_gap,
        mark(data.max_lemma_gap < LEMMA_GAP_TOL)
    )?;
    writeln!(
        out,
        "max imaginary defect = {:e} (threshold {IMAG_DEFECT_TOL:e}): {}",
        data.max_imag_defect,
        mark(data.max_imag_defect < IMAG_DEFECT_TOL)
    )?;
    if let Some(path) = session.write_csv("analyze.csv", |w| data.write_csv(w))? {
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(if data.invariants_hold() { Exit::Ok } else { Exit::CheckFailed })
}

pub struct TraceArgs<'a> {
    pub base: &'a str,
    pub t: (f64, f64, usize),
    pub s: (f64, f64, usize),
}

pub fn trace(path: &Path, args: &TraceArgs, session: &Session, out: &mut dyn Write) -> Result<Exit> {
    let p = load_potential(path)?;
    let base = parse_point(args.base, p.dim())?;
    let field = session.field(&p);
    let cfg = LeafConfig {
        step: session.cfg.step,
        tol_rank: session.cfg.tol_rank,
        ..LeafConfig::default()
    };
    let ts = linspace(args.t.0, args.t.1, args.t.2);
    let ss = linspace(args.s.0, args.s.1, args.s.2);
    let tr = trace_leaf(&field, session.integrator.as_ref(), &base, &ts, &ss, &cfg)?;

    writeln!(out, "{}", session.header("trace", path))?;
    writeln!(
        out,
        "base = {base}, rho(base) = {}, t in [{}, {}] x {}, s in [{}, {}] x {}",
        tr.base_rho, args.t.0, args.t.1, args.t.2, args.s.0, args.s.1, args.s.2
    )?;
    if tr.truncated {
        writeln!(out, "note: the flow left the domain or the box; some nodes are missing")?;
    }
    if let Some(last) = tr.node(ts.len().saturating_sub(1), 0) {
        writeln!(out, "rho at (t = {}, s = {}) = {}", ts[ts.len() - 1], ss[0], last.rho)?;
    }
    let ll = leaf_log_linearity(&tr);
    let lv = level_set_invariance(&tr);
    let strata = leaf_stratum_invariance(&tr, &field, session.cfg.tol_rank)?;
    writeln!(
        out,
        "log-linearity deviation = {ll:e} (threshold {LOG_LINEARITY_TOL:e}): {}",
        mark(ll < LOG_LINEARITY_TOL)
    )?;
    writeln!(
        out,
        "level-set variation     = {lv:e} (threshold {LEVEL_SET_TOL:e}): {}",
        mark(lv < LEVEL_SET_TOL)
    )?;
    writeln!(
        out,
        "stratum invariance      = {} violations of {} nodes, base stratum {}, |detH| in [{:e}, {:e}] (tol-rank {:e}): {}",
        strata.violations.len(),
        strata.nodes_checked,
        strata.base,
        strata.min_abs_det,
        strata.max_abs_det,
        session.cfg.tol_rank,
        mark(strata.passed())
    )?;
    for v in &strata.violations {
        writeln!(out, "  node t = {}, s = {}: stratum {}, |detH| = {:e}", v.t, v.s, v.stratum, v.abs_det)?;
    }
    if let Some(path) = session.write_csv("trace.csv", |w| tr.write_csv(w))? {
        writeln!(out, "wrote {}", path.display())?;
    }
    let ok = ll < LOG_LINEARITY_TOL && lv < LEVEL_SET_TOL && strata.passed();
    Ok(if ok { Exit::Ok } else { Exit::CheckFailed })
}

pub fn weights(path: &Path, session: &Session, out: &mut dyn Write) -> Result<Exit> {
    let p = load_potential(path)?;
    writeln!(out, "{}", session.header("weights", path))?;
    let outcome = find_weights(&p);
    match &outcome {
        WeightOutcome::Found {
            weights,
            unique,
            residual,
        } => {
            let u = if *unique { "unique" } else { "not unique (minimum-norm solution)" };
            writeln!(out, "c = {weights}, {u}, system residual {residual:e}")?;
            let cfg = &session.cfg;
            let zs = Sampler::new(cfg.seed).uniform_box_in_domain(&p, cfg.box_radius, cfg.samples.min(100));
            let lambdas = default_lambdas();
            let v = verify_weights(&p, weights, &zs, &lambdas)?;
            let lf = linear_field_agreement(&session.field(&p), weights, &zs)?;
            writeln!(out, "residuals over {} samples and {} values of lambda:", zs.len(), lambdas.len())?;
            writeln!(
                out,
                "  homogeneity  {v:e} (threshold {WEIGHT_VERIFY_TOL:e}): {}",
                mark(v < WEIGHT_VERIFY_TOL)
            )?;
            writeln!(
                out,
                "  linear field {lf:e} (threshold {LINEAR_FIELD_TOL:e}): {}",
                mark(lf < LINEAR_FIELD_TOL)
            )?;
            // weights that solve the system must reproduce the scaling law
            Ok(if v < WEIGHT_VERIFY_TOL { Exit::Ok } else { Exit::CheckFailed })
        }
        WeightOutcome::NotPositive { weights, unique, .. } => {
            let u = if *unique { "unique" } else { "minimum-norm" };
            writeln!(out, "weights exist but are not positive: {weights:?} ({u})")?;
            Ok(Exit::Ok)
        }
        WeightOutcome::Infeasible { inconsistent, residual } => {
            let eqs: Vec<String> = inconsistent.iter().map(ToString::to_string).collect();
            writeln!(out, "infeasible: equations {{{}}}", eqs.join(", "))?;
            writeln!(out, "least-squares residual {residual:e}")?;
            Ok(Exit::Ok)
        }
    }
}

pub fn burns(path: &Path, grid: Option<usize>, session: &Session, out: &mut dyn Write) -> Result<Exit> {
    let p = load_potential(path)?;
    let per_axis = grid.unwrap_or_else(|| default_grid_per_axis(p.dim()));
    if per_axis == 0 {
        anyhow::bail!("grid must have at least one point per axis");
    }
    let pts = tensor_grid(p.dim(), session.cfg.box_radius, per_axis);
    let r = burns_check(&p, &pts, DEFAULT_BURNS_TOL)?;
    writeln!(out, "{}", session.header("burns", path))?;
    let deg = r.degree2k.map_or("none".to_string(), |d| d.to_string());
    let k = r.k().map_or("none".to_string(), |k| k.to_string());
    writeln!(out, "degree2k: {deg}")?;
    writeln!(out, "k: {k}")?;
    writeln!(out, "homogeneous: {}", if r.is_homogeneous { "yes" } else { "no" })?;
    writeln!(out, "grid points: {} ({per_axis} per axis, box {})", r.grid_points, session.cfg.box_radius)?;
    writeln!(out, "sphere minimum of rho: {:e} (threshold > 0)", r.sphere_min)?;
    let at = r.ma_argmax.as_ref().map_or(String::new(), |z| format!(" at {z}"));
    writeln!(out, "ma max scaled residual: {:e} (threshold {:e}){at}", r.ma_max_residual, r.tol)?;
    let mass: Vec<String> = r
        .bidegree_mass
        .iter()
        .map(|((l, m), v)| format!("({l},{m})={v}"))
        .collect();
    writeln!(out, "bidegree mass: {}", mass.join(" "))?;
    writeln!(out, "off-(k,k) mass: {} (threshold 0)", r.off_diagonal_mass())?;
    writeln!(out, "radial field residual: {:e} (threshold {:e})", r.radial_field_residual, r.tol)?;
    writeln!(out, "component identity residual: {:e}", r.component_identity_residual)?;
    writeln!(
        out,
        "cross-check (k,k) support vs equal weights 1/k: {}",
        if r.cross_check_consistent { "consistent" } else { "INCONSISTENT" }
    )?;
    writeln!(out, "verdict: {}", r.verdict.label())?;
    for reason in r.verdict.reasons() {
        writeln!(out, "  - {reason}")?;
    }
    if let Some(path) = session.write_csv("burns.csv", |w| r.write_csv(w))? {
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(if r.cross_check_consistent { Exit::Ok } else { Exit::CheckFailed })
}

pub fn list(out: &mut dyn Write) -> Result<Exit> {
    writeln!(out, "gradient solvers:")?;
    for s in gradient_solvers().iter() {
        writeln!(out, "  {:<12} {}", s.name(), s.description())?;
    }
    writeln!(out, "integrators:")?;
    for s in integrators().iter() {
        writeln!(out, "  {:<12} {}", s.name(), s.description())?;
    }
    writeln!(out, "checks:")?;
    for s in checks().iter() {
        writeln!(out, "  {:<20} {}", s.name(), s.description())?;
    }
    Ok(Exit::Ok)
}
