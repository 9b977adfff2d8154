//! Leaves of the Monge-Ampère foliation traced as `f(t + is)`: the X flow
//! for time `t` applied to the Y flow for time `s` from a base point.

use std::cell::Cell;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::gradient::{GradientField, RealFieldKind};
use crate::integrate::{integrate, Integrator};
use crate::levi::{numerical_rank, Stratum, DEFAULT_TOL_RANK};
use crate::potential::{CPoint, C64};
use crate::sampling::RHO_FLOOR;

#[derive(Clone, Debug, PartialEq)]
pub struct LeafConfig {
    pub step: f64,
    pub tol_rank: f64,
    /// Flows leaving the ball of this radius are truncated.
    pub box_limit: f64,
}

impl Default for LeafConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tol_rank: DEFAULT_TOL_RANK,
            box_limit: 1e6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafNode {
    pub point: CPoint,
    pub rho: f64,
    pub det_h: C64,
    pub eigenvalues: Vec<f64>,
    pub stratum: Stratum,
}

#[derive(Clone, Debug)]
pub struct LeafTrace {
    pub base: CPoint,
    pub base_rho: f64,
    pub t_values: Vec<f64>,
    pub s_values: Vec<f64>,
    /// `nodes[i][j]` sits at `(t_values[i], s_values[j])`; `None` where the
    /// flow was truncated before reaching it.
    pub nodes: Vec<Vec<Option<LeafNode>>>,
    pub integrator: String,
    pub step: f64,
    pub tol_rank: f64,
    pub truncated: bool,
}

impl LeafTrace {
    /// `(t, s, node)` for every node that was reached.
    pub fn reached(&self) -> impl Iterator<Item = (f64, f64, &LeafNode)> {
        self.nodes.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(j, n)| n.as_ref().map(|n| (self.t_values[i], self.s_values[j], n)))
        })
    }

    pub fn node(&self, t_index: usize, s_index: usize) -> Option<&LeafNode> {
        self.nodes.get(t_index)?.get(s_index)?.as_ref()
    }

    pub fn csv_header(dim: usize) -> String {
        let mut cols = vec!["t".to_string(), "s".to_string()];
        for j in 1..=dim {
            cols.push(format!("z{j}_re"));
            cols.push(format!("z{j}_im"));
        }
        cols.extend(["rho", "abs_detH", "stratum"].map(String::from));
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::csv_header(self.base.dim()))?;
        for (t, s, node) in self.reached() {
            write!(w, "{t},{s}")?;
            for c in node.point.coords() {
                write!(w, ",{},{}", c.re, c.im)?;
            }
            writeln!(w, ",{},{},{}", node.rho, node.det_h.norm(), node.stratum)?;
        }
        Ok(())
    }
}

/// Integrates along `ż = a·Z` through every time in `times` (any order,
/// any sign), starting at time zero. Returns the state at each time, or
/// `None` once the flow leaves the domain or the box.
fn march(
    field: &GradientField,
    integrator: &dyn Integrator,
    kind: RealFieldKind,
    start: &[C64],
    times: &[f64],
    cfg: &LeafConfig,
) -> Result<(Vec<Option<Vec<C64>>>, bool)> {
    let exited = Cell::new(false);
    let a = kind.flow_factor();
    let rhs = |z: &[C64]| -> Result<Vec<C64>> {
        match field.components(z) {
            Ok(v) => Ok(v.into_iter().map(|c| c * a).collect()),
            Err(e) => {
                if matches!(e, Error::OutsideDomain { .. }) {
                    exited.set(true);
                }
                Err(e)
            }
        }
    };
    let mut out: Vec<Option<Vec<C64>>> = vec![None; times.len()];
    let mut truncated = false;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let (neg, pos): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|&k| times[k] < 0.0);
    for direction in [pos, neg.into_iter().rev().collect::<Vec<_>>()] {
        let mut now = 0.0;
        let mut state = start.to_vec();
        for k in direction {
            let r = integrate(integrator, &rhs, &state, times[k] - now, cfg.step, &mut |_, z| {
                let rho = field.jet().rho(&CPoint::new(z.to_vec()))?;
                let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if rho <= RHO_FLOOR || norm > cfg.box_limit {
                    exited.set(true);
                    return Err(Error::OutsideDomain { rho });
                }
                Ok(())
            });
            match r {
                Ok(summary) => {
                    state = summary.state;
                    now = times[k];
                    out[k] = Some(state.clone());
                }
                Err(_) if exited.get() => {
                    truncated = true;
                    exited.set(false);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok((out, truncated))
}

/// Traces `f(t + is) = φ_X(t, φ_Y(s, z0))` on the product grid.
pub fn trace_leaf(
    field: &GradientField,
    integrator: &dyn Integrator,
    z0: &CPoint,
    t_values: &[f64],
    s_values: &[f64],
    cfg: &LeafConfig,
) -> Result<LeafTrace> {
    if t_values.is_empty() || s_values.is_empty() {
        return Err(Error::Config("leaf grids must be nonempty".into()));
    }
    let base = field.jet().levi_data(z0, cfg.tol_rank)?;
    if base.rho <= RHO_FLOOR {
        return Err(Error::OutsideDomain { rho: base.rho });
    }
    let (s_states, mut truncated) = march(field, integrator, RealFieldKind::Y, z0.coords(), s_values, cfg)?;
    let mut nodes = vec![vec![None; s_values.len()]; t_values.len()];
    for (j, s_state) in s_states.iter().enumerate() {
        let Some(s_state) = s_state else { continue };
        let (t_states, cut) = march(field, integrator, RealFieldKind::X, s_state, t_values, cfg)?;
        truncated |= cut;
        for (i, state) in t_states.into_iter().enumerate() {
            let Some(state) = state else { continue };
            let point = CPoint::new(state);
            let d = field.jet().levi_data(&point, cfg.tol_rank)?;
            nodes[i][j] = Some(LeafNode {
                point,
                rho: d.rho,
                det_h: d.det_h,
                eigenvalues: d.eigenvalues,
                stratum: d.stratum,
            });
        }
    }
    Ok(LeafTrace {
        base: z0.clone(),
        base_rho: base.rho,
        t_values: t_values.to_vec(),
        s_values: s_values.to_vec(),
        nodes,
        integrator: integrator.name().to_string(),
        step: cfg.step,
        tol_rank: cfg.tol_rank,
        truncated,
    })
}

/// `max |log ρ(node) − log ρ(base) − t|`.
pub fn leaf_log_linearity(trace: &LeafTrace) -> f64 {
    let l0 = trace.base_rho.ln();
    trace
        .reached()
        .map(|(t, _, n)| (n.rho.ln() - l0 - t).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log ρ` against `t` over all reached nodes.
pub fn log_growth_slope(trace: &LeafTrace) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trace.reached().map(|(t, _, n)| (t, n.rho.ln())).collect();
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if stt == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum::<f64>() / stt)
}

/// Largest relative spread `(max − min)/min` of `ρ` across `s` at fixed `t`.
pub fn level_set_invariance(trace: &LeafTrace) -> f64 {
    trace
        .nodes
        .iter()
        .map(|row| {
            let rhos: Vec<f64> = row.iter().flatten().map(|n| n.rho).collect();
            let lo = rhos.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if rhos.len() < 2 {
                0.0
            } else {
                (hi - lo) / lo
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumViolation {
    pub t: f64,
    pub s: f64,
    pub stratum: Stratum,
    pub abs_det: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumReport {
    pub base: Stratum,
    pub nodes_checked: usize,
    pub violations: Vec<StratumViolation>,
    /// Smallest `|det H|` over the leaf, a margin for the P/degenerate split.
    pub min_abs_det: f64,
    /// Largest `|det H|` over the leaf.
    pub max_abs_det: f64,
}

impl StratumReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares every node's stratum (re-derived at `tol_rank`) to the base's.
pub fn leaf_stratum_invariance(trace: &LeafTrace, field: &GradientField, tol_rank: f64) -> Result<StratumReport> {
    let n = trace.base.dim();
    let classify = |eigs: &[f64], rho: f64| {
        if rho <= 0.0 {
            Stratum::OutsideDomain
        } else {
            Stratum::from_rank(numerical_rank(eigs, tol_rank), n)
        }
    };
    let b = field.jet().levi_data(&trace.base, tol_rank)?;
    let base = classify(&b.eigenvalues, b.rho);
    let mut report = StratumReport {
        base,
        nodes_checked: 0,
        violations: Vec::new(),
        min_abs_det: f64::INFINITY,
        max_abs_det: 0.0,
    };
    for (t, s, node) in trace.reached() {
        report.nodes_checked += 1;
        let abs_det = node.det_h.norm();
        report.min_abs_det = report.min_abs_det.min(abs_det);
        report.max_abs_det = report.max_abs_det.max(abs_det);
        let stratum = classify(&node.eigenvalues, node.rho);
        if stratum != base {
            report.violations.push(StratumViolation { t, s, stratum, abs_det });
        }
    }
    Ok(report)
}

/// `n` equally spaced values on `[a, b]` (just `a` when `n == 1`).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}
