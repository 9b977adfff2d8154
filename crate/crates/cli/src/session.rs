//! Shared command plumbing: configuration, strategy selection, file I/O.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use mafol_core::gradient::{gradient_solvers, GradientField, GradientSolver};
use mafol_core::integrate::{integrators, Integrator};
use mafol_core::{CPoint, PolyPotential, ScanConfig};

use crate::args::CommonArgs;

pub struct Session {
    pub cfg: ScanConfig,
    pub integrator: Arc<dyn Integrator>,
    pub solver: Arc<dyn GradientSolver>,
    pub out: Option<PathBuf>,
}

impl Session {
    pub fn from_args(a: &CommonArgs) -> Result<Self> {
        let cfg = ScanConfig {
            box_radius: a.box_radius,
            samples: a.samples,
            seed: a.seed,
            tol_rank: a.tol_rank,
            tol_ma: a.tol_ma,
            step: a.step,
        };
        cfg.validate()?;
        Ok(Self {
            cfg,
            integrator: integrators().get(&a.integrator)?,
            solver: gradient_solvers().get(&a.gradient)?,
            out: a.out.clone(),
        })
    }

    pub fn field(&self, p: &PolyPotential) -> GradientField {
        GradientField::new(p, self.solver.clone()).with_tol_rank(self.cfg.tol_rank)
    }

    pub fn header(&self, command: &str, target: &Path) -> String {
        let c = &self.cfg;
        format!(
            "mafol {command} {}\nseed = {}, samples = {}, box = {}, tol-rank = {:e}, tol-ma = {:e}, step = {:e}, integrator = {}, gradient = {}",
            target.display(),
            c.seed,
            c.samples,
            c.box_radius,
            c.tol_rank,
            c.tol_ma,
            c.step,
            self.integrator.name(),
            self.solver.name()
        )
    }

    /// Creates `<out>/<name>` and hands a writer to `f`; no-op without `--out`.
    pub fn write_csv<F>(&self, name: &str, f: F) -> Result<Option<PathBuf>>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let Some(dir) = &self.out else { return Ok(None) };
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        let mut buf = Vec::new();
        f(&mut buf)?;
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        Ok(Some(path))
    }
}

pub fn load_potential(path: &Path) -> Result<PolyPotential> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    PolyPotential::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_point(text: &str, dim: usize) -> Result<CPoint> {
    let z = CPoint::parse(text).ok_or_else(|| anyhow!("cannot parse point '{text}'"))?;
    if z.dim() != dim {
        return Err(anyhow!("point '{text}' has {} coordinates, the potential has {dim}", z.dim()));
    }
    Ok(z)
}

/// `pass`/`FAIL` marker used in text reports.
pub fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}
