use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use mafol_core::levi::LeviJet;

use crate::checks::{checks, Check, CheckContext, Status};
use crate::commands::analyze_data;
use crate::expectations::Expectations;
use crate::session::{load_potential, Session};
use crate::Exit;

/// One row of the suite table.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub potential: String,
    pub name: String,
    pub status: Status,
    pub expected: Status,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
    pub wall_time: f64,
}

impl CheckOutcome {
    /// Matches the expectation; a skipped check never counts against the run.
    pub fn ok(&self) -> bool {
        self.status == self.expected || self.status == Status::Skip
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:e}"))
}

pub fn write_summary(rows: &[CheckOutcome], w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "potential,check,status,expected,ok,measured,threshold")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.potential,
            r.name,
            r.status,
            r.expected,
            r.ok(),
            fmt_opt(r.measured),
            fmt_opt(r.threshold)
        )?;
    }
    Ok(())
}

pub struct SuiteArgs<'a> {
    pub dir: &'a Path,
    pub expectations: Option<&'a Path>,
    pub checks: Option<&'a [String]>,
    pub burns_grid: Option<usize>,
}

fn potential_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "pot"));
    files.sort();
    if files.is_empty() {
        bail!("no .pot files in {}", dir.display());
    }
    Ok(files)
}

pub fn run_suite(args: &SuiteArgs, session: &Session, out: &mut dyn Write) -> Result<(Vec<CheckOutcome>, Exit)> {
    let files = potential_files(args.dir)?;
    let default_exp = args.dir.join("expectations.toml");
    let expectations = match args.expectations {
        Some(p) => Expectations::load(p)?,
        None if default_exp.exists() => Expectations::load(&default_exp)?,
        None => Expectations::default(),
    };
    let stems: Vec<String> = files
        .iter()
        .map(|f| f.file_stem().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    for name in expectations.names() {
        if !stems.iter().any(|s| s == name) {
            bail!("expectations name '{name}', which has no .pot file in {}", args.dir.display());
        }
    }
    let registry = checks();
    let selected: Vec<std::sync::Arc<dyn Check>> = match args.checks {
        Some(names) => names.iter().map(|n| registry.get(n)).collect::<mafol_core::Result<_>>()?,
        None => registry.iter().cloned().collect(),
    };

    writeln!(out, "{}", session.header("suite", args.dir))?;
    let mut rows = Vec::new();
    for (file, stem) in files.iter().zip(&stems) {
        let p = load_potential(file)?;
        let exp = expectations.get(stem);
        writeln!(
            out,
            "\n{stem} (n = {}, {} terms, expected {})",
            p.dim(),
            p.num_terms(),
            if exp.monge_ampere { "Monge-Ampere" } else { "non-Monge-Ampere" }
        )?;
        let ctx = CheckContext {
            potential: &p,
            jet: LeviJet::new(&p),
            field: session.field(&p),
            integrator: session.integrator.as_ref(),
            cfg: &session.cfg,
            expectation: &exp,
            burns_grid: args.burns_grid,
        };
        for check in &selected {
            let start = Instant::now();
            let result = check.run(&ctx);
            let wall_time = start.elapsed().as_secs_f64();
            let (status, measured, threshold, detail) = match result {
                Ok(r) => (r.status, r.measured, r.threshold, r.detail),
                Err(e) => (Status::Fail, None, None, format!("error: {e:#}")),
            };
            let row = CheckOutcome {
                potential: stem.clone(),
                name: check.name().to_string(),
                status,
                expected: check.expected(&exp),
                measured,
                threshold,
                detail,
                wall_time,
            };
            writeln!(
                out,
                "  {:<4} {:<18} {:<12} expected {:<12} measured {:<10} threshold {:<8} {:>7.3}s  {}",
                if row.ok() { "ok" } else { "FAIL" },
                row.name,
                row.status.label(),
                row.expected.label(),
                fmt_opt(row.measured),
                fmt_opt(row.threshold),
                row.wall_time,
                row.detail
            )?;
            rows.push(row);
        }
        if session.out.is_some() {
            let data = analyze_data(&p, session)?;
            session.write_csv(&format!("{stem}.analyze.csv"), |w| data.write_csv(w))?;
        }
    }
    if let Some(path) = session.write_csv("suite_summary.csv", |w| write_summary(&rows, w))? {
        writeln!(out, "\nwrote {}", path.display())?;
    }
    let failed = rows.iter().filter(|r| !r.ok()).count();
    writeln!(out, "\n{} checks, {} as expected, {} unexpected", rows.len(), rows.len() - failed, failed)?;
    Ok((rows, if failed == 0 { Exit::Ok } else { Exit::CheckFailed }))
}
