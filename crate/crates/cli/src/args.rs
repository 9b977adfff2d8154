use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const CSV_HELP: &str = "\
CSV files (written only with --out):
  analyze   analyze.csv
            index, z1_re, z1_im, ..., rho, abs_detH, stratum, ma_residual,
            euler_residual, method
  trace     trace.csv
            t, s, z1_re, z1_im, ..., rho, abs_detH, stratum
  burns     burns.csv
            z1_re, z1_im, ..., rho, ma_scaled, stratum, radial_residual
  suite     suite_summary.csv
            potential, check, status, expected, ok, measured, threshold
            plus <potential>.analyze.csv per input file

Coordinates are 1-based in files and reports. Wall time is printed to
stdout only, so CSVs are byte-identical for identical seeds and flags.

Exit codes: 0 ok, 1 check failure or internal invariant violation,
2 input or usage error.";

#[derive(Parser, Debug)]
#[command(name = "mafol", version, about = "Monge-Ampere foliation analysis for polynomial potentials on C^n")]
#[command(after_help = CSV_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample the domain: strata, Monge-Ampere and Euler residuals.
    Analyze {
        potential: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Trace the leaf f(t+is) through a base point and run leaf diagnostics.
    Trace {
        potential: PathBuf,
        /// Base point, comma-separated complex coordinates such as "1,0.5-2i".
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 5)]
        t_points: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
        s_max: f64,
        #[arg(long, default_value_t = 9)]
        s_points: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Recover weighted-homogeneity weights or an infeasibility certificate.
    Weights {
        potential: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bidegree (k,k) check for homogeneous potentials.
    Burns {
        potential: PathBuf,
        /// Grid points per real axis (default 20 for n <= 2, else 8).
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run every registered check on each *.pot file of a directory.
    Suite {
        dir: PathBuf,
        /// Expectation file; defaults to <dir>/expectations.toml when present.
        #[arg(long)]
        expectations: Option<PathBuf>,
        /// Comma-separated subset of checks to run.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Grid points per real axis for the burns check.
        #[arg(long)]
        burns_grid: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List registered gradient solvers, integrators and suite checks.
    List,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random sample count.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Half-width of the sampling cube in each real coordinate.
    #[arg(long = "box", default_value_t = 1.0)]
    pub box_radius: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_rank: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_ma: f64,
    /// Integrator step.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Directory for CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = mafol_core::integrate::DEFAULT_INTEGRATOR)]
    pub integrator: String,
    #[arg(long, default_value = mafol_core::gradient::DEFAULT_GRADIENT_SOLVER)]
    pub gradient: String,
}
