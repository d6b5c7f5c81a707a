//! Command-line front end. Every command resolves its parameters from flags,
//! then an optional `key = value` config file, then defaults, and writes
//! outputs prefixed with a `#` manifest header.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use error::{exit, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "semilinear", version, about = "Semilinear inequalities on weighted graphs")]
pub struct Cli {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check Δu + u^σ ≤ tol on the interior of a graph.
    Check(CheckArgs),
    /// Calibrate or verify the explicit solution on the weighted tree.
    TreeExample(TreeExampleArgs),
    /// Ball volumes and their ratio to the critical growth rate.
    Volume(VolumeArgs),
    /// Nash–Williams partial sums and Monte-Carlo return estimates.
    Recurrence(RecurrenceArgs),
    /// High-precision values of the limit expression.
    Limit(LimitArgs),
    /// Partial sums of Σ n^{2σ−1} / μ(B(o,n))^{σ−1}.
    Series(SeriesArgs),
    /// Descent chain for 0 < σ < 1.
    Descent(DescentArgs),
    /// Dirichlet solves on growing balls.
    Probe(ProbeArgs),
    /// Write an edge list for a standard graph.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// `all`, `degree:K` or `radius:R` (around --root).
    #[arg(long)]
    pub interior: Option<String>,
    #[arg(long)]
    pub root: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TreeExampleArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "n-branch", short = 'N')]
    pub n_branch: Option<usize>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Verify this n₀ instead of searching.
    #[arg(long)]
    pub n0: Option<u64>,
    /// Verify this δ (requires --n0).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Per-layer CSV `n,u_n,w_n,residual,rhs_eqZdelta,volume_ratio`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write every k-th layer to the CSV.
    #[arg(long)]
    pub csv_stride: Option<u64>,
    /// Evaluate the rhs column in extended precision.
    #[arg(long)]
    pub hp_rhs: bool,
    #[arg(long)]
    pub emit_graph: Option<PathBuf>,
    #[arg(long)]
    pub emit_solution: Option<PathBuf>,
    #[arg(long)]
    pub emit_depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub root: Option<usize>,
    /// Use the radial tree model instead of a graph file.
    #[arg(long)]
    pub tree: bool,
    #[arg(long = "n-branch", short = 'N')]
    pub n_branch: Option<usize>,
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Extra log exponent in the normaliser (defaults to ε for the tree, 0 otherwise).
    #[arg(long)]
    pub log_excess: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecurrenceArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub root: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub walks: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Walks reaching a non-interior vertex are censored.
    #[arg(long)]
    pub interior: Option<String>,
    /// Comma-separated horizons for the return ladder.
    #[arg(long)]
    pub horizons: Option<String>,
    #[arg(long)]
    pub series_out: Option<PathBuf>,
    #[arg(long)]
    pub walks_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated arguments n ≥ 3.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub bits: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub root: Option<usize>,
    #[arg(long)]
    pub tree: bool,
    #[arg(long = "n-branch", short = 'N')]
    pub n_branch: Option<usize>,
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DescentArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub x0: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub interior: Option<String>,
    #[arg(long)]
    pub root: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// `line` or `tree`.
    #[arg(long)]
    pub family: Option<String>,
    /// Comma-separated increasing radii.
    #[arg(long)]
    pub radii: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// `zero`, `constant:V` (line) or `example` (tree).
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long = "n-branch", short = 'N')]
    pub n_branch: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// `line` or `tree`.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long = "n-branch", short = 'N')]
    pub n_branch: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub weight: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub(crate) fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(error::usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| error::usage(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| commands::dispatch(&cli))),
        None => commands::dispatch(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
