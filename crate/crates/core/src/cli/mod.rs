//! Command-line front end. Every command writes its artifacts under
//! `--out-dir` and echoes the resolved [`RunConfig`] alongside them.
//!
//! Exit codes: 0 success (including runs that hit the sweep cap), 2 bad
//! configuration, 3 I/O failure, 4 `certify` on a non-stationary point.

mod commands;
pub mod config;
pub mod io;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::harness::{Algorithm, Preset};
use crate::solvers::StopRule;

pub use commands::{cmd_certify, cmd_compare, cmd_gen, cmd_prox_eval, cmd_solve, cmd_sweep};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] crate::Error),
    #[error("point is not stationary (report written to {0})")]
    NotStationary(PathBuf),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Solver(_) => 2,
            CliError::Io { .. } => 3,
            CliError::NotStationary(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lqsolve", version, about = "Iterative thresholding for lq-regularized least squares")]
pub struct Cli {
    /// JSON file with RunConfig fields; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "LQSOLVE_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random sparse-recovery instance.
    Gen(InstanceArgs),
    /// Run one solver and write its trace, solution and summary.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run both solvers on one instance (fig1, fig3 or fig4 preset).
    Compare(ExperimentArgs),
    /// Step-size sweep (mu_sweep preset by default).
    Sweep(ExperimentArgs),
    /// Tabulate the scalar thresholding operator.
    ProxEval(ProxArgs),
    /// Check stationarity and local-minimum certificates for a solution.
    Certify(CertifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct InstanceArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, visible_alias = "k-star")]
    pub k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub column_normalize: Option<bool>,
    /// Read A.csv, y.csv (and x_true.csv if present) instead of generating.
    #[arg(long)]
    pub instance_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Absolute step size.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// Stop when one sweep moves the iterate by at most this much.
    #[arg(long, conflicts_with = "rmse_tol")]
    pub tol: Option<f64>,
    /// Stop when the relative error against x_true drops to this value.
    #[arg(long)]
    pub rmse_tol: Option<f64>,
    #[arg(long)]
    pub record_time: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub q_values: Option<Vec<f64>>,
    /// Step sizes in units of 1/L_max.
    #[arg(long, value_delimiter = ',')]
    pub mu_values: Option<Vec<f64>>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ProxArgs {
    #[arg(long)]
    pub q: f64,
    /// The product λμ.
    #[arg(long, visible_alias = "lambda-mu")]
    pub c: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    /// Vector CSV with the candidate point.
    #[arg(long)]
    pub solution: PathBuf,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Absolute step size used for the thresholds; defaults to 0.95/L_max.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl InstanceArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.m, self.m);
        set(&mut c.n, self.n);
        set(&mut c.k_star, self.k);
        set(&mut c.snr_db, self.snr_db);
        set(&mut c.column_normalize, self.column_normalize);
        set(&mut c.instance_dir, self.instance_dir.clone());
    }
}

impl SolverArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(a) = self.algorithm {
            c.algorithm = a;
        }
        set(&mut c.lambda, self.lambda);
        set(&mut c.q, self.q);
        set(&mut c.mu, self.mu);
        set(&mut c.max_sweeps, self.max_sweeps);
        if let Some(tol) = self.tol {
            c.stop_rule = Some(StopRule::IterateChange { tol });
        }
        if let Some(tol) = self.rmse_tol {
            c.stop_rule = Some(StopRule::Rmse { tol });
        }
        c.record_time |= self.record_time;
    }
}

impl ExperimentArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.preset, self.preset);
        self.instance.apply(c);
        set(&mut c.lambda, self.lambda);
        set(&mut c.q_values, self.q_values.clone());
        set(&mut c.mu_values, self.mu_values.clone());
        set(&mut c.max_sweeps, self.max_sweeps);
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl Cli {
    /// Merges defaults, the `--config` file and flags.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(dir) = &self.out_dir {
            c.out_dir = dir.clone();
        }
        match &self.command {
            Command::Gen(i) => i.apply(&mut c),
            Command::Solve { instance, solver } => {
                instance.apply(&mut c);
                solver.apply(&mut c);
            }
            Command::Compare(e) | Command::Sweep(e) => e.apply(&mut c),
            Command::Certify(a) => {
                a.instance.apply(&mut c);
                set(&mut c.lambda, a.lambda);
                set(&mut c.q, a.q);
                set(&mut c.mu, a.mu);
            }
            Command::ProxEval(_) => {}
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = cli.run_config().and_then(|config| {
        if !matches!(cli.command, Command::ProxEval(_)) {
            std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::io(&config.out_dir, e))?;
        }
        match &cli.command {
            Command::Gen(_) => cmd_gen(&config, cli.quiet),
            Command::Solve { .. } => cmd_solve(&config, cli.quiet),
            Command::Compare(_) => cmd_compare(&config, cli.quiet),
            Command::Sweep(_) => cmd_sweep(&config, cli.quiet),
            Command::ProxEval(args) => cmd_prox_eval(args.q, args.c, &args.z).map(|table| print!("{table}")),
            Command::Certify(args) => cmd_certify(&config, &args.solution, args.tol, cli.quiet),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lqsolve: {e}");
            e.exit_code()
        }
    }
}
