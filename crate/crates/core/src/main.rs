use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;
use serde_json::json;

use hamfeat::bounds::{bound_terms, corollary2_params, hoeffding_shots, BoundInputs};
use hamfeat::evolution::TrotterSchedule;
use hamfeat::features::Backend;
use hamfeat::pipeline::{
    cmd_features, cmd_generate, cmd_reproduce, cmd_scatter, cmd_train_eval, ExperimentConfig,
    MethodKind, ReproRow, StateDescriptor, TargetKind, SEED_ENV,
};
use hamfeat::{Error, Result};

#[derive(Parser)]
#[command(name = "hamfeat", version, about = "Learn Tr[f(H) rho] with Hamiltonian Fourier features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Hamiltonians and write labelled JSONL records.
    Generate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the Fourier feature table for a dataset.
    Features {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit on the train split and evaluate on the test split.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Dataset JSONL.
        #[arg(long = "in")]
        input: PathBuf,
        /// Feature CSV.
        #[arg(long)]
        features: PathBuf,
        /// Model JSON output.
        #[arg(long)]
        out: PathBuf,
        /// Metrics JSON output (defaults to <out>.metrics.json).
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Print the generalization and shot-count bounds as JSON.
    Bound(BoundArgs),
    /// Pair exact and estimated values of two equally shaped tables.
    Scatter {
        #[arg(long = "in", num_args = 2, value_names = ["EXACT", "NOISY"])]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rerun one 12-qubit results row end to end.
    Reproduce {
        /// exact12, trotter12 or shots12.
        row: String,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        /// Directory for intermediate files (defaults to a temporary directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    HadamardShots,
    OverlapShots,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ols,
    Ridge,
    Constrained,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Exp,
    Cos,
    Sin,
    Fourier,
}

/// Flags mirroring [`ExperimentConfig`]; unset flags fall back to the config
/// file and then to the defaults.
#[derive(Args)]
struct ConfigArgs {
    /// JSON config file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Number of samples N_d.
    #[arg(long)]
    num: Option<usize>,
    /// Master seed.
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Fourier order K.
    #[arg(long)]
    k: Option<usize>,
    /// Spectral bound C.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Shots per circuit; omit for ideal probabilities.
    #[arg(long)]
    shots: Option<u64>,
    /// Comma-separated Trotter steps per l, e.g. 1,1,1,1,1,2,2,2,2,3,3,3.
    #[arg(long)]
    nstep_schedule: Option<TrotterSchedule>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    w_bound: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Training fraction.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long, value_enum)]
    f: Option<TargetArg>,
    /// beta for exp, frequency for cos/sin.
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated Fourier coefficients for --f fourier.
    #[arg(long, value_delimiter = ',')]
    coeffs: Option<Vec<f64>>,
    /// Basis bitstring for the state instead of the domain wall.
    #[arg(long)]
    basis: Option<String>,
    /// Reference eigenstate bitstring (default all zeros).
    #[arg(long)]
    reference: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(n, num, seed, k, c, alpha, split, beta);
        if let Some(b) = self.backend {
            cfg.backend = match b {
                BackendArg::Exact => Backend::Exact,
                BackendArg::HadamardShots => Backend::HadamardShots,
                BackendArg::OverlapShots => Backend::OverlapShots,
            };
        }
        if let Some(m) = self.method {
            cfg.method = match m {
                MethodArg::Ols => MethodKind::Ols,
                MethodArg::Ridge => MethodKind::Ridge,
                MethodArg::Constrained => MethodKind::Constrained,
            };
        }
        if let Some(f) = self.f {
            cfg.f = match f {
                TargetArg::Exp => TargetKind::Exp,
                TargetArg::Cos => TargetKind::Cos,
                TargetArg::Sin => TargetKind::Sin,
                TargetArg::Fourier => TargetKind::Fourier,
            };
        }
        if self.shots.is_some() {
            cfg.shots = self.shots;
        }
        if self.nstep_schedule.is_some() {
            cfg.nstep_schedule = self.nstep_schedule.clone();
        }
        if self.w_bound.is_some() {
            cfg.w_bound = self.w_bound;
        }
        if self.coeffs.is_some() {
            cfg.coeffs = self.coeffs.clone();
        }
        if let Some(bits) = &self.basis {
            cfg.state = StateDescriptor::Basis { basis: bits.clone() };
        }
        if self.reference.is_some() {
            cfg.reference = self.reference.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, default_value_t = 11)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    w_bound: f64,
    /// Sup-norm of f.
    #[arg(long, default_value_t = 1.0)]
    f_inf: f64,
    /// Number of samples N_d.
    #[arg(long, default_value_t = 55)]
    num: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    eps_k: f64,
    /// Feature noise level; also sizes the Hoeffding shot count when > 0.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Target loss for the Lipschitz-case parameter choice.
    #[arg(long)]
    eps: Option<f64>,
}

fn bound_report(a: &BoundArgs) -> Result<serde_json::Value> {
    let inputs = BoundInputs {
        order: a.k,
        w_bound: a.w_bound,
        f_inf: a.f_inf,
        n_data: a.num,
        delta: a.delta,
        eps_k: a.eps_k,
        eta: a.eta,
    };
    let terms = bound_terms(&inputs)?;
    let mut report = json!({
        "inputs": inputs,
        "terms": terms,
        "theorem1_rhs": terms.approximation + terms.complexity + terms.confidence,
        "noisy_rhs": terms.total,
    });
    if a.eta > 0.0 {
        report["hoeffding_shots"] = json!(hoeffding_shots(a.eta, a.delta, a.k)?);
    }
    if let Some(eps) = a.eps {
        let (k, n_data) = corollary2_params(eps, a.w_bound, a.f_inf)?;
        report["lipschitz_parameters"] = json!({ "eps": eps, "k": k, "n_data": n_data });
    }
    Ok(report)
}

fn metrics_default(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".metrics.json");
    PathBuf::from(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { cfg, out } => {
            let cfg = cfg.resolve()?;
            let s = cmd_generate(&cfg, &out)?;
            println!("{}", serde_json::to_string(&s).expect("serializes"));
        }
        Command::Features { cfg, input, out } => {
            let cfg = cfg.resolve()?;
            let rows = cmd_features(&cfg, &input, &out)?;
            println!("{}", json!({ "rows": rows, "columns": 2 * cfg.k + 1 }));
        }
        Command::Train {
            cfg,
            input,
            features,
            out,
            metrics,
        } => {
            let cfg = cfg.resolve()?;
            let metrics = metrics.unwrap_or_else(|| metrics_default(&out));
            let res = cmd_train_eval(&cfg, &input, &features, &out, &metrics)?;
            println!("{}", serde_json::to_string(&res.metrics).expect("serializes"));
        }
        Command::Bound(args) => {
            let report = bound_report(&args)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializes"));
        }
        Command::Scatter { input, out } => {
            let s = cmd_scatter(&input[0], &input[1], &out)?;
            println!("{}", serde_json::to_string(&s).expect("serializes"));
        }
        Command::Reproduce { row, seed, out } => {
            let row: ReproRow = row.parse()?;
            let report = match out {
                Some(dir) => cmd_reproduce(row, seed, &dir)?,
                None => {
                    let dir = tempfile::tempdir()
                        .map_err(|e| Error::Config(format!("cannot create a temporary directory: {e}")))?;
                    cmd_reproduce(row, seed, dir.path())?
                }
            };
            println!("{}", report.summary());
            println!("{}", serde_json::to_string(&report).expect("serializes"));
            if !report.pass {
                return Err(Error::Numerical(format!("{} missed its acceptance threshold", row.name())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
