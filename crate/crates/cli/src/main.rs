use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wallrom::pgd::Interpolation;
use wallrom::studies::LearningPeriod;
use wallrom::BasisKind;
use wallrom_cli::commands::{self, BuildArgs, ReferenceArgs, SimulateArgs};
use wallrom_cli::{CliError, CliResult, Context, RunConfig, RunManifest};

#[derive(Parser)]
#[command(name = "wallrom", version, about = "Reduced-order models of transient wall heat conduction")]
struct Cli {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for sweeps; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write gnuplot scripts for the CSV outputs.
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full-order finite-difference reference of the configured case.
    Reference {
        #[arg(long)]
        nodes: Option<usize>,
        /// Dimensionless time step.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Approximation basis and PGD model.
    Build {
        #[arg(long, value_parser = parse_kind)]
        basis: Option<BasisKind>,
        #[arg(short = 'N', long = "modes")]
        n: Option<usize>,
        #[arg(long)]
        dzeta: Option<f64>,
        /// POD learning window: full, half or cycle1.
        #[arg(long, value_parser = parse_period)]
        train: Option<LearningPeriod>,
        /// Reference series CSV a POD basis is learnt from.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
    /// Online simulation of a saved model against the reference.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = parse_interp)]
        interpolation: Option<Interpolation>,
    },
    /// Grid of bases, mode counts and coefficient spacings.
    Sweep,
    /// Error caused by neglecting the inside long-wave exchange.
    ModelError,
    /// Sensor uncertainty against the full-order model residual.
    Uncertainty,
}

fn parse_kind(s: &str) -> Result<BasisKind, String> {
    s.parse().map_err(|e: wallrom::Error| e.to_string())
}

fn parse_period(s: &str) -> Result<LearningPeriod, String> {
    s.parse().map_err(|e: wallrom::Error| e.to_string())
}

fn parse_interp(s: &str) -> Result<Interpolation, String> {
    match s {
        "linear" => Ok(Interpolation::Linear),
        "nearest" => Ok(Interpolation::Nearest),
        other => Err(format!("unknown interpolation '{other}'")),
    }
}

fn run(cli: Cli) -> CliResult<RunManifest> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = Context {
        config,
        out: cli.out,
        seed: cli.seed,
        gnuplot: cli.gnuplot,
    };
    match cli.command {
        Command::Reference { nodes, dt } => commands::reference(&ctx, &ReferenceArgs { nodes, dt }),
        Command::Build {
            basis,
            n,
            dzeta,
            train,
            snapshots,
        } => commands::build(
            &ctx,
            &BuildArgs {
                basis,
                n,
                delta_zeta: dzeta,
                train,
                snapshots,
            },
        ),
        Command::Simulate { model, interpolation } => commands::simulate(&ctx, &SimulateArgs { model, interpolation }),
        Command::Sweep => commands::sweep(&ctx).map(|(m, _)| m),
        Command::ModelError => commands::model_error(&ctx),
        Command::Uncertainty => commands::uncertainty(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(manifest) => {
            let text = serde_json::to_string_pretty(&manifest.summary).expect("summary serializes");
            // a closed pipe is not a failure of the run
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
