//! Command-line front end: scenario presets, variational solves,
//! evolution runs, and the study harnesses, all emitting reproducible
//! CSV/JSON artifacts.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "igr1d",
    about = "1D pressureless gas dynamics with entropic shock regularization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Declarative config file (key=value lines or a JSON object); flags win
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Regularization strength (squared length)
    #[arg(long)]
    alpha: Option<f64>,
    /// Single solve time
    #[arg(long)]
    t: Option<f64>,
    /// Comma-separated list of times
    #[arg(long)]
    times: Option<String>,
    /// Number of grid cells
    #[arg(long)]
    grid: Option<usize>,
    /// Scenario preset (see `igr1d scenarios`)
    #[arg(long)]
    scenario: Option<String>,
    /// Linear data form: regularized | raw
    #[arg(long = "data-mode")]
    data_mode: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format: csv | json
    #[arg(long)]
    format: Option<String>,
    /// Seed for random fields and ensembles
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrency: on | off
    #[arg(long)]
    parallel: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the variational problem at one time and write phi.csv + report.json
    Solve(CommonArgs),
    /// Evolve over a time schedule; write frames, Eulerian fields, conservation table
    Evolve(CommonArgs),
    /// Vanishing-regularization ladder against the sticky baseline
    Gamma {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated decreasing alpha ladder
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Nonexpansiveness sampling over seeded random velocity pairs
    Stability {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of random pairs
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Simultaneous space-time refinement of the validation residuals
    Refine {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated increasing cell counts
        #[arg(long)]
        ns: Option<String>,
        /// Comma-separated time steps, one per cell count
        #[arg(long)]
        deltas: Option<String>,
    },
    /// List scenario presets
    Scenarios,
}

fn apply_common(cfg: &mut RunConfig, args: &CommonArgs) -> Result<(), CliError> {
    if let Some(path) = &args.config {
        cfg.load_file(path)?;
    }
    if let Some(v) = args.alpha {
        cfg.set("alpha", &v.to_string())?;
    }
    if let Some(v) = args.t {
        cfg.set("t", &v.to_string())?;
    }
    if let Some(v) = &args.times {
        cfg.set("times", v)?;
    }
    if let Some(v) = args.grid {
        cfg.set("grid", &v.to_string())?;
    }
    if let Some(v) = &args.scenario {
        cfg.set("scenario", v)?;
    }
    if let Some(v) = &args.data_mode {
        cfg.set("data_mode", v)?;
    }
    if let Some(v) = &args.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &args.format {
        cfg.set("format", v)?;
    }
    if let Some(v) = args.seed {
        cfg.set("seed", &v.to_string())?;
    }
    if let Some(v) = &args.parallel {
        cfg.set("parallel", v)?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    // IGR1D_THREADS caps the worker pool for parallel runs
    if let Ok(threads) = std::env::var("IGR1D_THREADS") {
        let threads: usize = threads.parse().map_err(|_| {
            CliError::Config(format!("IGR1D_THREADS must be an integer, got '{threads}'"))
        })?;
        // a later init wins only once; ignore repeat initialization
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }

    let cli = Cli::parse();
    match cli.command {
        Command::Solve(common) => {
            let mut cfg = RunConfig::default();
            apply_common(&mut cfg, &common)?;
            commands::ensure_out_dir(&cfg)?;
            commands::cmd_solve(&cfg)
        }
        Command::Evolve(common) => {
            let mut cfg = RunConfig::default();
            apply_common(&mut cfg, &common)?;
            commands::ensure_out_dir(&cfg)?;
            commands::cmd_evolve(&cfg)
        }
        Command::Gamma { common, alphas } => {
            let mut cfg = RunConfig::default();
            apply_common(&mut cfg, &common)?;
            if let Some(v) = &alphas {
                cfg.set("alphas", v)?;
            }
            commands::ensure_out_dir(&cfg)?;
            commands::cmd_gamma(&cfg)
        }
        Command::Stability { common, pairs } => {
            let mut cfg = RunConfig::default();
            apply_common(&mut cfg, &common)?;
            if let Some(v) = pairs {
                cfg.set("pairs", &v.to_string())?;
            }
            commands::ensure_out_dir(&cfg)?;
            commands::cmd_stability(&cfg)
        }
        Command::Refine { common, ns, deltas } => {
            let mut cfg = RunConfig::default();
            apply_common(&mut cfg, &common)?;
            if let Some(v) = &ns {
                cfg.set("ns", v)?;
            }
            if let Some(v) = &deltas {
                cfg.set("deltas", v)?;
            }
            commands::ensure_out_dir(&cfg)?;
            commands::cmd_refine(&cfg)
        }
        Command::Scenarios => commands::cmd_scenarios(),
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind(), "message": e.message() })
            );
            std::process::exit(e.exit_code());
        }
    }
}
