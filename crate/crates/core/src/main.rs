use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cogradio::sim::{self, ExperimentConfig, ExperimentId};
use cogradio::Error;

/// Batch runner for the pairing and transceiver-design experiments.
#[derive(Parser)]
#[command(name = "cogradio", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment config; presets are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the CSV and metadata files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    PairingCompare(RunArgs),
    SmseVsPt(RunArgs),
    ConvergenceTrace(RunArgs),
    SmseCdf(RunArgs),
    SerCurve(RunArgs),
    RelayRatioCurve(RunArgs),
    /// Checks a config file and lists every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recomputes a fixture and stores it as JSON.
    PinFixture {
        /// `reference_relay_ratio` or `reference_smse`.
        name: String,
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

fn exit_for(e: &Error) -> ExitCode {
    ExitCode::from(match e {
        Error::Infeasible { .. } => EXIT_INFEASIBLE,
        Error::InvalidArgument(_) => EXIT_INVALID,
        _ => EXIT_IO,
    })
}

fn load_config(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })?;
    ExperimentConfig::from_json(&text).map_err(|diags| {
        for d in diags {
            eprintln!("{d}");
        }
        ExitCode::from(EXIT_INVALID)
    })
}

fn run_experiment(id: ExperimentId, args: RunArgs) -> ExitCode {
    let mut cfg = match &args.config {
        Some(p) => match load_config(p) {
            Ok(c) => c,
            Err(code) => return code,
        },
        None => ExperimentConfig::preset(id, 0),
    };
    if cfg.experiment != id {
        eprintln!("$.experiment: config is for `{}`, subcommand is `{id}`", cfg.experiment);
        return ExitCode::from(EXIT_INVALID);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args.out.or_else(|| cfg.output.clone().map(PathBuf::from)).unwrap_or_else(|| "results".into());
    let table = match sim::run(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{id}: {e}");
            return exit_for(&e);
        }
    };
    match table.write(&out) {
        Ok(path) => {
            println!("{} rows -> {}", table.rows.len(), path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let id = match cli.command {
        Command::Validate { config } => {
            return match load_config(&config) {
                Ok(_) => {
                    println!("{}: ok", config.display());
                    ExitCode::SUCCESS
                }
                Err(code) => code,
            };
        }
        Command::PinFixture { name, out } => {
            return match sim::pin_fixture(&name, &out) {
                Ok(fx) => {
                    for (k, v) in &fx.values {
                        println!("{k} = {v}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    exit_for(&e)
                }
            };
        }
        Command::PairingCompare(a) => (ExperimentId::PairingCompare, a),
        Command::SmseVsPt(a) => (ExperimentId::SmseVsPt, a),
        Command::ConvergenceTrace(a) => (ExperimentId::ConvergenceTrace, a),
        Command::SmseCdf(a) => (ExperimentId::SmseCdf, a),
        Command::SerCurve(a) => (ExperimentId::SerCurve, a),
        Command::RelayRatioCurve(a) => (ExperimentId::RelayRatioCurve, a),
    };
    run_experiment(id.0, id.1)
}
