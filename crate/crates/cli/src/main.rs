use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod experiment;
mod output;

use commands::Context;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "udwq", version, about = "Delta-coupled detector channels through a scalar field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// E and H tables of the four smearings
    Bilinears(RunArgs),
    /// Output state, coherent information, negativity and signaling
    Channel(RunArgs),
    /// One channel row per value of the sweep parameter
    Sweep(RunArgs),
    /// Input-independence report for causally disconnected detectors
    Spacelike(RunArgs),
    /// Bob strictly inside Alice's lightcone, massless 3+1
    Huygens(RunArgs),
    /// Truncated-Fock simulation against the exact assembly
    OracleCheck(RunArgs),
    /// Bob's tabulated decoding profiles
    BobSolve(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "UDWQ_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> CliResult<()> {
    let (name, args) = match &cli.command {
        Command::Bilinears(a) => ("bilinears", a),
        Command::Channel(a) => ("channel", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Spacelike(a) => ("spacelike", a),
        Command::Huygens(a) => ("huygens", a),
        Command::OracleCheck(a) => ("oracle-check", a),
        Command::BobSolve(a) => ("bob-solve", a),
    };
    if let Some(n) = args.threads {
        // only fails if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Config {
        line: None,
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let (mut cfg, src) = config::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    cfg.seed.get_or_insert(0);
    let dir = output::output_dir(args.out.as_deref(), &cfg);
    log::info!("{name}: writing to {}", dir.display());
    let ctx = Context { cfg, src, dir };
    match name {
        "bilinears" => commands::bilinears(&ctx),
        "channel" => commands::channel(&ctx),
        "sweep" => commands::sweep(&ctx),
        "spacelike" => commands::spacelike(&ctx),
        "huygens" => commands::huygens(&ctx),
        "oracle-check" => commands::oracle_check(&ctx),
        _ => commands::bob_solve(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("udwq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
