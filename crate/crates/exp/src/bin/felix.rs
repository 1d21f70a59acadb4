use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use felix_exp::{run_experiment, ExpError, ExperimentConfig, Kind, Overrides};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error (panic)
  2  usage error, including a config whose kind does not fit the subcommand
  3  malformed config file or unknown key
  4  unknown experiment kind
  5  invalid parameter value
  6  file system error
  7  a run did not converge (outputs are still written)

The worker pool size is read from FELIX_THREADS (unset or 0 uses all cores).
Results do not depend on it.";

#[derive(Parser)]
#[command(name = "felix", version, about = "Prosociality experiments on social graphs", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-player phase diagram (kind = "phase2p").
    Phase(RunArgs),
    /// Prosociality dynamics (kinds cg_pd, er_dynamics, wealth_pd, custom).
    Dynamics(RunArgs),
    /// Commons-game sweep over q (kind = "toc_sweep").
    Toc(RunArgs),
    /// Runs any experiment kind, e.g. from a saved manifest.
    Sweep(RunArgs),
    /// Parses and checks a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config or manifest.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<u64>,
    /// Edge list replacing the configured graph.
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

fn accepts(cmd: &Command, kind: Kind) -> bool {
    match cmd {
        Command::Phase(_) => kind == Kind::Phase2p,
        Command::Toc(_) => kind == Kind::TocSweep,
        Command::Dynamics(_) => kind.runs_dynamics(),
        Command::Sweep(_) | Command::Validate { .. } => true,
    }
}

fn fail(e: &ExpError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Validate { config } => {
            return match ExperimentConfig::load(config).and_then(|c| c.validate()) {
                Ok(()) => {
                    println!("{}: ok", config.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            };
        }
        Command::Phase(a) | Command::Dynamics(a) | Command::Toc(a) | Command::Sweep(a) => a,
    };
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if !accepts(&cli.command, cfg.kind) {
        eprintln!(
            "error: kind `{}` cannot be run by this subcommand; try `felix sweep`",
            cfg.kind.name()
        );
        return ExitCode::from(2);
    }
    cfg.apply(&Overrides {
        seed: args.seed,
        replicates: args.replicates,
        out: args.out.clone(),
        graph_file: args.graph_file.clone(),
    });
    if !args.quiet {
        eprintln!("running {} (seed {})", cfg.kind.name(), cfg.seed);
    }
    let output = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if let Err(e) = output.write_to(&cfg.output.dir) {
        return fail(&e);
    }
    if !args.quiet {
        for f in &output.files {
            eprintln!("wrote {}", cfg.output.dir.join(&f.name).display());
        }
    }
    match output.failure {
        Some(msg) => fail(&ExpError::Convergence(msg)),
        None => ExitCode::SUCCESS,
    }
}
