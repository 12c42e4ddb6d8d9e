use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use stefan_lab::config::RunConfig;
use stefan_lab::params::validate_scenario;
use stefan_lab::runner::{run_scenario, sweep, Exit};
use stefan_lab::trace::compare_traces;
use stefan_lab::Error;

#[derive(Parser)]
#[command(name = "stefan-lab", version, about = "Closed-loop Stefan problem scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and run a scenario, writing trace, checkpoints and summary.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Steps between Lyapunov checkpoints.
        #[arg(long)]
        checkpoint_every: Option<usize>,
        /// Halve H, Hhat, t_end and grid_n and double dt.
        #[arg(long)]
        fast: bool,
    },
    /// Check the design restrictions without running.
    Validate { config: PathBuf },
    /// Column-wise maximum absolute difference between two CSV files.
    Compare { a: PathBuf, b: PathBuf },
    /// Run several scenarios concurrently, each into `<out-dir>/<config stem>`.
    Sweep {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        fast: bool,
    },
}

fn load(path: &Path, fast: bool, checkpoint_every: Option<usize>) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(path)?;
    if fast {
        cfg = cfg.fast();
    }
    if let Some(k) = checkpoint_every {
        cfg.settings.checkpoint_every = k;
        cfg.settings.check()?;
    }
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<Exit, Error> {
    match cmd {
        Command::Run { config, out_dir, checkpoint_every, fast } => {
            let cfg = load(&config, fast, checkpoint_every)?;
            let outcome = run_scenario(&cfg, &out_dir)?;
            print!("{}", outcome.summary);
            Ok(outcome.exit)
        }
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = validate_scenario(&cfg.scenario, &cfg.physical);
            print!("{report}");
            Ok(if report.passed() { Exit::Success } else { Exit::InvalidConfig })
        }
        Command::Compare { a, b } => {
            for (col, d) in compare_traces(&a, &b)? {
                println!("{col:<20} {d:.6e}");
            }
            Ok(Exit::Success)
        }
        Command::Sweep { configs, out_dir, fast } => {
            let mut jobs = Vec::with_capacity(configs.len());
            for path in &configs {
                let name = path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
                jobs.push((name, load(path, fast, None)?));
            }
            let mut worst = Exit::Success;
            for (name, res) in sweep(&jobs, &out_dir) {
                let exit = match res {
                    Ok(o) => o.exit,
                    Err(e) => {
                        error!("{name}: {e}");
                        Exit::of_error(&e)
                    }
                };
                println!("{name}: exit {}", exit.code());
                worst = worst.max(exit);
            }
            Ok(worst)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(exit) => ExitCode::from(exit.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::of_error(&e).code() as u8)
        }
    }
}
