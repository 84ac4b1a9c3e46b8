use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tunneltime_cli::{output_dir, run_scenario, validate_config, OUT_ENV, SCENARIOS};

#[derive(Parser)]
#[command(name = "tunneltime", version, about = "Wigner trajectories and tunneling delays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its curves and summary
    Run {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long, env = OUT_ENV)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the named scenarios
    ListScenarios,
    /// Check a config file and print the resolved settings
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: Option<String>,
    },
}

fn read(path: Option<&PathBuf>) -> anyhow::Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display())),
        None => Ok(String::new()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { scenario, config, out, threads } => {
            let mut cfg = validate_config(&read(config.as_ref())?, Some(&scenario))?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            let dir = output_dir(out.as_deref(), &cfg);
            let r = run_scenario(&cfg, &dir)?;
            println!("wrote {}", r.curves_path.display());
            println!("wrote {}", r.summary_path.display());
            if let Some(d) = r.summary.delay.or(r.summary.z_offset) {
                println!(
                    "plateau mean {:.6e} a.u., spread {:.3e}, converged {}",
                    d.tau_w, d.plateau_spread, d.converged
                );
            }
        }
        Command::ListScenarios => {
            for s in SCENARIOS {
                println!("{:<8} {}", s.name, s.about);
            }
            println!("{:<8} explicit regime, kappa and ratio from the config", "custom");
        }
        Command::Validate { config, scenario } => {
            let cfg = validate_config(&read(Some(&config))?, scenario.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
        }
    }
    Ok(())
}
