use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wigner_lab::experiment::{error_exit_code, error_report, run_file, Overrides};

#[derive(Parser)]
#[command(name = "wigner-lab", version, about = "Run a Wigner-matrix experiment from a TOML config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and run one experiment config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Command::Run { config, seed, workers, out } = cli.command;
    match run_file(&config, &Overrides { seed, workers, out }) {
        Ok(outcome) => {
            for c in &outcome.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                let note = if c.enforced { "" } else { " (report only)" };
                println!("{tag} {}: statistic {:.6} threshold {:.6}{note}", c.name, c.statistic, c.threshold);
            }
            for a in &outcome.artifacts {
                log::info!("wrote {}", a.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{}", error_report(&e));
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
