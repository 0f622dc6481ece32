//! Runs a shipped configuration file through the experiment driver.
//!
//! `cargo run --example run_config -- configs/kernel_check.toml`

use wigner_lab::experiment::{run_file, Overrides};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/kernel_check.toml").to_string());
    let overrides = Overrides {
        seed: None,
        workers: Some(1),
        out: Some(std::env::temp_dir().join("wigner-lab-example")),
    };
    match run_file(path.as_ref(), &overrides) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {:.4e} vs {:.4e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.statistic, c.threshold);
            }
            println!("artifacts: {:?}", outcome.artifacts);
            std::process::exit(outcome.exit_code());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(wigner_lab::experiment::error_exit_code(&e));
        }
    }
}
