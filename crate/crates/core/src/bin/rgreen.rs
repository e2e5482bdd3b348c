use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riesz_green::scenario::{self, Overrides, Relation, Task};

/// Config-driven runner for discrete Riesz/Green potential scenarios.
#[derive(Debug, Parser)]
#[command(name = "rgreen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run a single acceptance criterion (verify-all only), e.g. `5` or `C5`.
    #[arg(long, global = true)]
    filter: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the task described by a scenario config.
    Run { config: PathBuf },
    /// Run the acceptance suite; the config's task must be `verify-all`.
    VerifyAll { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides { out: cli.out, seed: cli.seed, filter: cli.filter };
    let (path, want_verify) = match &cli.command {
        Command::Run { config } => (config, false),
        Command::VerifyAll { config } => (config, true),
    };
    let result = scenario::load(path).and_then(|cfg| {
        let is_verify = matches!(cfg.task, Task::VerifyAll { .. });
        if want_verify && !is_verify {
            return Err(riesz_green::Error::Config {
                location: "task".into(),
                message: format!("verify-all needs task kind verify-all, found {}", cfg.task.name()),
            });
        }
        scenario::run_config(&cfg, &overrides)
    });
    match result {
        Ok(outcome) => {
            for c in &outcome.report.claims {
                let rel = match c.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                };
                let kind = if c.hard { "" } else { " (diagnostic)" };
                println!("[{}] {}: {:.3e} {rel} {:.1e}{kind}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
            }
            println!("wrote {} artifacts to {}", outcome.report.artifacts.len(), outcome.out_dir.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("rgreen: {e}");
            ExitCode::from(scenario::exit_code(&e) as u8)
        }
    }
}
