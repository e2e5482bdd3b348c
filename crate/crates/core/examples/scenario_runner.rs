//! Runs a scenario config programmatically and lists the artifacts.
//!
//! `cargo run --example scenario_runner -- crates/core/configs/cap_gauss.json`

use std::path::PathBuf;

use riesz_green::scenario::{run, Overrides};

fn main() {
    let config = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("crates/core/configs/hand_gauss.json"));
    let out = std::env::temp_dir().join("rgreen-scenario-example");
    match run(&config, &Overrides { out: Some(out), ..Default::default() }) {
        Ok(o) => {
            println!("task {} -> {} (exit {})", o.report.task, o.out_dir.display(), o.exit_code);
            for a in &o.report.artifacts {
                println!("  {a}");
            }
            for c in &o.report.claims {
                println!("  {} = {:.3e} (tolerance {:.1e}, pass {})", c.name, c.value, c.tolerance, c.pass);
            }
        }
        Err(e) => eprintln!("failed: {e}"),
    }
}
