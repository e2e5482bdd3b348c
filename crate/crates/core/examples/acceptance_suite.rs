//! Runs acceptance criteria by id (default: the fast ones) and prints one line each.
//!
//! `cargo run --release --example acceptance_suite -- 1 5 9`

use riesz_green::verify::run_criterion;
use riesz_green::Result;

fn main() -> Result<()> {
    let ids: Vec<String> = std::env::args().skip(1).collect();
    let ids = if ids.is_empty() { ["1", "2", "3", "4", "6", "9"].map(String::from).to_vec() } else { ids };
    for id in &ids {
        println!("{}", run_criterion(id, 0)?.line());
    }
    Ok(())
}
