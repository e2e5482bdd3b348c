//! Acceptance suite: one test per criterion, each printing its pass/fail line.
//!
//! Lines go straight to the process stdout so they show without `--nocapture`.

use std::io::Write;

use riesz_green::verify::{run_criterion, verify_all, CriterionRow};

fn report(row: &CriterionRow) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", row.line());
    let _ = out.flush();
}

fn check(id: &str) {
    let row = run_criterion(id, 0).unwrap_or_else(|e| panic!("criterion {id} errored: {e}"));
    report(&row);
    assert!(row.pass, "{}", row.line());
    assert!(row.runtime <= row.runtime_limit, "criterion {id} took {:.1}s, limit {:.0}s", row.runtime, row.runtime_limit);
}

#[test]
fn criterion_01_hand_instance() {
    check("1");
}

#[test]
fn criterion_02_representation() {
    check("2");
}

#[test]
fn criterion_03_characterization() {
    check("3");
}

#[test]
fn criterion_04_duality() {
    check("4");
}

#[test]
fn criterion_05_closed_forms() {
    check("5");
}

#[test]
fn criterion_06_monotone_families() {
    check("6");
}

#[test]
fn criterion_07_mass_escape_vs_stabilization() {
    check("7");
}

#[test]
fn criterion_08_support_dichotomy() {
    check("8");
}

#[test]
fn criterion_09_balayage_properties() {
    check("9");
}

#[test]
fn criterion_10_determinism() {
    let rep = verify_all(0, Some("10")).expect("determinism run errored");
    assert_eq!(rep.rows.len(), 1);
    let row = &rep.rows[0];
    report(row);
    assert!(row.pass, "{}", row.line());
    assert!(row.runtime <= row.runtime_limit);
}
