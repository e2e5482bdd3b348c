use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rgreen"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn capacity_hand_instance_reports_point_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cap");
    let st = bin().args(["run", config("hand_capacity.json").to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert!((r["summary"]["c"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    for claim in r["claims"].as_array().unwrap() {
        assert!(claim["tolerance"].is_number(), "claim without tolerance: {claim}");
    }
}

#[test]
fn gauss_hand_instance_reports_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let st = bin().args(["run", config("hand_gauss.json").to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let r = report(&out);
    let sol = &r["summary"]["solution"];
    assert!((sol["c_constant"].as_f64().unwrap() - 0.9).abs() < 1e-10);
    let w = sol["lambda"]["weights"].as_array().unwrap();
    assert!((w[0].as_f64().unwrap() - 0.6).abs() < 1e-10);
    assert!((w[1].as_f64().unwrap() - 0.4).abs() < 1e-10);
    assert!(r["hypotheses"].as_array().unwrap().iter().any(|h| h["status"] == "assumed"));
    let csv = std::fs::read_to_string(out.join("tables/gauss.csv")).unwrap();
    assert!(csv.starts_with("index,x0,x1,x2,theta,theta_swept,lambda\n"));
    assert_eq!(csv.lines().count(), 4, "{csv}");
}

#[test]
fn malformed_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, "{\"task\": {\"kind\": \"capacity\"},\n \"geometry\": [ }").unwrap();
    let out = tmp.path().join("never");
    let o = bin().args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert!(!out.exists());
}

#[test]
fn validation_and_solver_failures_have_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"task": {"kind": "capacity"}, "alpha": 2.5, "geometry": [{"kind": "points", "name": "a", "points": [[0,0,0],[1,0,0]]}]}"#, 3),
        (r#"{"task": {"kind": "capacity"}, "geometry": [{"kind": "points", "name": "a", "points": [[0,0,0],[1,0,0]]}], "kernel_matrix": [[1,3],[3,1]]}"#, 4),
        (r#"{"task": {"kind": "gauss"}, "geometry": [{"kind": "points", "name": "a", "points": [[0,0,0],[1,0,0],[4,0,0]]}], "regions": {"f": {"indices": [0,1]}}}"#, 2),
    ];
    for (k, (text, code)) in cases.iter().enumerate() {
        let cfg = tmp.path().join(format!("c{k}.json"));
        std::fs::write(&cfg, text).unwrap();
        let out = tmp.path().join(format!("o{k}"));
        let st = bin().args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
        assert_eq!(st.code(), Some(*code), "case {k}");
        assert!(!out.exists());
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let st = bin().args(["run", config("sweep_sphere.json").to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
        assert_eq!(st.code(), Some(0));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["tables/sweep.csv", "tables/potential_profile.csv", "plots/swept.svg", "report.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn verify_all_filter_gives_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = bin()
        .args(["verify-all", config("verify_all.json").to_str().unwrap(), "--filter", "C1", "--seed", "3", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("tables/verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "{csv}");
    assert!(csv.lines().nth(1).unwrap().starts_with("1,hand instance exactness,"));
    assert_eq!(report(&out)["seed"], 3);
}

#[test]
fn verify_all_rejects_other_tasks() {
    let st = bin().args(["verify-all", config("hand_gauss.json").to_str().unwrap()]).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")).unwrap() {
        let p = entry.unwrap().path();
        riesz_green::scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
