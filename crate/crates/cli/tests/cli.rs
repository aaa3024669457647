use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dirac_mech::analysis::Analysis;
use dirac_mech::model::Model;
use dirac_mech::report::{build_report, AnalysisReport};
use serde_json::Value;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-mech")).args(args).env("DIRAC_MECH_SEED", "7").output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn edited(name: &str, edit: impl FnOnce(&mut Value)) -> tempfile::NamedTempFile {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(example(name)).unwrap()).unwrap();
    edit(&mut v);
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), serde_json::to_string_pretty(&v).unwrap()).unwrap();
    f
}

#[test]
fn verify_passes_on_every_example() {
    for name in ["nonintegrable_a.json", "nonconstant_rank_b.json", "gauge_rank2.json", "empty_free_particle.json"] {
        let o = run(&["verify", path_str(&example(name))]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn free_particle_has_no_constraints() {
    let o = run(&["--format", "json", "analyze", path_str(&example("empty_free_particle.json"))]);
    assert!(o.status.success());
    let r: AnalysisReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.strata.len(), 1);
    assert!(r.strata[0].constraints.is_empty());
    assert_eq!(r.omega.generic_rank, 4);
}

#[test]
fn wrong_known_value_exits_2() {
    let f = edited("nonintegrable_a.json", |v| {
        v["known"]["hamiltonians"]["all"] = Value::String("p_z^2".into());
    });
    let o = run(&["verify", path_str(f.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hamiltonian on all"));
}

#[test]
fn bad_input_exits_1() {
    let unknown = edited("nonintegrable_a.json", |v| {
        v["colour"] = Value::String("red".into());
    });
    let garbled = edited("nonintegrable_a.json", |v| {
        v["lagrangian"] = Value::String("(z_dot - ".into());
    });
    for path in [unknown.path(), garbled.path(), Path::new("/nonexistent/model.json")] {
        let o = run(&["analyze", path_str(path)]);
        assert_eq!(o.status.code(), Some(1), "{}", path.display());
        assert!(o.stderr.starts_with(b"error: "));
    }
    let a = example("nonintegrable_a.json");
    let o = run(&["bracket", path_str(&a), "--f", "x", "--g", "w"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["integrate", path_str(&a), "--init", "x=1,y=2,z=3,p_x=5,p_z=0.5", "--t", "1", "--dt", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["integrate", path_str(&a), "--lagrangian", "--init", "x=1,y=2,z=3,x_dot=0,y_dot=0,z_dot=1", "--t", "1", "--dt", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_seed_is_input_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_dirac-mech"))
        .args(["analyze", path_str(&example("nonintegrable_a.json"))])
        .env("DIRAC_MECH_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stratum_exit_exits_3_with_last_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let b = example("nonconstant_rank_b.json");
    let o = run(&["integrate", path_str(&b), "--init", "x=1,y=1,p_x=-1,p_y=-1", "--t", "2", "--dt", "0.001", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stratum exit"), "{err}");
    assert!(err.contains("last good state"), "{err}");
    let csv = std::fs::read_to_string(&out).unwrap();
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!(last[0] > 0.4 && last[0] < 0.6, "exit time {}", last[0]);
}

#[test]
fn json_report_round_trips() {
    for name in ["nonintegrable_a.json", "nonconstant_rank_b.json"] {
        let o = run(&["--format", "json", "analyze", path_str(&example(name))]);
        assert!(o.status.success());
        let parsed: AnalysisReport = serde_json::from_slice(&o.stdout).unwrap();
        let model = Model::load(&example(name)).unwrap();
        let direct = build_report(&model, &Analysis::run(&model).unwrap(), 7).unwrap();
        assert_eq!(parsed, direct);
        let again = run(&["--format", "json", "analyze", path_str(&example(name))]);
        assert_eq!(o.stdout, again.stdout);
    }
}

#[test]
fn analyze_reports_warnings() {
    let o = run(&["--format", "json", "analyze", path_str(&example("nonintegrable_a.json"))]);
    let r: AnalysisReport = serde_json::from_slice(&o.stdout).unwrap();
    let codes: Vec<&str> = r.warnings.iter().map(|w| w.code.as_str()).collect();
    assert!(codes.contains(&"initial-data"));
    assert!(codes.contains(&"extension-template"));
    let o = run(&["--format", "json", "analyze", path_str(&example("nonconstant_rank_b.json"))]);
    let r: AnalysisReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.warnings.iter().filter(|w| w.code == "printed-condition").count(), 4);
    let orbits = r.orbits.unwrap();
    assert_eq!(orbits.orbits.len(), 9);
    assert_eq!(orbits.classes.len(), 5);
}

#[test]
fn integrate_a_moves_only_z() {
    let o = run(&["integrate", path_str(&example("nonintegrable_a.json")), "--init", "x=1,y=2,z=3,p_z=0.5", "--t", "2", "--dt", "0.001"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..7], &["t", "x", "y", "z", "p_x", "p_y", "p_z"]);
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((last[0] - 2.0).abs() < 1e-12);
    assert!((last[3] - 4.0).abs() < 1e-12);
    assert!((last[4] + 1.0).abs() < 1e-12);
}

#[test]
fn dirac_bracket_and_modify() {
    let a = example("nonintegrable_a.json");
    let o = run(&["bracket", path_str(&a), "--f", "x", "--g", "y", "--dirac"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("-1/p_z"));
    let o = run(&["--format", "json", "modify", path_str(&a), "--f", "x"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["modified"], "(x*p_z + p_y)/p_z");
}

#[test]
fn reach_prints_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let a = example("nonintegrable_a.json");
    let o = run(&["reach", path_str(&a), "--from", "0,0,0,1,0,0", "--to", "0,0,5,0,1,0", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("area"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1002);
}
