use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], config: Option<&str>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skewlab"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.with_extension("toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn default_cone_check_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cone");
    let o = run(&["cone-check"], None, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(summary(&out)["pass"], Value::Bool(true));
    let csv = fs::read_to_string(out.join("margins.csv")).unwrap();
    assert!(csv.starts_with("element,b_ratio,"));
    assert!(out.join("contraction.dat").exists());
}

#[test]
fn undersized_b_fails_with_exit_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cone");
    let o = run(&["cone-check"], Some("[cone]\nb = 1e-7\n"), &out);
    assert_eq!(o.status.code(), Some(2));
    let s = summary(&out);
    assert!(s["infeasible"].as_str().unwrap().contains("σ₁"));
    assert!(s["condition_b_failures"].as_u64().unwrap() > 0);
    assert_eq!(s["checks"]["condition B margins"], Value::Bool(false));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["cone-check", "--seed", "11"], None, &a);
    run(&["cone-check", "--seed", "11", "--threads", "2"], None, &b);
    for f in ["margins.csv", "contraction.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn different_seeds_differ() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["sample", "--seed", "1"], Some("[sample]\ncount = 100\n"), &a);
    run(&["sample", "--seed", "2"], Some("[sample]\ncount = 100\n"), &b);
    assert_ne!(fs::read(a.join("samples.csv")).unwrap(), fs::read(b.join("samples.csv")).unwrap());
}

#[test]
fn constant_observable_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("clt");
    let cfg = "[clt]\nobservable = { name = \"constant\", value = 2.0 }\nn = 100\ncount = 2000\ngk_samples = 20000\n";
    let o = run(&["clt"], Some(cfg), &out);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary(&out)["degenerate"], Value::Bool(true));
}

#[test]
fn dyadic_decay_rate() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("decay");
    let o = run(&["decay"], Some("[decay]\nsamples = 300000\nmax_lag = 6\n"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let tau: f64 = summary(&out)["tau"].as_str().unwrap().parse().unwrap();
    assert!((0.45..=0.55).contains(&tau));
    let dat = fs::read_to_string(out.join("correlations.dat")).unwrap();
    assert!(dat.starts_with("# lag estimate stderr used_in_fit\n"));
}

#[test]
fn dfa_decay_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("dfa");
    let o = run(&["dfa-decay"], Some("[dfa]\nsamples = 200000\nmax_lag = 6\n"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(summary(&out)["oracle_mismatches"], Value::from(0));
}

#[test]
fn sample_writes_header() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s");
    let o = run(&["sample"], Some("[system]\nkind = \"mp\"\n[sample]\ncount = 50\ngrid = 1024\n"), &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("base,itinerary,fiber_x,fiber_y"));
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn bad_config_is_an_infrastructure_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bad");
    let o = run(&["cone-check"], Some("[cone]\nbogus = 1\n"), &out);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["stability"], Some("[stability]\nt_grid = [0.1, 0.2]\n"), &out);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["dfa-decay"], Some("[dfa.system]\ncounts = [[0, 1], [1, 0]]\n"), &out);
    assert_eq!(o.status.code(), Some(1));
}
