use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
  "name": "small-grid",
  "topology": { "kind": "grid", "rows": 3, "cols": 3 },
  "data": 4, "computations": 2, "tasks": 6,
  "link_mean": 3.0, "cpu_mean": 5.0, "cache_mean": 10.0,
  "zipf": 1.0, "rate_range": [1.0, 5.0],
  "data_size": 0.2, "result_size": 0.1, "workload": 1.0,
  "target_utilization": 0.4, "cache_scale": 70.0,
  "seed": 1
}"#;

fn netplace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netplace")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = netplace(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn scenario_file(dir: &Path) -> String {
    let p = dir.join("small.json");
    std::fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gen_scenario_writes_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["gen-scenario", "--preset", "geant", "--seed", "4", "--out", out]);
    let spec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("scenario.json")).unwrap()).unwrap();
    assert_eq!(spec["seed"], 4);
    let edges = std::fs::read_to_string(dir.path().join("topology.txt")).unwrap();
    assert_eq!(edges.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).count(), 33);
    // The written file round-trips through the loader.
    let again = dir.path().join("again");
    ok(&["gen-scenario", "--scenario", dir.path().join("scenario.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(
        std::fs::read_to_string(again.join("scenario.json")).unwrap(),
        std::fs::read_to_string(dir.path().join("scenario.json")).unwrap()
    );
}

#[test]
fn optimize_writes_trajectory_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_file(dir.path());
    let gp = dir.path().join("gp");
    ok(&["optimize", "--scenario", &sc, "--method", "gp", "--slots", "50", "--seed", "2", "--out", gp.to_str().unwrap()]);
    assert_eq!(header(&gp.join("trajectory.csv")), "slot,T,residual,total_cache_size");
    assert!(gp.join("strategy.json").exists());
    let gcfw = dir.path().join("gcfw");
    ok(&["optimize", "--scenario", &sc, "--method", "gcfw", "--iters", "10", "--out", gcfw.to_str().unwrap()]);
    assert_eq!(header(&gcfw.join("trajectory.csv")), "iter,G,M,N,T");
    assert_eq!(std::fs::read_to_string(gcfw.join("trajectory.csv")).unwrap().lines().count(), 12);
    // The optimized strategy validates.
    let v = dir.path().join("v");
    let report = ok(&[
        "validate",
        "--scenario",
        &sc,
        "--strategy",
        gcfw.join("strategy.json").to_str().unwrap(),
        "--out",
        v.to_str().unwrap(),
    ]);
    assert!(report.contains("\"loop_free\": true"), "{report}");
}

#[test]
fn simulate_writes_summary_and_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_file(dir.path());
    let out = dir.path().join("sim");
    ok(&["simulate", "--scenario", &sc, "--controller", "static", "--horizon", "50", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(header(&out.join("measurements.csv")), "t,element,metric,value");
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["duplicate_answers"], 0);
    assert_eq!(summary["unanswered"], 0);
    let gp = dir.path().join("simgp");
    ok(&["simulate", "--scenario", &sc, "--controller", "gp", "--horizon", "50", "--out", gp.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(gp.join("trajectory.csv")).unwrap().lines().count(), 6);
}

#[test]
fn compare_and_sweep_write_results() {
    let dir = tempfile::tempdir().unwrap();
    let plan = serde_json::json!({
        "scenarios": [serde_json::from_str::<serde_json::Value>(SMALL).unwrap()],
        "methods": ["gp", "sep_lfu", "cloud_ec"],
        "seeds": [1, 2],
        "configs": { "gp": { "alpha": 0.01, "slot": 10.0, "blocked": "static", "rounding_seed": 0, "max_slots": 100, "tol": 1e-6 } }
    });
    let plan_path = dir.path().join("plan.json");
    std::fs::write(&plan_path, plan.to_string()).unwrap();
    let out = dir.path().join("cmp");
    ok(&["compare", "--plan", plan_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().next().unwrap(), "scenario,method,seed,T,iters,wallclock");
    assert_eq!(results.lines().count(), 1 + 6);
    let norm = std::fs::read_to_string(out.join("normalized.csv")).unwrap();
    assert!(norm.lines().skip(1).any(|l| l.ends_with(",1.0")), "{norm}");

    let sw = dir.path().join("sweep");
    ok(&[
        "sweep",
        "--plan",
        plan_path.to_str().unwrap(),
        "--knob",
        "result_size_ratio",
        "--values",
        "0.5,2",
        "--seed",
        "1",
        "--out",
        sw.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(sw.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "knob,value,scenario,method,seed,T,iters,wallclock,ci_hops,di_hops");
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn hard_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(!netplace(&["gen-scenario", "--preset", "nowhere", "--out", out]).status.success());
    assert!(!netplace(&["gen-scenario", "--scenario", "/nonexistent.json", "--out", out]).status.success());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert!(!netplace(&["optimize", "--scenario", bad.to_str().unwrap(), "--out", out]).status.success());
    assert!(!netplace(&["sweep", "--presets", "geant", "--knob", "beta", "--values", "1", "--out", out]).status.success());
    // A strategy of the wrong shape is rejected.
    let sc = scenario_file(dir.path());
    let s = dir.path().join("s.json");
    std::fs::write(&s, r#"{"ci_phi":[1.0],"ci_y":[],"di_phi":[],"di_y":[]}"#).unwrap();
    assert!(!netplace(&["validate", "--scenario", &sc, "--strategy", s.to_str().unwrap(), "--out", out]).status.success());
}
