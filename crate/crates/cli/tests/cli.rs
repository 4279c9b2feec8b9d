use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uamsched"))
}

fn cases_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("uamsched-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn validate_bundled_files() {
    let net = cases_dir().join("two_link.json");
    let demands = cases_dir().join("ex1_demands.json");
    let o = run(&[
        "validate",
        "-n",
        net.to_str().unwrap(),
        "-d",
        demands.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("ok"));
}

#[test]
fn example_schedule_is_partial() {
    let out = tmp("partial.json");
    let o = run(&[
        "--json",
        "schedule",
        "--case",
        "two_link",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let entries = file["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["demand"], 1);
    assert_eq!(entries[0]["departure_min"].as_f64(), Some(0.0));
    assert_eq!(file["complete"], false);

    let strict = run(&["schedule", "--case", "two_link", "--require-complete"]);
    assert_eq!(strict.status.code(), Some(2));

    let audit = run(&[
        "validate",
        "--case",
        "two_link",
        "-s",
        out.to_str().unwrap(),
    ]);
    assert!(audit.status.success());
}

#[test]
fn analyze_example_network() {
    let o = run(&["--json", "analyze", "--case", "two_link"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["max_flow_exact"], "1/5");
    assert_eq!(v["bottleneck_nodes"], serde_json::json!(["v3"]));
    assert_eq!(v["network_check"]["passes"], false);
    assert!(v["qualifier"].as_str().unwrap().contains("worst-case"));
}

#[test]
fn clashing_schedule_fails_validation() {
    let sched = tmp("clash.json");
    std::fs::write(
        &sched,
        r#"{"entries": [
            {"demand": 1, "departure_min": 0, "spots": {"v2": 1, "v3": 1}},
            {"demand": 2, "departure_min": 3, "spots": {"v2": 1, "v3": 1}}
        ], "sod_min": 16, "lower_bound_min": 16, "complete": true}"#,
    )
    .unwrap();
    let o = run(&[
        "validate",
        "--case",
        "two_link",
        "-s",
        sched.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exits_one() {
    let o = run(&["validate", "-n", "/nonexistent/net.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let broken = tmp("broken.json");
    std::fs::write(
        &broken,
        r#"{"nodes": [], "edges": [], "routes": [{"name": "R", "edges": ["x"]}]}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["validate", "-n", broken.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn static_atlanta_round_trips() {
    let out = tmp("atlanta.json");
    let o = run(&[
        "--json",
        "schedule",
        "--case",
        "atlanta",
        "--static",
        "--budget-ms",
        "2000",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file["complete"], true);
    assert_eq!(file["entries"].as_array().unwrap().len(), 27);
    assert!(file["sod_min"].as_f64().unwrap() <= 1700.0);
    assert!(
        run(&["validate", "--case", "atlanta", "-s", out.to_str().unwrap()])
            .status
            .success()
    );
    let g = run(&["gantt", "--case", "atlanta", "-s", out.to_str().unwrap()]);
    assert!(
        stdout(&g).starts_with("node,demand,spot,block_lo_min,block_hi_min,realized_arrival_min")
    );
}

#[test]
fn simulation_is_clean_and_repeatable() {
    let trace = tmp("trace.csv");
    let args = [
        "--json",
        "simulate",
        "--case",
        "fig3",
        "--seed",
        "5",
        "--trace",
        trace.to_str().unwrap(),
    ];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    let (va, vb) = (json(&a), json(&b));
    assert_eq!(va["violations"], serde_json::json!([]));
    assert_eq!(va["window_breaches"], 0);
    assert_eq!(va["realized_sod_min"], vb["realized_sod_min"]);
    assert!(std::fs::read_to_string(&trace)
        .unwrap()
        .starts_with("time_min,event,demand,node,spot\n"));
}

#[test]
fn generate_from_spec() {
    let out = tmp("gen.json");
    let net = cases_dir().join("fig3.json");
    let spec = cases_dir().join("fig3_dynamic.generator.json");
    let o = run(&[
        "generate",
        "-n",
        net.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--seed",
        "2",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["demands"].as_array().unwrap().len(), 43);
    let again = run(&[
        "validate",
        "-n",
        net.to_str().unwrap(),
        "-d",
        out.to_str().unwrap(),
    ]);
    assert!(again.status.success());
}
