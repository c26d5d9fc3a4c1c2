use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn contractc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contractc")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn compose_r3(rcl: &Path) -> Output {
    contractc(&[
        "compose",
        path(rcl),
        "--wiring",
        path(&corpus("remote_inspection.wiring")),
        "--rule",
        "r3",
        "--nodes",
        "Navigation,RadiationSensor,agent",
    ])
}

#[test]
fn check_accepts_the_corpus() {
    let o = contractc(&["check", path(&corpus("remote_inspection.rcl")), path(&corpus("agent.rcl")), path(&corpus("arm.rcl"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ok (4 contracts)"));
}

#[test]
fn check_reports_a_dangling_matches() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.rcl");
    fs::write(&f, "node N{\ninputs( a : BOOL )\noutputs( b : BOOL )\ntopics( std_msgs/Bool a matches )\nguarantee( out.b == TRUE ) }\n").unwrap();
    let o = contractc(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with(&format!("{}:4:", f.display())), "{err}");
    assert!(err.contains(": error["), "{err}");
}

#[test]
fn check_of_missing_file_is_a_usage_error() {
    assert_eq!(contractc(&["check", "/nonexistent/x.rcl"]).status.code(), Some(2));
}

#[test]
fn compose_r3_discharges_and_derives() {
    let o = compose_r3(&corpus("remote_inspection.rcl"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("ValidBounded"));
    assert!(out.contains("exists!(x, y in REAL | Navigation.in.position(x, y) == TRUE) and 0 <= RadiationSensor.in.r -> <> "));
}

#[test]
fn compose_with_bounds_file_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("bounds.toml");
    fs::write(&b, "real_grid = [0, 60, 119, 120, 200, 249, 250, 400]\nnatural_bound = 4\n").unwrap();
    let o = contractc(&[
        "--bounds",
        b.to_str().unwrap(),
        "--format",
        "json",
        "compose",
        path(&corpus("remote_inspection.rcl")),
        "--wiring",
        path(&corpus("remote_inspection.wiring")),
        "--rule",
        "r3",
        "--nodes",
        "Navigation,RadiationSensor,agent",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rule"], "R3");
    assert_eq!(v["obligations"][0]["verdict"], "ValidBounded");
}

#[test]
fn compose_r1_over_unwired_chain_is_rejected() {
    let o = contractc(&[
        "compose",
        path(&corpus("remote_inspection.rcl")),
        "--wiring",
        path(&corpus("remote_inspection.wiring")),
        "--rule",
        "r1",
        "--nodes",
        "RadiationSensor,Localisation",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

// The mutated red band cannot falsify an obligation whose consequent is the
// whole RadStat type, so the expected verification failure does not occur.
#[test]
fn compose_with_mutated_sensor_still_validates() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("mutated.rcl");
    let src = fs::read_to_string(corpus("remote_inspection.rcl")).unwrap();
    fs::write(&f, src.replace("out.radiationStatus = red", "out.radiationStatus = green")).unwrap();
    let o = compose_r3(&f);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn synth_agent_matches_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let o = contractc(&["synth", path(&corpus("agent.rcl")), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("agent.rml")).unwrap(), fs::read_to_string(corpus("agent.rml")).unwrap());
    assert_eq!(fs::read_to_string(dir.path().join("agent_config.yaml")).unwrap(), fs::read_to_string(corpus("agent_config.yaml")).unwrap());
}

#[test]
fn synth_writes_two_files_per_contract() {
    let dir = tempfile::tempdir().unwrap();
    let o = contractc(&["synth", path(&corpus("remote_inspection.rcl")), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 8);
}

#[test]
fn synth_trivial_contract() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.rcl");
    fs::write(&f, "node Beacon{\ninputs( go : BOOL )\noutputs( ping : BOOL )\ntopics( std_msgs/Bool ping matches(out.ping) )\nguarantee( out.ping == TRUE ) }\n").unwrap();
    let out = dir.path().join("out");
    let o = contractc(&["synth", f.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rml = fs::read_to_string(out.join("Beacon.rml")).unwrap();
    assert!(rml.contains("t1 = {"), "{rml}");
    let yaml = fs::read_to_string(out.join("Beacon_config.yaml")).unwrap();
    assert!(yaml.contains("id: monitor_Beacon") && yaml.contains("type: std_msgs.msg.Bool}"), "{yaml}");
}

#[test]
fn synth_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        contractc(&["synth", path(&corpus("remote_inspection.rcl")), "--out", d.path().to_str().unwrap()]);
    }
    for e in fs::read_dir(a.path()).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

fn monitor(trace: &str, extra: &[&str]) -> Output {
    let mut args: Vec<&str> = extra.to_vec();
    let rml = corpus("agent.rml");
    let tr = corpus(&format!("traces/{trace}"));
    args.extend(["monitor", path(&rml), path(&tr)]);
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    contractc(&owned.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn monitor_exit_codes() {
    assert_eq!(monitor("mission_compliant.jsonl", &[]).status.code(), Some(0));
    assert_eq!(monitor("empty.jsonl", &[]).status.code(), Some(0));
    let o = monitor("inspect_skipped.jsonl", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violated at event 0"));
}

#[test]
fn monitor_json_report() {
    let o = monitor("inspect_skipped.jsonl", &["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["violation_index"], 0);
    assert_eq!(v["terms"][1]["verdict"], "accepted");
}

#[test]
fn monitor_rejects_malformed_trace() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.jsonl");
    fs::write(&f, "{\"topic\":\"a\"}\n{\"no_topic\":1}\n").unwrap();
    let o = contractc(&["monitor", path(&corpus("agent.rml")), f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn report_can_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("report.txt");
    let o = monitor("empty.jsonl", &["--out", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&f).unwrap().contains("all   accepted"));
}

#[test]
fn latex_renders_a_node() {
    let o = contractc(&["latex", path(&corpus("remote_inspection.rcl")), "--node", "Navigation"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\\textbf{Navigation}"));
    assert_eq!(contractc(&["latex", path(&corpus("agent.rcl")), "--node", "Nope"]).status.code(), Some(2));
}

#[test]
fn help_documents_flags_and_unknown_flags_fail() {
    for (sub, flags) in [
        ("check", &["--bounds", "--out", "--format"][..]),
        ("compose", &["--wiring", "--rule", "--nodes", "--bounds"][..]),
        ("synth", &["--node", "--out"][..]),
        ("monitor", &["--format"][..]),
        ("latex", &["--node"][..]),
    ] {
        let o = contractc(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let h = stdout(&o);
        for f in flags {
            assert!(h.contains(f), "{sub} --help lacks {f}");
        }
    }
    assert_eq!(contractc(&["check", "--frobnicate", "x"]).status.code(), Some(2));
    assert_eq!(contractc(&["explode"]).status.code(), Some(2));
}
