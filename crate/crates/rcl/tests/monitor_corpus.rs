mod common;

use common::corpus;
use rcl::monitor::{naive_membership, parse_trace, relevant_events, run, Event, Verdict};
use rcl::rml::{parse_rml, RmlSpec};

fn agent() -> RmlSpec {
    parse_rml(&corpus("agent.rml")).unwrap()
}

/// Verdict of one term computed with the brute-force oracle. Every agent term
/// is a star of single-event terms, so a violation is the first prefix that
/// falls out of the language.
fn oracle_verdict(spec: &RmlSpec, term: usize, trace: &[(usize, &Event)]) -> Verdict {
    let t = &spec.terms[term].1;
    let events: Vec<Event> = trace.iter().map(|(_, e)| (*e).clone()).collect();
    for n in 1..=events.len() {
        if !naive_membership(t, spec, &events[..n], 2).unwrap() {
            return Verdict::Violated(trace[n - 1].0);
        }
    }
    if naive_membership(t, spec, &events, 2).unwrap() {
        Verdict::Accepted
    } else {
        Verdict::Incomplete
    }
}

fn check(name: &str) -> rcl::monitor::MonitorReport {
    let spec = agent();
    let trace = parse_trace(&corpus(&format!("traces/{name}"))).unwrap();
    let report = run(&spec, &trace).unwrap();
    let relevant = relevant_events(&spec, &trace);
    for (i, t) in report.terms.iter().enumerate() {
        assert_eq!(t.verdict, oracle_verdict(&spec, i, &relevant), "{name} {}", t.term);
    }
    report
}

#[test]
fn compliant_mission_is_accepted() {
    let r = check("mission_compliant.jsonl");
    assert_eq!(r.verdict, Verdict::Accepted);
    assert_eq!(r.skipped, 3);
}

#[test]
fn empty_trace_is_accepted() {
    assert_eq!(check("empty.jsonl").verdict, Verdict::Accepted);
}

#[test]
fn skipped_inspection_is_violated() {
    let r = check("inspect_skipped.jsonl");
    assert!(matches!(r.verdict, Verdict::Violated(_)));
}

#[test]
fn inspect_command_satisfies_t2() {
    let r = check("inspect_example.jsonl");
    let t2 = r.terms.iter().find(|t| t.term == "t2").unwrap();
    assert_eq!(t2.verdict, Verdict::Accepted);
}

#[test]
fn red_status_then_move_violates_t3() {
    let r = check("red_then_move.jsonl");
    let t3 = r.terms.iter().find(|t| t.term == "t3").unwrap();
    assert!(matches!(t3.verdict, Verdict::Violated(_)));
}

#[test]
fn json_report_shape() {
    let r = check("inspect_skipped.jsonl");
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 3);
    assert_eq!(v["terms"][0]["term"], "t1");
    assert!(v["violation_index"].is_u64());
}
