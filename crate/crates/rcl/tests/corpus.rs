use rcl::syntax::{parse_document, render_rcl};
use rcl::typeck::check_document;

fn load(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn corpus_checks_cleanly() {
    for f in ["agent.rcl", "remote_inspection.rcl", "arm.rcl"] {
        let doc = parse_document(&load(f)).unwrap_or_else(|e| panic!("{f}: {e:?}"));
        check_document(&doc).unwrap_or_else(|e| panic!("{f}: {e:?}"));
        assert_eq!(parse_document(&render_rcl(&doc)).unwrap(), doc, "{f}");
    }
}
