use std::fmt::Write;

use serde::Serialize;

use super::translate::message_path;
use crate::typeck::TypedContract;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopicEntry {
    pub action: String,
    pub name: String,
    #[serde(rename = "type")]
    pub type_: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonitorConfig {
    pub monitor_id: String,
    pub log_path: String,
    pub topics: Vec<TopicEntry>,
}

/// One logging entry per topic of the contract, in declaration order.
pub fn monitor_config(tc: &TypedContract, log_path: &str) -> MonitorConfig {
    let topics = tc
        .contract
        .topics()
        .iter()
        .map(|b| {
            let (name, _) = message_path(tc, b);
            TopicEntry { action: "log".into(), type_: name.replace('/', ".msg."), name }
        })
        .collect();
    MonitorConfig { monitor_id: format!("monitor_{}", tc.node()), log_path: log_path.to_string(), topics }
}

pub fn emit_monitor_config(tc: &TypedContract, log_path: &str) -> String {
    let c = monitor_config(tc, log_path);
    let mut out = String::from("monitors:\n- monitor:\n");
    let _ = writeln!(out, "    id: {}", c.monitor_id);
    let _ = writeln!(out, "    log: {}", c.log_path);
    if c.topics.is_empty() {
        out.push_str("    topics: []\n");
        return out;
    }
    out.push_str("    topics:\n");
    for t in &c.topics {
        let _ = writeln!(out, "     - {{action: {}, name: {}, type: {}}}", t.action, t.name, t.type_);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_document;
    use crate::typeck::check_document;

    #[test]
    fn no_topics() {
        let tc = check_document(&parse_document("node n { inputs() outputs() guarantee(TRUE) }").unwrap()).unwrap().remove(0);
        assert_eq!(emit_monitor_config(&tc, "./n_log.txt"), "monitors:\n- monitor:\n    id: monitor_n\n    log: ./n_log.txt\n    topics: []\n");
    }
}
