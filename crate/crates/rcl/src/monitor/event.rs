use std::collections::BTreeMap;
use std::fmt;

use ordered_float::OrderedFloat;
use serde::Serialize;
use thiserror::Error;

use crate::rml::Lit;

/// A field value carried by an event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Num(OrderedFloat<f64>),
    Str(String),
    Bool(bool),
}

impl Value {
    pub fn num(x: f64) -> Value {
        Value::Num(OrderedFloat(x))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(n.0),
            _ => None,
        }
    }
}

impl From<&Lit> for Value {
    fn from(l: &Lit) -> Value {
        match l {
            Lit::Num(n) => Value::num(*n.numer() as f64 / *n.denom() as f64),
            Lit::Str(s) | Lit::Sym(s) => Value::Str(s.clone()),
            Lit::Bool(b) => Value::Bool(*b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "{}", n.0),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Num(n) => s.serialize_f64(n.0),
            Value::Str(x) => s.serialize_str(x),
            Value::Bool(b) => s.serialize_bool(*b),
        }
    }
}

/// A flat set of `field: value` pairs; always has a `topic`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Event {
    pub fields: BTreeMap<String, Value>,
}

impl Event {
    pub fn new(fields: impl IntoIterator<Item = (String, Value)>) -> Event {
        Event { fields: fields.into_iter().collect() }
    }

    pub fn get(&self, k: &str) -> Option<&Value> {
        self.fields.get(k)
    }

    pub fn topic(&self) -> Option<&str> {
        match self.fields.get("topic") {
            Some(Value::Str(s)) => Some(s),
            _ => None,
        }
    }

    /// `self` has every pair of `other`.
    pub fn includes(&self, other: &Event) -> bool {
        other.fields.iter().all(|(k, v)| self.fields.get(k) == Some(v))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<Event>,
    /// Source line of each event, 1-based.
    pub lines: Vec<usize>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn from_events(events: Vec<Event>) -> Trace {
        let lines = (1..=events.len()).collect();
        Trace { events, lines }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("line {0}: {1}")]
    Json(usize, String),
    #[error("line {0}: expected a JSON object")]
    NotObject(usize),
    #[error("line {0}: field `{1}` must be a number, string or boolean")]
    Nested(usize, String),
    #[error("line {0}: event has no string `topic`")]
    MissingTopic(usize),
}

/// Reads JSON lines, one flat object per event. Blank lines are skipped.
pub fn parse_trace(src: &str) -> Result<Trace, TraceError> {
    let mut trace = Trace::default();
    for (i, line) in src.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| TraceError::Json(n, e.to_string()))?;
        let serde_json::Value::Object(map) = v else {
            return Err(TraceError::NotObject(n));
        };
        let mut fields = BTreeMap::new();
        for (k, v) in map {
            let val = match v {
                serde_json::Value::Number(x) => Value::num(x.as_f64().ok_or_else(|| TraceError::Nested(n, k.clone()))?),
                serde_json::Value::String(s) => Value::Str(s),
                serde_json::Value::Bool(b) => Value::Bool(b),
                _ => return Err(TraceError::Nested(n, k)),
            };
            fields.insert(k, val);
        }
        let ev = Event { fields };
        if ev.topic().is_none() {
            return Err(TraceError::MissingTopic(n));
        }
        trace.events.push(ev);
        trace.lines.push(n);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_event() {
        let t = parse_trace("{\"topic\":\"gazebo_radiation_plugins/At\",\"posX\":1.0,\"posY\":2.0}\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.events[0].get("posY"), Some(&Value::num(2.0)));
    }

    #[test]
    fn empty_and_errors() {
        assert!(parse_trace("").unwrap().is_empty());
        assert_eq!(parse_trace("{\"topic\":\"a\"}\n{\"x\":1}").unwrap_err(), TraceError::MissingTopic(2));
        assert_eq!(parse_trace("{\"topic\":\"a\",\"p\":{\"x\":1}}").unwrap_err(), TraceError::Nested(1, "p".into()));
        assert!(matches!(parse_trace("{oops").unwrap_err(), TraceError::Json(1, _)));
    }
}
