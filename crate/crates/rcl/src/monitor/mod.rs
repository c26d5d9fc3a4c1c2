//! Offline trace checking. Each named term of an [`RmlSpec`](crate::rml::RmlSpec)
//! is run as a derivative-based monitor over a JSON-lines trace; events on
//! topics that no event type declares are skipped.
//!
//! [`naive_membership`] decides the same question by brute force and is
//! meant for cross-checking on short traces.

mod event;
mod naive;
mod residual;
mod run;

pub use event::{parse_trace, Event, Trace, TraceError, Value};
pub use naive::{naive_membership, OracleError};
pub use residual::{derivative, matches, nullable, ArgValue, Residual};
pub use run::{relevant_events, run, MonitorError, MonitorReport, MonitorState, Status, TermReport, Verdict};
