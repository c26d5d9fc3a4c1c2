//! Assume-guarantee contracts for publish/subscribe nodes.
//!
//! The pipeline is: [`syntax`] turns RCL text into [`ast`] values,
//! [`typeck`] resolves them against a context, [`calculus`] composes
//! contracts over a wiring graph into obligations and derived properties,
//! [`discharge`] decides obligations over bounded domains, [`rml`] turns
//! guarantees into monitor specifications, and [`monitor`] checks event
//! traces against them.

pub mod ast;
pub mod diag;
pub mod syntax;
pub mod typeck;
pub mod calculus;
pub mod discharge;
pub mod rml;
pub mod monitor;

pub use ast::{alpha_equal, Contract, Document, Formula, Term};
pub use diag::{Diagnostic, Span};
