//! Lexing, parsing and printing of RCL text.

mod latex;
mod lexer;
mod parser;
pub(crate) mod render;

pub use latex::{formula as latex_formula, render_latex};
pub use lexer::{is_keyword, KEYWORDS};
pub use parser::{parse_document, parse_document_with_spans, parse_formula, ContractSpans, DocSpans};
pub use render::{render_context, render_contract, render_rcl};
