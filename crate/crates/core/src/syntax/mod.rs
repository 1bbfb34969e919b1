//! Text formats: the expression grammar and model documents.

mod document;
mod expr;

pub use document::{model_digest, parse_bounds, parse_model, print_model};
pub use expr::{parse_expression, parse_expression_in, ParseError, Scope};
