//! The norm language: `norm NAME [priority N] whenever CONDITION then ACTIONS`.
//!
//! Norm files are UTF-8 text (conventionally `.nm`). Conditions read dotted
//! state paths such as `question.id`; actions are calls drawn from a declared
//! vocabulary. `#` starts a comment.

mod ast;
mod diagnostic;
mod lexer;
mod lint;
mod parser;
mod printer;

pub use ast::{ActionCall, Condition, Literal, NormAst, PathRef, RelOp, Term};
pub use diagnostic::{Diagnostic, Pos, Severity, Span};
pub use lexer::{tokenize, Token, TokenKind};
pub use lint::{lint, Kind, SchemaCatalog};
pub use parser::{parse, ParseError};
pub use printer::{
    action_to_string, condition_to_string, literal_to_string, pretty_print, term_to_string,
};
