//! The `.civ` specification language: lexer, recursive-descent parser,
//! pretty-printer, and the lowering pass that turns surface syntax into
//! model types. The grammar is documented in docs/DSL.md.

pub mod ast;
pub mod lexer;
pub mod lower;
pub mod parse;
pub mod pretty;

pub use ast::{Decl, Expr, ExprKind, SpecFile};
pub use lower::{link, Linked};
pub use parse::{parse, ParseError};
