//! Concrete syntax: lexer, syntax trees, parser and printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::*;
pub use parser::{parse_command, parse_expr, parse_script, parse_stmt, ParseError};
pub use pretty::pretty_block;
