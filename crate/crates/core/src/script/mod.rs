//! SimScript: a small sandboxed imperative language for simulations.
//!
//! Python-flavoured syntax (indentation blocks, `for ... in range(...)`, `while`,
//! `if/elif/else`, list `append`). There is no I/O: the only way a program affects the
//! outside world is through the output builtins `record`, `mark_event` and `plot_decl`.
//! The grammar is documented in `docs/simscript.md`.

pub mod ast;
pub mod builtins;
mod check;
mod interp;
mod lexer;
mod parser;
mod printer;

pub use ast::Program;
pub use check::{static_check, CheckReport, Diagnostic};
pub use interp::{interpret, ExecLimits, RunFailure, RuntimeError, Value};
pub use lexer::{lex, Keyword, LexError, Span, Token, TokenKind};
pub use parser::{parse, parse_source, ParseError};
pub use printer::{number_literal, print_expr, print_program, string_literal, SCRIPT_SENTINEL};

pub const SIMSCRIPT_VERSION: &str = "simscript-1";
