//! Front end for the graph DSL: lexing, parsing, type checking, data-race
//! analysis and dead-code removal.

pub mod access;
pub mod ast;
pub mod corpus;
pub mod dce;
pub mod diag;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod types;

pub use access::{analyze_access, AccessSummary, Sync};
pub use ast::Program;
pub use dce::strip_dead_code;
pub use diag::{Diagnostic, Diagnostics, Phase, Span};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_source};
pub use printer::{normalized, pretty_print};
pub use types::{typecheck, SymbolTable, Type};

/// A checked program with its analyses.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub program: Program,
    pub symbols: SymbolTable,
    pub access: AccessSummary,
}

/// Parses, type checks and analyzes `source`.
pub fn compile(source: &str) -> Result<Compiled, Diagnostics> {
    let program = parse_source(source)?;
    let symbols = typecheck(&program)?;
    let access = analyze_access(&program, &symbols);
    Ok(Compiled {
        program,
        symbols,
        access,
    })
}
