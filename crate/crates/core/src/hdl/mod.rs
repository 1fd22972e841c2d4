// SPDX-License-Identifier: Apache-2.0

//! Mini-HDL frontend: lexing, parsing and elaboration into a statement-level
//! [`Design`].
//!
//! A design is a single module with one implicit clock. Registers hold their
//! reset values at cycle 0 and are updated only by `<=` assignments inside
//! `always` blocks; wires and outputs are each driven by exactly one
//! combinational `assign`. Every assignment and every `if`/`case` head becomes
//! one [`Statement`] with a dense id in textual order.

mod design;
mod diag;
mod elab;
mod lexer;
mod parser;
mod source;

pub(crate) use design::StmtBody;
pub use design::{
    statement_table, Design, Direction, Port, Process, ProcessId, ProcessKind, RegisterDecl,
    Signal, SignalKind, Statement, StatementRow, StmtId, StmtKind, WireDecl,
};
pub use diag::{Diagnostic, DiagnosticKind, ParseError};
pub use source::{LineCol, SourceUnit, Span};

/// Parses and elaborates one source unit.
pub fn parse(source: &SourceUnit) -> Result<Design, ParseError> {
    let fail = |diagnostics| ParseError {
        path: source.path.clone(),
        diagnostics,
    };
    let tokens = lexer::lex(source).map_err(|d| fail(vec![d]))?;
    let module = parser::Parser::new(source, tokens)
        .module()
        .map_err(|d| fail(vec![d]))?;
    elab::elaborate(source, module).map_err(fail)
}

/// Convenience wrapper for in-memory text.
pub fn parse_str(text: &str) -> Result<Design, ParseError> {
    parse(&SourceUnit::new("<input>", text))
}
