// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::Serialize;

use super::source::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    DuplicateDeclaration,
    UndeclaredSignal,
    WidthMismatch,
    MultipleDrivers,
    UndrivenSignal,
    CombinationalCycle,
    RegisterOutsideClockedProcess,
    InvalidTarget,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lexical => "lexical error",
            Self::Syntax => "syntax error",
            Self::DuplicateDeclaration => "duplicate declaration",
            Self::UndeclaredSignal => "undeclared signal",
            Self::WidthMismatch => "width mismatch",
            Self::MultipleDrivers => "multiple drivers",
            Self::UndrivenSignal => "undriven signal",
            Self::CombinationalCycle => "combinational cycle",
            Self::RegisterOutsideClockedProcess => "register assigned outside clocked process",
            Self::InvalidTarget => "invalid assignment target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, span: Span, message: impl Into<String>) -> Self {
        Self {
            kind,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}: {}",
            self.span.start,
            self.kind.as_str(),
            self.message
        )
    }
}

/// Every diagnostic produced by a failed parse, ordered by source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub path: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    pub fn has_kind(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{}", self.path, d)?;
        }
        Ok(())
    }
}
