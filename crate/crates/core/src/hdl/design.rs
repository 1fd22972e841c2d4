// SPDX-License-Identifier: Apache-2.0

//! Elaborated statement-level design IR.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{mask, Bits};

use super::source::Span;

/// Dense statement identifier, assigned in textual order starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StmtId(pub u32);

impl StmtId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegisterDecl {
    pub name: String,
    pub width: u32,
    pub reset_value: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WireDecl {
    pub name: String,
    pub width: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Input,
    Output,
    Register,
    Wire,
}

impl SignalKind {
    /// Outputs and wires are both driven by one combinational assignment.
    pub fn is_net(self) -> bool {
        matches!(self, Self::Output | Self::Wire)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signal {
    pub name: String,
    pub kind: SignalKind,
    pub width: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StmtKind {
    CombAssign,
    SeqAssign,
    Branch,
}

impl StmtKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CombAssign => "comb_assign",
            Self::SeqAssign => "seq_assign",
            Self::Branch => "branch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Clocked,
    Combinational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process {
    pub id: ProcessId,
    pub kind: ProcessKind,
    /// Every statement of the process in textual order.
    pub body: Vec<StmtId>,
    /// Top-level statements, executed in order each cycle.
    pub(crate) roots: Vec<StmtId>,
}

/// Resolved expression. Signals are indices into [`Design::signals`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Expr {
    Signal(usize),
    Const(u64),
    Not(Box<Expr>, u32),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Ne(Box<Expr>, Box<Expr>),
    /// Parts MSB first, each with its width.
    Concat(Vec<(Expr, u32)>),
    Index(Box<Expr>, u32),
    Slice(Box<Expr>, u32, u32),
    Mux(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub(crate) fn eval(&self, values: &[u64]) -> u64 {
        match self {
            Expr::Signal(i) => values[*i],
            Expr::Const(v) => *v,
            Expr::Not(e, w) => !e.eval(values) & mask(*w),
            Expr::And(a, b) => a.eval(values) & b.eval(values),
            Expr::Or(a, b) => a.eval(values) | b.eval(values),
            Expr::Xor(a, b) => a.eval(values) ^ b.eval(values),
            Expr::Eq(a, b) => (a.eval(values) == b.eval(values)) as u64,
            Expr::Ne(a, b) => (a.eval(values) != b.eval(values)) as u64,
            Expr::Concat(parts) => parts.iter().fold(0u64, |acc, (e, w)| {
                let shifted = if *w >= 64 { 0 } else { acc << w };
                shifted | e.eval(values)
            }),
            Expr::Index(e, i) => (e.eval(values) >> i) & 1,
            Expr::Slice(e, lo, w) => (e.eval(values) >> lo) & mask(*w),
            Expr::Mux(c, a, b) => {
                if c.eval(values) != 0 {
                    a.eval(values)
                } else {
                    b.eval(values)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CaseArm {
    pub labels: Vec<u64>,
    pub body: Vec<StmtId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum StmtBody {
    Assign {
        target: usize,
        expr: Expr,
    },
    If {
        cond: Expr,
        then_arm: Vec<StmtId>,
        else_arm: Vec<StmtId>,
    },
    Case {
        subject: Expr,
        arms: Vec<CaseArm>,
        default: Vec<StmtId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub id: StmtId,
    pub kind: StmtKind,
    pub defines: Option<String>,
    pub uses: BTreeSet<String>,
    pub control_parent: Option<StmtId>,
    pub process: ProcessId,
    pub source_span: Span,
    pub(crate) body: StmtBody,
}

impl Statement {
    /// Number of outgoing arms of a branch head; 0 for assignments.
    ///
    /// An `if` always has two arms (the else arm may be implicit); a `case`
    /// has one arm per labelled alternative plus the default/no-match arm.
    pub fn arm_count(&self) -> usize {
        match &self.body {
            StmtBody::Assign { .. } => 0,
            StmtBody::If { .. } => 2,
            StmtBody::Case { arms, .. } => arms.len() + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub name: String,
    pub ports: Vec<Port>,
    pub registers: Vec<RegisterDecl>,
    pub wires: Vec<WireDecl>,
    pub processes: Vec<Process>,
    pub statements: Vec<Statement>,
    pub(crate) signals: Vec<Signal>,
    pub(crate) signal_index: BTreeMap<String, usize>,
    /// Combinational assignments in dependence order.
    pub(crate) comb_order: Vec<StmtId>,
}

impl Design {
    pub fn statement(&self, id: StmtId) -> &Statement {
        &self.statements[id.index()]
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn signal(&self, name: &str) -> Option<&Signal> {
        self.signal_index.get(name).map(|i| &self.signals[*i])
    }

    pub(crate) fn signal_idx(&self, name: &str) -> Option<usize> {
        self.signal_index.get(name).copied()
    }

    pub fn register(&self, name: &str) -> Option<&RegisterDecl> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.ports
            .iter()
            .filter(|p| p.direction == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.ports
            .iter()
            .filter(|p| p.direction == Direction::Output)
    }

    /// Statements whose `defines` is `name`.
    pub fn definitions_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Statement> + 'a {
        self.statements
            .iter()
            .filter(move |s| s.defines.as_deref() == Some(name))
    }

    pub(crate) fn comb_order(&self) -> &[StmtId] {
        &self.comb_order
    }
}

/// One row of [`statement_table`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatementRow {
    pub id: StmtId,
    pub kind: StmtKind,
    pub defines: Option<String>,
    pub uses: BTreeSet<String>,
    pub control_parent: Option<StmtId>,
    pub source_span: Span,
}

impl fmt::Display for StatementRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let uses: Vec<&str> = self.uses.iter().map(String::as_str).collect();
        write!(
            f,
            "{:>4}  {:<11}  {:<12}  {{{}}}  parent={}  {}",
            self.id,
            self.kind.as_str(),
            self.defines.as_deref().unwrap_or("-"),
            uses.join(","),
            self.control_parent
                .map(|p| p.to_string())
                .unwrap_or_else(|| "-".into()),
            self.source_span
        )
    }
}

/// Inspection listing, one row per statement ordered by id.
pub fn statement_table(design: &Design) -> Vec<StatementRow> {
    design
        .statements
        .iter()
        .map(|s| StatementRow {
            id: s.id,
            kind: s.kind,
            defines: s.defines.clone(),
            uses: s.uses.clone(),
            control_parent: s.control_parent,
            source_span: s.source_span,
        })
        .collect()
}
