// SPDX-License-Identifier: Apache-2.0

//! Elaboration of the syntax tree into a checked [`Design`].

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::bits::{mask, Bits, MAX_WIDTH};

use super::design::{
    CaseArm, Design, Direction, Expr, Port, Process, ProcessId, ProcessKind, RegisterDecl, Signal,
    SignalKind, Statement, StmtBody, StmtId, StmtKind, WireDecl,
};
use super::diag::{Diagnostic, DiagnosticKind};
use super::lexer::Literal;
use super::parser::{AExpr, AExprKind, AStmt, AssignStmt, BinOp, DeclClass, Item, Module, Range};
use super::source::{SourceUnit, Span};

struct Elab<'a> {
    src: &'a SourceUnit,
    diags: Vec<Diagnostic>,
    signals: Vec<Signal>,
    decl_spans: Vec<Span>,
    index: BTreeMap<String, usize>,
    resets: BTreeMap<usize, Bits>,
    statements: Vec<Statement>,
    processes: Vec<Process>,
}

pub(crate) fn elaborate(src: &SourceUnit, module: Module) -> Result<Design, Vec<Diagnostic>> {
    let mut el = Elab {
        src,
        diags: Vec::new(),
        signals: Vec::new(),
        decl_spans: Vec::new(),
        index: BTreeMap::new(),
        resets: BTreeMap::new(),
        statements: Vec::new(),
        processes: Vec::new(),
    };

    for item in &module.items {
        if let Item::Decl(d) = item {
            el.declare(d.class, &d.name, d.name_at, d.width, d.reset);
        }
    }
    for item in &module.items {
        match item {
            Item::Decl(d) => {
                if let Some(driver) = &d.driver {
                    el.comb_process(driver);
                }
            }
            Item::Assign(a) => el.comb_process(a),
            Item::Always(body) => el.clocked_process(body),
        }
    }
    el.check_drivers();
    let comb_order = el.order_comb();

    if !el.diags.is_empty() {
        let mut diags = el.diags;
        diags.sort_by_key(|d| (d.span.lo, d.kind));
        diags.dedup();
        return Err(diags);
    }

    let mut ports = Vec::new();
    let mut registers = Vec::new();
    let mut wires = Vec::new();
    for (i, s) in el.signals.iter().enumerate() {
        match s.kind {
            SignalKind::Input | SignalKind::Output => ports.push(Port {
                name: s.name.clone(),
                direction: if s.kind == SignalKind::Input {
                    Direction::Input
                } else {
                    Direction::Output
                },
                width: s.width,
            }),
            SignalKind::Register => registers.push(RegisterDecl {
                name: s.name.clone(),
                width: s.width,
                reset_value: el.resets.get(&i).copied().unwrap_or(Bits::zero(s.width)),
            }),
            SignalKind::Wire => wires.push(WireDecl {
                name: s.name.clone(),
                width: s.width,
            }),
        }
    }

    Ok(Design {
        name: module.name,
        ports,
        registers,
        wires,
        processes: el.processes,
        statements: el.statements,
        signals: el.signals,
        signal_index: el.index,
        comb_order,
    })
}

impl<'a> Elab<'a> {
    fn span(&self, r: Range) -> Span {
        self.src.span(r.lo, r.hi)
    }

    fn error(&mut self, kind: DiagnosticKind, at: Range, message: impl Into<String>) {
        let span = self.span(at);
        self.diags.push(Diagnostic::new(kind, span, message));
    }

    fn declare(
        &mut self,
        class: DeclClass,
        name: &str,
        at: Range,
        width: u32,
        reset: Option<(Literal, Range)>,
    ) {
        if self.index.contains_key(name) {
            self.error(
                DiagnosticKind::DuplicateDeclaration,
                at,
                format!("`{name}` is already declared"),
            );
            return;
        }
        let kind = match class {
            DeclClass::In => SignalKind::Input,
            DeclClass::Out => SignalKind::Output,
            DeclClass::Reg => SignalKind::Register,
            DeclClass::Wire => SignalKind::Wire,
        };
        let idx = self.signals.len();
        self.signals.push(Signal {
            name: name.to_string(),
            kind,
            width,
        });
        self.index.insert(name.to_string(), idx);
        let span = self.span(at);
        self.decl_spans.push(span);
        if let Some((lit, lit_at)) = reset {
            let ok = match lit.width {
                Some(w) => w == width,
                None => lit.value & !mask(width) == 0,
            };
            if ok {
                self.resets.insert(idx, Bits::new(width, lit.value));
            } else {
                self.error(
                    DiagnosticKind::WidthMismatch,
                    lit_at,
                    format!("reset value of `{name}` does not match its width {width}"),
                );
            }
        }
    }

    fn new_process(&mut self, kind: ProcessKind) -> ProcessId {
        let id = ProcessId(self.processes.len() as u32);
        self.processes.push(Process {
            id,
            kind,
            body: Vec::new(),
            roots: Vec::new(),
        });
        id
    }

    #[allow(clippy::too_many_arguments)]
    fn push_stmt(
        &mut self,
        kind: StmtKind,
        defines: Option<String>,
        uses: BTreeSet<String>,
        control_parent: Option<StmtId>,
        process: ProcessId,
        at: Range,
        body: StmtBody,
    ) -> StmtId {
        let id = StmtId(self.statements.len() as u32);
        let source_span = self.span(at);
        self.statements.push(Statement {
            id,
            kind,
            defines,
            uses,
            control_parent,
            process,
            source_span,
            body,
        });
        self.processes[process.0 as usize].body.push(id);
        id
    }

    fn comb_process(&mut self, a: &AssignStmt) {
        let pid = self.new_process(ProcessKind::Combinational);
        let (target, expr, uses) = self.assignment(a, ProcessKind::Combinational);
        let id = self.push_stmt(
            StmtKind::CombAssign,
            Some(a.target.clone()),
            uses,
            None,
            pid,
            a.at,
            StmtBody::Assign { target, expr },
        );
        self.processes[pid.0 as usize].roots.push(id);
    }

    fn clocked_process(&mut self, body: &[AStmt]) {
        let pid = self.new_process(ProcessKind::Clocked);
        let roots = self.flatten(body, None, pid);
        self.processes[pid.0 as usize].roots = roots;
    }

    fn flatten(&mut self, stmts: &[AStmt], parent: Option<StmtId>, pid: ProcessId) -> Vec<StmtId> {
        let mut ids = Vec::with_capacity(stmts.len());
        for s in stmts {
            let id = match s {
                AStmt::NonBlocking(a) => {
                    let (target, expr, uses) = self.assignment(a, ProcessKind::Clocked);
                    self.push_stmt(
                        StmtKind::SeqAssign,
                        Some(a.target.clone()),
                        uses,
                        parent,
                        pid,
                        a.at,
                        StmtBody::Assign { target, expr },
                    )
                }
                AStmt::If {
                    cond,
                    head,
                    then_arm,
                    else_arm,
                } => {
                    let mut uses = BTreeSet::new();
                    let cond = self.condition(cond, &mut uses);
                    let id = self.push_stmt(
                        StmtKind::Branch,
                        None,
                        uses,
                        parent,
                        pid,
                        *head,
                        StmtBody::If {
                            cond: Expr::Const(0),
                            then_arm: Vec::new(),
                            else_arm: Vec::new(),
                        },
                    );
                    let then_ids = self.flatten(then_arm, Some(id), pid);
                    let else_ids = match else_arm {
                        Some(e) => self.flatten(e, Some(id), pid),
                        None => Vec::new(),
                    };
                    self.statements[id.index()].body = StmtBody::If {
                        cond,
                        then_arm: then_ids,
                        else_arm: else_ids,
                    };
                    id
                }
                AStmt::Case {
                    subject,
                    head,
                    arms,
                    default,
                } => {
                    let mut uses = BTreeSet::new();
                    let resolved = self.resolve(subject, &mut uses);
                    let (subject_expr, width) = resolved.unwrap_or((Expr::Const(0), 0));
                    let id = self.push_stmt(
                        StmtKind::Branch,
                        None,
                        uses,
                        parent,
                        pid,
                        *head,
                        StmtBody::Case {
                            subject: Expr::Const(0),
                            arms: Vec::new(),
                            default: Vec::new(),
                        },
                    );
                    let mut arm_ids = Vec::with_capacity(arms.len());
                    for arm in arms {
                        let mut labels = Vec::with_capacity(arm.labels.len());
                        for (lit, at) in &arm.labels {
                            if width == 0 {
                                continue;
                            }
                            match self.literal_with_width(*lit, width) {
                                Some(v) => labels.push(v),
                                None => self.error(
                                    DiagnosticKind::WidthMismatch,
                                    *at,
                                    format!("case label does not match subject width {width}"),
                                ),
                            }
                        }
                        let body = self.flatten(&arm.body, Some(id), pid);
                        arm_ids.push(CaseArm { labels, body });
                    }
                    let default_ids = match default {
                        Some(d) => self.flatten(d, Some(id), pid),
                        None => Vec::new(),
                    };
                    self.statements[id.index()].body = StmtBody::Case {
                        subject: subject_expr,
                        arms: arm_ids,
                        default: default_ids,
                    };
                    id
                }
            };
            ids.push(id);
        }
        ids
    }

    fn literal_with_width(&self, lit: Literal, width: u32) -> Option<u64> {
        match lit.width {
            Some(w) if w == width => Some(lit.value),
            Some(_) => None,
            None if width == 1 && lit.value <= 1 => Some(lit.value),
            None => None,
        }
    }

    fn condition(&mut self, cond: &AExpr, uses: &mut BTreeSet<String>) -> Expr {
        match self.resolve(cond, uses) {
            Some((e, 1)) => e,
            Some((_, w)) => {
                self.error(
                    DiagnosticKind::WidthMismatch,
                    cond.at,
                    format!("condition must be 1 bit wide, found {w}"),
                );
                Expr::Const(0)
            }
            None => Expr::Const(0),
        }
    }

    /// Resolves an assignment's target and right-hand side in the given
    /// process context, reporting target and width errors.
    fn assignment(
        &mut self,
        a: &AssignStmt,
        context: ProcessKind,
    ) -> (usize, Expr, BTreeSet<String>) {
        let mut uses = BTreeSet::new();
        let rhs = self.resolve(&a.expr, &mut uses);
        let Some(&target) = self.index.get(&a.target) else {
            self.error(
                DiagnosticKind::UndeclaredSignal,
                a.target_at,
                format!("`{}` is not declared", a.target),
            );
            return (usize::MAX, Expr::Const(0), uses);
        };
        let sig = self.signals[target].clone();
        match (context, sig.kind) {
            (_, SignalKind::Input) => self.error(
                DiagnosticKind::InvalidTarget,
                a.target_at,
                format!("input `{}` cannot be assigned", sig.name),
            ),
            (ProcessKind::Combinational, SignalKind::Register) => self.error(
                DiagnosticKind::RegisterOutsideClockedProcess,
                a.target_at,
                format!(
                    "register `{}` may only be assigned with `<=` inside `always`",
                    sig.name
                ),
            ),
            (ProcessKind::Clocked, SignalKind::Wire | SignalKind::Output) => self.error(
                DiagnosticKind::InvalidTarget,
                a.target_at,
                format!(
                    "`{}` is not a register and cannot be assigned inside `always`",
                    sig.name
                ),
            ),
            _ => {}
        }
        let expr = match rhs {
            Some((e, w)) if w == sig.width => e,
            Some((_, w)) => {
                self.error(
                    DiagnosticKind::WidthMismatch,
                    a.expr.at,
                    format!(
                        "`{}` is {} bits wide but the assigned expression is {w} bits",
                        sig.name, sig.width
                    ),
                );
                Expr::Const(0)
            }
            None => Expr::Const(0),
        };
        (target, expr, uses)
    }

    fn resolve(&mut self, e: &AExpr, uses: &mut BTreeSet<String>) -> Option<(Expr, u32)> {
        match &e.kind {
            AExprKind::Ident(name) => match self.index.get(name) {
                Some(&i) => {
                    uses.insert(name.clone());
                    Some((Expr::Signal(i), self.signals[i].width))
                }
                None => {
                    uses.insert(name.clone());
                    self.error(
                        DiagnosticKind::UndeclaredSignal,
                        e.at,
                        format!("`{name}` is not declared"),
                    );
                    None
                }
            },
            AExprKind::Lit(lit) => match lit.width {
                Some(w) => Some((Expr::Const(lit.value), w)),
                None if lit.value <= 1 => Some((Expr::Const(lit.value), 1)),
                None => {
                    self.error(
                        DiagnosticKind::WidthMismatch,
                        e.at,
                        format!(
                            "unsized literal {} has no width; write a sized literal such as 8'd{}",
                            lit.value, lit.value
                        ),
                    );
                    None
                }
            },
            AExprKind::Not(inner) => {
                let (x, w) = self.resolve(inner, uses)?;
                Some((Expr::Not(Box::new(x), w), w))
            }
            AExprKind::Binary(op, a, b) => {
                let ra = self.resolve(a, uses);
                let rb = self.resolve(b, uses);
                let ((xa, wa), (xb, wb)) = (ra?, rb?);
                if wa != wb {
                    self.error(
                        DiagnosticKind::WidthMismatch,
                        e.at,
                        format!("operands are {wa} and {wb} bits wide"),
                    );
                    return None;
                }
                let (xa, xb) = (Box::new(xa), Box::new(xb));
                Some(match op {
                    BinOp::And => (Expr::And(xa, xb), wa),
                    BinOp::Or => (Expr::Or(xa, xb), wa),
                    BinOp::Xor => (Expr::Xor(xa, xb), wa),
                    BinOp::Eq => (Expr::Eq(xa, xb), 1),
                    BinOp::Ne => (Expr::Ne(xa, xb), 1),
                })
            }
            AExprKind::Concat(parts) => {
                let resolved: Vec<_> = parts.iter().map(|p| self.resolve(p, uses)).collect();
                let mut out = Vec::with_capacity(parts.len());
                let mut total = 0u32;
                for r in resolved {
                    let (x, w) = r?;
                    total += w;
                    out.push((x, w));
                }
                if total > MAX_WIDTH {
                    self.error(
                        DiagnosticKind::WidthMismatch,
                        e.at,
                        format!("concatenation is {total} bits wide, maximum is {MAX_WIDTH}"),
                    );
                    return None;
                }
                Some((Expr::Concat(out), total))
            }
            AExprKind::Index(inner, idx) => {
                let (x, w) = self.resolve(inner, uses)?;
                if *idx >= w as u64 {
                    self.error(
                        DiagnosticKind::WidthMismatch,
                        e.at,
                        format!("bit index {idx} out of range for width {w}"),
                    );
                    return None;
                }
                Some((Expr::Index(Box::new(x), *idx as u32), 1))
            }
            AExprKind::Slice(inner, hi, lo) => {
                let (x, w) = self.resolve(inner, uses)?;
                if hi < lo || *hi >= w as u64 {
                    self.error(
                        DiagnosticKind::WidthMismatch,
                        e.at,
                        format!("slice [{hi}:{lo}] out of range for width {w}"),
                    );
                    return None;
                }
                let sw = (hi - lo + 1) as u32;
                Some((Expr::Slice(Box::new(x), *lo as u32, sw), sw))
            }
            AExprKind::Ternary(c, a, b) => {
                let rc = self.resolve(c, uses);
                let ra = self.resolve(a, uses);
                let rb = self.resolve(b, uses);
                let ((xc, wc), (xa, wa), (xb, wb)) = (rc?, ra?, rb?);
                if wc != 1 {
                    self.error(
                        DiagnosticKind::WidthMismatch,
                        c.at,
                        format!("select must be 1 bit wide, found {wc}"),
                    );
                    return None;
                }
                if wa != wb {
                    self.error(
                        DiagnosticKind::WidthMismatch,
                        e.at,
                        format!("select arms are {wa} and {wb} bits wide"),
                    );
                    return None;
                }
                Some((Expr::Mux(Box::new(xc), Box::new(xa), Box::new(xb)), wa))
            }
        }
    }

    fn check_drivers(&mut self) {
        let mut comb_drivers: BTreeMap<usize, Vec<StmtId>> = BTreeMap::new();
        let mut reg_processes: BTreeMap<usize, BTreeSet<ProcessId>> = BTreeMap::new();
        for s in &self.statements {
            if let StmtBody::Assign { target, .. } = s.body {
                if target == usize::MAX {
                    continue;
                }
                match s.kind {
                    StmtKind::CombAssign => comb_drivers.entry(target).or_default().push(s.id),
                    StmtKind::SeqAssign => {
                        reg_processes.entry(target).or_default().insert(s.process);
                    }
                    StmtKind::Branch => {}
                }
            }
        }
        let mut found = Vec::new();
        for (i, sig) in self.signals.iter().enumerate() {
            let decl_span = self.decl_spans[i];
            match sig.kind {
                SignalKind::Wire | SignalKind::Output => {
                    let drivers = comb_drivers.get(&i).map(Vec::as_slice).unwrap_or(&[]);
                    if drivers.is_empty() {
                        found.push(Diagnostic::new(
                            DiagnosticKind::UndrivenSignal,
                            decl_span,
                            format!("`{}` has no driving assignment", sig.name),
                        ));
                    } else if drivers.len() > 1 {
                        let second = self.statements[drivers[1].index()].source_span;
                        let ids: Vec<String> = drivers.iter().map(|d| d.to_string()).collect();
                        found.push(Diagnostic::new(
                            DiagnosticKind::MultipleDrivers,
                            second,
                            format!("`{}` is driven by statements {}", sig.name, ids.join(", ")),
                        ));
                    }
                }
                SignalKind::Register => match reg_processes.get(&i) {
                    None => found.push(Diagnostic::new(
                        DiagnosticKind::UndrivenSignal,
                        decl_span,
                        format!("register `{}` is never assigned", sig.name),
                    )),
                    Some(p) if p.len() > 1 => found.push(Diagnostic::new(
                        DiagnosticKind::MultipleDrivers,
                        decl_span,
                        format!(
                            "register `{}` is assigned in {} processes",
                            sig.name,
                            p.len()
                        ),
                    )),
                    _ => {}
                },
                SignalKind::Input => {}
            }
        }
        self.diags.extend(found);
    }

    /// Topologically orders combinational assignments; reports cycles.
    fn order_comb(&mut self) -> Vec<StmtId> {
        let mut graph: DiGraph<StmtId, ()> = DiGraph::new();
        let mut node_of: BTreeMap<StmtId, NodeIndex> = BTreeMap::new();
        let mut net_driver: BTreeMap<&str, Vec<StmtId>> = BTreeMap::new();
        for s in &self.statements {
            if s.kind == StmtKind::CombAssign {
                node_of.insert(s.id, graph.add_node(s.id));
                if let Some(d) = &s.defines {
                    net_driver.entry(d.as_str()).or_default().push(s.id);
                }
            }
        }
        for s in &self.statements {
            if s.kind != StmtKind::CombAssign {
                continue;
            }
            for u in &s.uses {
                for d in net_driver.get(u.as_str()).into_iter().flatten() {
                    graph.add_edge(node_of[d], node_of[&s.id], ());
                }
            }
        }

        let mut sccs = tarjan_scc(&graph);
        sccs.reverse();
        let mut order = Vec::with_capacity(node_of.len());
        let mut cycles = Vec::new();
        for scc in &sccs {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            if cyclic {
                let mut ids: Vec<StmtId> = scc.iter().map(|n| graph[*n]).collect();
                ids.sort();
                cycles.push(ids);
            } else {
                order.push(graph[scc[0]]);
            }
        }
        for ids in cycles {
            let names: Vec<String> = ids
                .iter()
                .map(|id| {
                    let s = &self.statements[id.index()];
                    format!("{} ({})", id, s.defines.as_deref().unwrap_or("?"))
                })
                .collect();
            let span = self.statements[ids[0].index()].source_span;
            self.diags.push(Diagnostic::new(
                DiagnosticKind::CombinationalCycle,
                span,
                format!(
                    "combinational cycle through statements {}",
                    names.join(", ")
                ),
            ));
        }
        order
    }
}
