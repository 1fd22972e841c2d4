// SPDX-License-Identifier: Apache-2.0

//! Statement dependency graph and backward static slicing.
//!
//! A data edge `(u, d)` means statement `u` reads a signal that statement `d`
//! defines. Dependence is whole-signal and time-agnostic: a use of register
//! `r` depends on every seq_assign to `r`. A control edge `(s, h)` links a
//! statement to every branch head on its `control_parent` chain.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::hdl::{Design, SignalKind, StmtId, StmtKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SliceError {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependencyGraph {
    statement_count: usize,
    data_edges: BTreeSet<(StmtId, StmtId)>,
    control_edges: BTreeSet<(StmtId, StmtId)>,
}

impl DependencyGraph {
    pub fn statement_count(&self) -> usize {
        self.statement_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = StmtId> {
        (0..self.statement_count as u32).map(StmtId)
    }

    pub fn data_edges(&self) -> &BTreeSet<(StmtId, StmtId)> {
        &self.data_edges
    }

    pub fn control_edges(&self) -> &BTreeSet<(StmtId, StmtId)> {
        &self.control_edges
    }

    fn outgoing(
        edges: &BTreeSet<(StmtId, StmtId)>,
        from: StmtId,
    ) -> impl Iterator<Item = StmtId> + '_ {
        edges
            .range((from, StmtId(0))..=(from, StmtId(u32::MAX)))
            .map(|(_, to)| *to)
    }

    /// Definitions `s` reads from.
    pub fn data_predecessors(&self, s: StmtId) -> impl Iterator<Item = StmtId> + '_ {
        Self::outgoing(&self.data_edges, s)
    }

    /// Branch heads enclosing `s`, innermost first is not guaranteed.
    pub fn control_predecessors(&self, s: StmtId) -> impl Iterator<Item = StmtId> + '_ {
        Self::outgoing(&self.control_edges, s)
    }

    /// Drops one data edge. Returns whether it was present.
    ///
    /// Only meant for mutation testing of downstream consumers.
    pub fn remove_data_edge(&mut self, user: StmtId, def: StmtId) -> bool {
        self.data_edges.remove(&(user, def))
    }

    /// The subgraph induced by `members`.
    pub fn restrict(&self, members: &BTreeSet<StmtId>) -> DependencyGraph {
        let keep = |(a, b): &&(StmtId, StmtId)| members.contains(a) && members.contains(b);
        DependencyGraph {
            statement_count: self.statement_count,
            data_edges: self.data_edges.iter().filter(keep).copied().collect(),
            control_edges: self.control_edges.iter().filter(keep).copied().collect(),
        }
    }
}

pub fn build_graph(design: &Design) -> DependencyGraph {
    let mut defs: BTreeMap<&str, Vec<StmtId>> = BTreeMap::new();
    for s in &design.statements {
        if let Some(d) = &s.defines {
            defs.entry(d.as_str()).or_default().push(s.id);
        }
    }

    let mut data_edges = BTreeSet::new();
    let mut control_edges = BTreeSet::new();
    for s in &design.statements {
        for u in &s.uses {
            for d in defs.get(u.as_str()).into_iter().flatten() {
                data_edges.insert((s.id, *d));
            }
        }
        let mut parent = s.control_parent;
        while let Some(p) = parent {
            control_edges.insert((s.id, p));
            parent = design.statement(p).control_parent;
        }
    }
    DependencyGraph {
        statement_count: design.statements.len(),
        data_edges,
        control_edges,
    }
}

/// Backward static slice of one observation point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StaticSlice {
    pub observation_point: String,
    pub members: BTreeSet<StmtId>,
    pub(crate) statement_count: usize,
}

impl StaticSlice {
    pub fn contains(&self, s: StmtId) -> bool {
        self.members.contains(&s)
    }

    pub fn statement_count(&self) -> usize {
        self.statement_count
    }

    /// Text listing of member statements with their source spans.
    pub fn dump(&self, design: &Design) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "static slice of {} ({} of {} statements)",
            self.observation_point,
            self.members.len(),
            design.statements.len()
        );
        let regs: Vec<String> = slice_registers(self, design).into_iter().collect();
        let _ = writeln!(out, "registers: {}", regs.join(", "));
        for id in &self.members {
            let s = design.statement(*id);
            let _ = writeln!(
                out,
                "{:>4}  {:<11}  {:<12}  {}",
                id,
                s.kind.as_str(),
                s.defines.as_deref().unwrap_or("-"),
                s.source_span
            );
        }
        out
    }
}

/// Least fixed point of backward data + control closure from every definition
/// of `observation_point`.
pub fn static_slice(
    graph: &DependencyGraph,
    design: &Design,
    observation_point: &str,
) -> Result<StaticSlice, SliceError> {
    if design.signal(observation_point).is_none() {
        return Err(SliceError::UnknownSignal(observation_point.to_string()));
    }
    let mut members = BTreeSet::new();
    let mut queue: VecDeque<StmtId> = design
        .definitions_of(observation_point)
        .map(|s| s.id)
        .collect();
    while let Some(s) = queue.pop_front() {
        if !members.insert(s) {
            continue;
        }
        for p in graph
            .data_predecessors(s)
            .chain(graph.control_predecessors(s))
        {
            if !members.contains(&p) {
                queue.push_back(p);
            }
        }
    }
    Ok(StaticSlice {
        observation_point: observation_point.to_string(),
        members,
        statement_count: graph.statement_count,
    })
}

/// Registers with a seq_assign inside the slice: the static-slicing fault
/// target set.
pub fn slice_registers(slice: &StaticSlice, design: &Design) -> BTreeSet<String> {
    slice
        .members
        .iter()
        .map(|id| design.statement(*id))
        .filter(|s| s.kind == StmtKind::SeqAssign)
        .filter_map(|s| s.defines.clone())
        .filter(|name| {
            design
                .signal(name)
                .is_some_and(|sig| sig.kind == SignalKind::Register)
        })
        .collect()
}
