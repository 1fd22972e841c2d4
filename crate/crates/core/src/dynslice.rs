// SPDX-License-Identifier: Apache-2.0

//! Clock-cycle-long dynamic slices and implicit fault collapsing.
//!
//! A flipped register bit can only reach an observation point through an
//! in-slice statement that reads the register while the flipped value is
//! still held. The value is held from the injection cycle until the next
//! cycle in which one of the register's seq_assigns executes; reads in that
//! cycle happen before the edge and still see the fault.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::deps::{DependencyGraph, StaticSlice};
use crate::fault::{FaultDescriptor, FaultVerdict, Outcome};
use crate::hdl::{Design, SignalKind, StmtId, StmtKind};
use crate::sim::{CoverageTrace, CycleWindow, WindowError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynSliceError {
    #[error("static slice covers {slice} statements but the coverage trace {trace}")]
    DesignMismatch { slice: usize, trace: usize },
    #[error("coverage trace has {statements} statement cycles but {arms} arm cycles")]
    LengthMismatch { statements: usize, arms: usize },
    #[error("dependency graph has {graph} statements, design has {statements}")]
    GraphMismatch { graph: usize, statements: usize },
    #[error("statement {0} in the dynamic slice is not part of the design")]
    UnknownStatement(StmtId),
    #[error(transparent)]
    Window(#[from] WindowError),
}

/// Per-cycle intersection of one static slice with the executed statements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DynamicSliceSet {
    pub observation_point: String,
    pub per_cycle: Vec<BTreeSet<StmtId>>,
}

impl DynamicSliceSet {
    pub fn cycles(&self) -> usize {
        self.per_cycle.len()
    }

    /// CSV with columns `cycle,statements`; statement ids are space separated.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cycle", "statements"])
            .expect("in-memory write");
        for (t, set) in self.per_cycle.iter().enumerate() {
            let ids: Vec<String> = set.iter().map(StmtId::to_string).collect();
            w.write_record([t.to_string(), ids.join(" ")])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

pub fn dynamic_slices(
    static_slice: &StaticSlice,
    coverage: &CoverageTrace,
) -> Result<DynamicSliceSet, DynSliceError> {
    if static_slice.statement_count() != coverage.statement_count() {
        return Err(DynSliceError::DesignMismatch {
            slice: static_slice.statement_count(),
            trace: coverage.statement_count(),
        });
    }
    if coverage.per_cycle.len() != coverage.arms_per_cycle.len() {
        return Err(DynSliceError::LengthMismatch {
            statements: coverage.per_cycle.len(),
            arms: coverage.arms_per_cycle.len(),
        });
    }
    let per_cycle = coverage
        .per_cycle
        .iter()
        .map(|executed| {
            executed
                .intersection(&static_slice.members)
                .copied()
                .collect()
        })
        .collect();
    Ok(DynamicSliceSet {
        observation_point: static_slice.observation_point.clone(),
        per_cycle,
    })
}

/// A register and cycle whose flipped bits may reach the observation point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CriticalFaultTarget {
    pub register: String,
    pub bit: u32,
    pub cycle: u32,
    /// Earliest cycle at or after `cycle` in which an in-slice statement
    /// reads the register.
    pub first_consumer_cycle: u32,
}

impl CriticalFaultTarget {
    pub fn descriptor(&self) -> FaultDescriptor {
        FaultDescriptor::new(self.register.clone(), self.bit, self.cycle)
    }
}

/// Consumers and writers of one register, by statement id.
struct RegisterUse<'d> {
    name: &'d str,
    width: u32,
    consumers: BTreeSet<StmtId>,
    writers: BTreeSet<StmtId>,
    observed: bool,
}

fn register_uses<'d>(
    design: &'d Design,
    graph: &DependencyGraph,
    observation_point: &str,
) -> Vec<RegisterUse<'d>> {
    let mut writers: BTreeMap<&str, BTreeSet<StmtId>> = BTreeMap::new();
    for s in &design.statements {
        if s.kind == StmtKind::SeqAssign {
            if let Some(d) = &s.defines {
                writers.entry(d.as_str()).or_default().insert(s.id);
            }
        }
    }
    let mut consumers: BTreeMap<&str, BTreeSet<StmtId>> = BTreeMap::new();
    for (user, def) in graph.data_edges() {
        if let Some(d) = &design.statement(*def).defines {
            if design.register(d).is_some() {
                consumers.entry(d.as_str()).or_default().insert(*user);
            }
        }
    }
    design
        .signals()
        .iter()
        .filter(|s| s.kind == SignalKind::Register)
        .map(|s| RegisterUse {
            name: &s.name,
            width: s.width,
            consumers: consumers.remove(s.name.as_str()).unwrap_or_default(),
            writers: writers.remove(s.name.as_str()).unwrap_or_default(),
            observed: s.name == observation_point,
        })
        .collect()
}

/// Critical targets for one observation point, one per register bit and
/// injection cycle in `window`, ordered by (register, bit, cycle).
///
/// Consumers are the statements with a data edge into one of the register's
/// definitions, so the result follows the graph actually passed in. An
/// observation point that is itself a register consumes it in every cycle.
pub fn critical_fault_list(
    slices: &DynamicSliceSet,
    design: &Design,
    graph: &DependencyGraph,
    window: CycleWindow,
) -> Result<Vec<CriticalFaultTarget>, DynSliceError> {
    window.check(slices.cycles())?;
    if graph.statement_count() != design.statements.len() {
        return Err(DynSliceError::GraphMismatch {
            graph: graph.statement_count(),
            statements: design.statements.len(),
        });
    }
    if let Some(bad) = slices
        .per_cycle
        .iter()
        .flatten()
        .find(|id| id.index() >= design.statements.len())
    {
        return Err(DynSliceError::UnknownStatement(*bad));
    }

    let mut out = Vec::new();
    for reg in register_uses(design, graph, &slices.observation_point) {
        for t in window.cycles() {
            let consumed = (t as usize..slices.cycles()).find_map(|c| {
                let here = &slices.per_cycle[c];
                if reg.observed || reg.consumers.iter().any(|s| here.contains(s)) {
                    Some(Some(c as u32))
                } else if reg.writers.iter().any(|s| here.contains(s)) {
                    Some(None)
                } else {
                    None
                }
            });
            if let Some(Some(c)) = consumed {
                out.extend((0..reg.width).map(|bit| CriticalFaultTarget {
                    register: reg.name.to_string(),
                    bit,
                    cycle: t,
                    first_consumer_cycle: c,
                }));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// The faults of `universe` that are not critical, each classified
/// `undetected_collapsed` without simulation.
pub fn collapse_report(
    universe: &[FaultDescriptor],
    critical: &[CriticalFaultTarget],
) -> Vec<FaultVerdict> {
    let keep: BTreeSet<FaultDescriptor> = critical.iter().map(|c| c.descriptor()).collect();
    let mut out: Vec<FaultVerdict> = universe
        .iter()
        .filter(|f| !keep.contains(*f))
        .map(|f| FaultVerdict {
            fault: f.clone(),
            outcome: Outcome::UndetectedCollapsed,
            first_divergence_cycle: None,
            sim_time: 0.0,
        })
        .collect();
    out.sort_by(|a, b| a.fault.cmp(&b.fault));
    out.dedup_by(|a, b| a.fault == b.fault);
    out
}

#[derive(Serialize)]
struct TargetRow<'a> {
    register: &'a str,
    bit: u32,
    cycle: u32,
    first_consumer_cycle: Option<u32>,
}

#[derive(Serialize)]
struct CollapsedRow<'a> {
    register: &'a str,
    bit: u32,
    cycle: u32,
    first_consumer_cycle: Option<u32>,
    verdict: &'static str,
}

fn write_rows<T: Serialize>(rows: impl IntoIterator<Item = T>, header: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// `register,bit,cycle,first_consumer_cycle`
pub fn critical_csv(targets: &[CriticalFaultTarget]) -> String {
    write_rows(
        targets.iter().map(|t| TargetRow {
            register: &t.register,
            bit: t.bit,
            cycle: t.cycle,
            first_consumer_cycle: Some(t.first_consumer_cycle),
        }),
        &["register", "bit", "cycle", "first_consumer_cycle"],
    )
}

/// Same columns as [`critical_csv`] plus `verdict`; `first_consumer_cycle`
/// is empty.
pub fn collapse_csv(collapsed: &[FaultVerdict]) -> String {
    write_rows(
        collapsed.iter().map(|v| CollapsedRow {
            register: &v.fault.register,
            bit: v.fault.bit,
            cycle: v.fault.cycle,
            first_consumer_cycle: None,
            verdict: Outcome::UndetectedCollapsed.as_str(),
        }),
        &[
            "register",
            "bit",
            "cycle",
            "first_consumer_cycle",
            "verdict",
        ],
    )
}
