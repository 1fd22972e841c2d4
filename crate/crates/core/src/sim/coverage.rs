// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::hdl::{Design, StmtId};

/// One outgoing arm of a branch head. For `if`, arm 0 is the then-arm and
/// arm 1 the (possibly implicit) else-arm; for `case`, arms follow the
/// labelled alternatives and the last arm is the default/no-match arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArmId {
    pub head: StmtId,
    pub arm: u32,
}

/// Statements executed in each clock cycle of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageTrace {
    pub per_cycle: Vec<BTreeSet<StmtId>>,
    pub arms_per_cycle: Vec<BTreeSet<ArmId>>,
    pub(crate) statement_count: usize,
}

impl CoverageTrace {
    pub(crate) fn new(statement_count: usize) -> Self {
        Self {
            per_cycle: Vec::new(),
            arms_per_cycle: Vec::new(),
            statement_count,
        }
    }

    pub fn cycles(&self) -> usize {
        self.per_cycle.len()
    }

    pub fn statement_count(&self) -> usize {
        self.statement_count
    }

    /// Union over all cycles, i.e. whole-run statement coverage.
    pub fn covered(&self) -> BTreeSet<StmtId> {
        self.per_cycle.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSummary {
    /// Hit count per statement id.
    pub hits: Vec<u32>,
    pub covered_statements: usize,
    pub total_statements: usize,
    pub block_coverage: f64,
    pub taken_arms: usize,
    pub total_arms: usize,
    pub branch_coverage: f64,
    pub untaken_arms: Vec<ArmId>,
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        100.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Per-statement hit counts plus block and branch coverage percentages.
///
/// Statement and block coverage coincide at statement granularity. A design
/// without statements (or without branches) reports 100%.
pub fn coverage_summary(trace: &CoverageTrace, design: &Design) -> CoverageSummary {
    let mut hits = vec![0u32; design.statements.len()];
    for cycle in &trace.per_cycle {
        for id in cycle {
            hits[id.index()] += 1;
        }
    }
    let covered_statements = hits.iter().filter(|h| **h > 0).count();

    let taken: BTreeSet<ArmId> = trace.arms_per_cycle.iter().flatten().copied().collect();
    let mut untaken_arms = Vec::new();
    let mut total_arms = 0;
    for s in &design.statements {
        for arm in 0..s.arm_count() as u32 {
            total_arms += 1;
            let a = ArmId { head: s.id, arm };
            if !taken.contains(&a) {
                untaken_arms.push(a);
            }
        }
    }
    let taken_arms = total_arms - untaken_arms.len();
    CoverageSummary {
        covered_statements,
        total_statements: hits.len(),
        block_coverage: percent(covered_statements, hits.len()),
        taken_arms,
        total_arms,
        branch_coverage: percent(taken_arms, total_arms),
        untaken_arms,
        hits,
    }
}
