// SPDX-License-Identifier: Apache-2.0

//! Cycle-accurate two-phase interpreter with per-cycle statement coverage.
//!
//! Each cycle `t`:
//!
//! 1. if a fault targets cycle `t`, its register bit is inverted; the register
//!    then holds the flipped value until one of its seq_assigns executes;
//! 2. inputs for row `t` are applied and combinational assignments settle in
//!    dependence order;
//! 3. observation points are sampled;
//! 4. clocked processes execute against the settled values and all registers
//!    update simultaneously at the clock edge.
//!
//! Registers start cycle 0 at their reset values.

mod coverage;
mod stimulus;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::fault::FaultDescriptor;
use crate::hdl::{Design, SignalKind, StmtBody, StmtId};

pub use coverage::{coverage_summary, ArmId, CoverageSummary, CoverageTrace};
pub(crate) use stimulus::PreparedStimulus;
pub use stimulus::{Stimulus, StimulusError};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
    #[error("unknown observation point `{0}`")]
    UnknownObservation(String),
    #[error("fault target `{0}` is not a register")]
    NotARegister(String),
    #[error("fault bit {bit} out of range for `{register}` ({width} bits)")]
    BitOutOfRange {
        register: String,
        bit: u32,
        width: u32,
    },
    #[error("fault cycle {cycle} outside the {cycles}-cycle stimulus")]
    CycleOutOfRange { cycle: u32, cycles: usize },
    #[error("golden trace does not match this run: {0}")]
    TraceMismatch(String),
}

/// Half-open range `[start, end)` of injection cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleWindow {
    pub start: u32,
    pub end: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WindowError {
    #[error("cycle window [{start}, {end}) is empty")]
    Empty { start: u32, end: u32 },
    #[error("cycle window [{start}, {end}) exceeds the {cycles}-cycle trace")]
    OutOfRange { start: u32, end: u32, cycles: usize },
}

impl CycleWindow {
    pub fn new(start: u32, end: u32) -> Self {
        Self { start, end }
    }

    pub fn full(cycles: usize) -> Self {
        Self::new(0, cycles as u32)
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cycles(&self) -> std::ops::Range<u32> {
        self.start..self.end
    }

    pub fn check(&self, cycles: usize) -> Result<(), WindowError> {
        if self.is_empty() {
            return Err(WindowError::Empty {
                start: self.start,
                end: self.end,
            });
        }
        if self.end as usize > cycles {
            return Err(WindowError::OutOfRange {
                start: self.start,
                end: self.end,
                cycles,
            });
        }
        Ok(())
    }
}

/// Values of every observation point in every cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObservationTrace {
    pub points: Vec<String>,
    pub per_cycle: Vec<Vec<Bits>>,
}

impl ObservationTrace {
    pub fn cycles(&self) -> usize {
        self.per_cycle.len()
    }

    pub fn get(&self, cycle: usize, point: &str) -> Option<Bits> {
        let col = self.points.iter().position(|p| p == point)?;
        self.per_cycle.get(cycle).map(|row| row[col])
    }

    /// Column of one observation point over all cycles.
    pub fn series(&self, point: &str) -> Option<Vec<Bits>> {
        let col = self.points.iter().position(|p| p == point)?;
        Some(self.per_cycle.iter().map(|row| row[col]).collect())
    }

    /// CSV with a `cycle` column followed by one column per observation point.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("cycle");
        for p in &self.points {
            out.push(',');
            out.push_str(p);
        }
        out.push('\n');
        for (t, row) in self.per_cycle.iter().enumerate() {
            let _ = write!(out, "{t}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Snapshot of simulator state at the start of a cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimState {
    pub register_values: BTreeMap<String, Bits>,
    pub wire_values: BTreeMap<String, Bits>,
    pub cycle: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ResolvedFault {
    pub reg: usize,
    pub bit: u32,
    pub cycle: u32,
}

pub(crate) fn resolve_fault(
    design: &Design,
    fault: &FaultDescriptor,
    cycles: usize,
) -> Result<ResolvedFault, SimError> {
    let reg = design
        .signal_idx(&fault.register)
        .filter(|i| design.signals()[*i].kind == SignalKind::Register)
        .ok_or_else(|| SimError::NotARegister(fault.register.clone()))?;
    let width = design.signals()[reg].width;
    if fault.bit >= width {
        return Err(SimError::BitOutOfRange {
            register: fault.register.clone(),
            bit: fault.bit,
            width,
        });
    }
    if fault.cycle as usize >= cycles {
        return Err(SimError::CycleOutOfRange {
            cycle: fault.cycle,
            cycles,
        });
    }
    Ok(ResolvedFault {
        reg,
        bit: fault.bit,
        cycle: fault.cycle,
    })
}

pub(crate) fn resolve_points(design: &Design, points: &[String]) -> Result<Vec<usize>, SimError> {
    points
        .iter()
        .map(|p| {
            design
                .signal_idx(p)
                .ok_or_else(|| SimError::UnknownObservation(p.clone()))
        })
        .collect()
}

/// Statements and branch arms executed in one cycle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycleCoverage {
    pub statements: BTreeSet<StmtId>,
    pub arms: BTreeSet<ArmId>,
}

/// Stepwise simulator owning its state; one instance per run.
pub struct Simulator<'d> {
    design: &'d Design,
    stimulus: Cow<'d, PreparedStimulus>,
    observe: Vec<usize>,
    fault: Option<ResolvedFault>,
    registers: Vec<usize>,
    values: Vec<u64>,
    next: Vec<u64>,
    sampled: Vec<u64>,
    cycle: u32,
}

impl<'d> Simulator<'d> {
    pub fn new(
        design: &'d Design,
        stimulus: &Stimulus,
        observation_points: &[String],
        fault: Option<&FaultDescriptor>,
    ) -> Result<Self, SimError> {
        let prepared = stimulus.prepare(design)?;
        let observe = resolve_points(design, observation_points)?;
        let fault = fault
            .map(|f| resolve_fault(design, f, prepared.len()))
            .transpose()?;
        Ok(Self::from_prepared(
            design,
            Cow::Owned(prepared),
            observe,
            fault,
        ))
    }

    pub(crate) fn from_prepared(
        design: &'d Design,
        stimulus: Cow<'d, PreparedStimulus>,
        observe: Vec<usize>,
        fault: Option<ResolvedFault>,
    ) -> Self {
        let mut values = vec![0u64; design.signals().len()];
        let mut registers = Vec::with_capacity(design.registers.len());
        for r in &design.registers {
            let i = design.signal_idx(&r.name).expect("declared register");
            values[i] = r.reset_value.value();
            registers.push(i);
        }
        Self {
            design,
            next: values.clone(),
            sampled: vec![0; observe.len()],
            stimulus,
            observe,
            fault,
            registers,
            values,
            cycle: 0,
        }
    }

    pub fn cycle(&self) -> u32 {
        self.cycle
    }

    pub fn cycles(&self) -> usize {
        self.stimulus.len()
    }

    pub fn finished(&self) -> bool {
        self.cycle as usize >= self.stimulus.len()
    }

    pub fn state(&self) -> SimState {
        let mut register_values = BTreeMap::new();
        let mut wire_values = BTreeMap::new();
        for (i, s) in self.design.signals().iter().enumerate() {
            let v = Bits::new(s.width, self.values[i]);
            match s.kind {
                SignalKind::Register => {
                    register_values.insert(s.name.clone(), v);
                }
                SignalKind::Wire | SignalKind::Output => {
                    wire_values.insert(s.name.clone(), v);
                }
                SignalKind::Input => {}
            }
        }
        SimState {
            register_values,
            wire_values,
            cycle: self.cycle,
        }
    }

    /// Runs one full cycle and returns the sampled observation values.
    ///
    /// Panics if the stimulus is exhausted.
    pub fn step(&mut self, mut coverage: Option<&mut CycleCoverage>) -> &[u64] {
        let t = self.cycle;
        assert!(!self.finished(), "stimulus exhausted at cycle {t}");
        if let Some(f) = self.fault {
            if f.cycle == t {
                self.values[f.reg] ^= 1u64 << f.bit;
            }
        }

        for (i, v) in &self.stimulus.rows[t as usize] {
            self.values[*i] = *v;
        }
        for id in self.design.comb_order() {
            if let StmtBody::Assign { target, expr } = &self.design.statement(*id).body {
                self.values[*target] = expr.eval(&self.values);
            }
            if let Some(c) = coverage.as_deref_mut() {
                c.statements.insert(*id);
            }
        }

        for (slot, i) in self.sampled.iter_mut().zip(&self.observe) {
            *slot = self.values[*i];
        }

        for r in &self.registers {
            self.next[*r] = self.values[*r];
        }
        for p in &self.design.processes {
            exec(
                self.design,
                &p.roots,
                &self.values,
                &mut self.next,
                &mut coverage,
            );
        }
        for r in &self.registers {
            self.values[*r] = self.next[*r];
        }
        self.cycle += 1;
        &self.sampled
    }
}

fn exec(
    design: &Design,
    ids: &[StmtId],
    values: &[u64],
    next: &mut [u64],
    coverage: &mut Option<&mut CycleCoverage>,
) {
    for id in ids {
        let s = design.statement(*id);
        match &s.body {
            // Combinational roots were already evaluated in the settle phase.
            StmtBody::Assign { .. } if s.kind == crate::hdl::StmtKind::CombAssign => continue,
            StmtBody::Assign { target, expr } => {
                next[*target] = expr.eval(values);
                if let Some(c) = coverage.as_deref_mut() {
                    c.statements.insert(*id);
                }
            }
            StmtBody::If {
                cond,
                then_arm,
                else_arm,
            } => {
                let taken = cond.eval(values) != 0;
                if let Some(c) = coverage.as_deref_mut() {
                    c.statements.insert(*id);
                    c.arms.insert(ArmId {
                        head: *id,
                        arm: if taken { 0 } else { 1 },
                    });
                }
                exec(
                    design,
                    if taken { then_arm } else { else_arm },
                    values,
                    next,
                    coverage,
                );
            }
            StmtBody::Case {
                subject,
                arms,
                default,
            } => {
                let v = subject.eval(values);
                let hit = arms.iter().position(|a| a.labels.contains(&v));
                if let Some(c) = coverage.as_deref_mut() {
                    c.statements.insert(*id);
                    c.arms.insert(ArmId {
                        head: *id,
                        arm: hit.unwrap_or(arms.len()) as u32,
                    });
                }
                let body = match hit {
                    Some(i) => &arms[i].body,
                    None => default,
                };
                exec(design, body, values, next, coverage);
            }
        }
    }
}

/// Full run: observation trace plus per-cycle coverage. With `fault = None`
/// this is the golden run.
pub fn simulate(
    design: &Design,
    stimulus: &Stimulus,
    observation_points: &[String],
    fault: Option<&FaultDescriptor>,
) -> Result<(ObservationTrace, CoverageTrace), SimError> {
    let mut sim = Simulator::new(design, stimulus, observation_points, fault)?;
    let mut obs = ObservationTrace {
        points: observation_points.to_vec(),
        per_cycle: Vec::with_capacity(stimulus.len()),
    };
    let widths: Vec<u32> = sim
        .observe
        .iter()
        .map(|i| design.signals()[*i].width)
        .collect();
    let mut cov = CoverageTrace::new(design.statements.len());
    while !sim.finished() {
        let mut cycle = CycleCoverage::default();
        let sampled = sim.step(Some(&mut cycle));
        obs.per_cycle.push(
            sampled
                .iter()
                .zip(&widths)
                .map(|(v, w)| Bits::new(*w, *v))
                .collect(),
        );
        cov.per_cycle.push(cycle.statements);
        cov.arms_per_cycle.push(cycle.arms);
    }
    Ok((obs, cov))
}
