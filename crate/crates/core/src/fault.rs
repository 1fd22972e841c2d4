// SPDX-License-Identifier: Apache-2.0

//! Fault lists, single-upset injection and verdict classification.
//!
//! Every faulty run carries exactly one [`FaultDescriptor`]. The flipped bit
//! is visible from the settle phase of `fault.cycle` on and persists until
//! the register's next executed seq_assign. A fault is detected when any
//! observation point differs from the golden trace in some cycle of
//! `[fault.cycle, T)`.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deps::{
    build_graph, slice_registers, static_slice, DependencyGraph, SliceError, StaticSlice,
};
use crate::dynslice::{
    collapse_report, critical_fault_list, dynamic_slices, CriticalFaultTarget, DynSliceError,
    DynamicSliceSet,
};
use crate::hdl::{Design, SignalKind};
use crate::sim::{
    resolve_fault, resolve_points, simulate, CoverageTrace, CycleWindow, ObservationTrace,
    PreparedStimulus, SimError, Simulator, Stimulus, WindowError,
};

/// One single-bit upset: invert `bit` of `register` at the start of `cycle`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaultDescriptor {
    pub register: String,
    pub bit: u32,
    pub cycle: u32,
}

impl FaultDescriptor {
    pub fn new(register: impl Into<String>, bit: u32, cycle: u32) -> Self {
        Self {
            register: register.into(),
            bit,
            cycle,
        }
    }
}

impl fmt::Display for FaultDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]@{}", self.register, self.bit, self.cycle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Detected,
    Undetected,
    UndetectedCollapsed,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Detected => "detected",
            Outcome::Undetected => "undetected",
            Outcome::UndetectedCollapsed => "undetected_collapsed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultVerdict {
    #[serde(flatten)]
    pub fault: FaultDescriptor,
    pub outcome: Outcome,
    pub first_divergence_cycle: Option<u32>,
    /// Wall-clock seconds of the faulty run; 0 for collapsed faults.
    pub sim_time: f64,
}

/// Serialized as its display string, e.g. `"random_sample:500:7"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CampaignMode {
    Exhaustive,
    StaticSlice,
    DynamicSlice,
    RandomSample { count: usize, seed: u64 },
}

impl fmt::Display for CampaignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CampaignMode::Exhaustive => f.write_str("exhaustive"),
            CampaignMode::StaticSlice => f.write_str("static_slice"),
            CampaignMode::DynamicSlice => f.write_str("dynamic_slice"),
            CampaignMode::RandomSample { count, seed } => write!(f, "random_sample:{count}:{seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown campaign mode `{0}` (expected exhaustive, static_slice, dynamic_slice or random_sample:COUNT:SEED)")]
pub struct ModeParseError(String);

impl From<CampaignMode> for String {
    fn from(m: CampaignMode) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for CampaignMode {
    type Error = ModeParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for CampaignMode {
    type Err = ModeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModeParseError(s.to_string());
        match s {
            "exhaustive" => Ok(CampaignMode::Exhaustive),
            "static_slice" => Ok(CampaignMode::StaticSlice),
            "dynamic_slice" => Ok(CampaignMode::DynamicSlice),
            _ => {
                let rest = s.strip_prefix("random_sample:").ok_or_else(bad)?;
                let (count, seed) = rest.split_once(':').ok_or_else(bad)?;
                Ok(CampaignMode::RandomSample {
                    count: count.parse().map_err(|_| bad())?,
                    seed: seed.parse().map_err(|_| bad())?,
                })
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FaultError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    Dynamic(#[from] DynSliceError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("{mode} mode needs {artifact}")]
    MissingArtifact { mode: String, artifact: String },
    #[error("random sample of {count} exceeds the {universe}-fault universe")]
    SampleTooLarge { count: usize, universe: usize },
    #[error("no observation points")]
    NoObservationPoints,
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Every (register, bit, cycle) over all registers and the window, ordered.
pub fn fault_universe(design: &Design, window: CycleWindow) -> Vec<FaultDescriptor> {
    let mut regs: Vec<_> = design
        .signals()
        .iter()
        .filter(|s| s.kind == SignalKind::Register)
        .collect();
    regs.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    for r in regs {
        for bit in 0..r.width {
            for t in window.cycles() {
                out.push(FaultDescriptor::new(r.name.clone(), bit, t));
            }
        }
    }
    out
}

/// Slicing artifacts a mode may need. Each slice list holds one entry per
/// observation point.
#[derive(Debug, Clone, Copy, Default)]
pub struct SliceInputs<'a> {
    pub graph: Option<&'a DependencyGraph>,
    pub static_slices: Option<&'a [StaticSlice]>,
    pub dynamic_slices: Option<&'a [DynamicSliceSet]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultList {
    pub mode: CampaignMode,
    pub window: CycleWindow,
    pub universe_size: usize,
    /// Faults to simulate, ordered and free of duplicates.
    pub inject: Vec<FaultDescriptor>,
    /// Dynamic mode only: the complement of `inject`, pre-classified.
    pub collapsed: Vec<FaultVerdict>,
    /// Dynamic mode only.
    pub critical: Vec<CriticalFaultTarget>,
}

fn per_point<'a, T>(
    list: Option<&'a [T]>,
    point: impl Fn(&T) -> &str,
    observation_points: &[String],
    mode: &CampaignMode,
    what: &str,
) -> Result<Vec<&'a T>, FaultError> {
    let missing = |p: &str| FaultError::MissingArtifact {
        mode: mode.to_string(),
        artifact: format!("the {what} of `{p}`"),
    };
    let list = list.ok_or_else(|| missing(&observation_points.join(", ")))?;
    observation_points
        .iter()
        .map(|p| {
            list.iter()
                .find(|s| point(s) == p)
                .ok_or_else(|| missing(p))
        })
        .collect()
}

pub fn generate_fault_list(
    design: &Design,
    mode: &CampaignMode,
    inputs: &SliceInputs<'_>,
    window: CycleWindow,
    observation_points: &[String],
) -> Result<FaultList, FaultError> {
    if window.is_empty() {
        return Err(WindowError::Empty {
            start: window.start,
            end: window.end,
        }
        .into());
    }
    if observation_points.is_empty() {
        return Err(FaultError::NoObservationPoints);
    }
    let universe = fault_universe(design, window);
    let mut list = FaultList {
        mode: mode.clone(),
        window,
        universe_size: universe.len(),
        inject: Vec::new(),
        collapsed: Vec::new(),
        critical: Vec::new(),
    };
    match mode {
        CampaignMode::Exhaustive => list.inject = universe,
        CampaignMode::StaticSlice => {
            let slices = per_point(
                inputs.static_slices,
                |s| &s.observation_point,
                observation_points,
                mode,
                "static slice",
            )?;
            let regs: BTreeSet<String> = slices
                .into_iter()
                .flat_map(|s| slice_registers(s, design))
                .collect();
            list.inject = universe
                .into_iter()
                .filter(|f| regs.contains(&f.register))
                .collect();
        }
        CampaignMode::DynamicSlice => {
            let slices = per_point(
                inputs.dynamic_slices,
                |s| &s.observation_point,
                observation_points,
                mode,
                "dynamic slices",
            )?;
            let graph = inputs.graph.ok_or_else(|| FaultError::MissingArtifact {
                mode: mode.to_string(),
                artifact: "the dependency graph".into(),
            })?;
            // Keep the earliest consumer when a target is critical for
            // several observation points.
            let mut merged: BTreeMap<FaultDescriptor, CriticalFaultTarget> = BTreeMap::new();
            for s in slices {
                for t in critical_fault_list(s, design, graph, window)? {
                    merged
                        .entry(t.descriptor())
                        .and_modify(|e| {
                            e.first_consumer_cycle =
                                e.first_consumer_cycle.min(t.first_consumer_cycle)
                        })
                        .or_insert(t);
                }
            }
            list.critical = merged.into_values().collect();
            list.inject = list.critical.iter().map(|c| c.descriptor()).collect();
            list.collapsed = collapse_report(&universe, &list.critical);
        }
        CampaignMode::RandomSample { count, seed } => {
            if *count > universe.len() {
                return Err(FaultError::SampleTooLarge {
                    count: *count,
                    universe: universe.len(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut picked = rand::seq::index::sample(&mut rng, universe.len(), *count).into_vec();
            picked.sort_unstable();
            list.inject = picked.into_iter().map(|i| universe[i].clone()).collect();
        }
    }
    Ok(list)
}

/// Reusable faulty-run executor bound to one golden trace.
pub struct Injector<'d> {
    design: &'d Design,
    stimulus: PreparedStimulus,
    observe: Vec<usize>,
    golden: Vec<Vec<u64>>,
}

impl<'d> Injector<'d> {
    pub fn new(
        design: &'d Design,
        stimulus: &Stimulus,
        golden: &ObservationTrace,
    ) -> Result<Self, FaultError> {
        let stimulus = stimulus.prepare(design).map_err(SimError::from)?;
        let observe = resolve_points(design, &golden.points)?;
        if golden.per_cycle.len() != stimulus.len()
            || golden.per_cycle.iter().any(|r| r.len() != observe.len())
        {
            return Err(SimError::TraceMismatch(format!(
                "golden trace has {} cycles for {} points, stimulus has {} cycles",
                golden.per_cycle.len(),
                golden.points.len(),
                stimulus.len()
            ))
            .into());
        }
        let golden = golden
            .per_cycle
            .iter()
            .map(|r| r.iter().map(|b| b.value()).collect())
            .collect();
        Ok(Self {
            design,
            stimulus,
            observe,
            golden,
        })
    }

    /// Simulates one fault, stopping at the first divergence.
    pub fn run(&self, fault: &FaultDescriptor) -> Result<FaultVerdict, FaultError> {
        let start = Instant::now();
        let resolved = resolve_fault(self.design, fault, self.stimulus.len())?;
        let mut sim = Simulator::from_prepared(
            self.design,
            Cow::Borrowed(&self.stimulus),
            self.observe.clone(),
            Some(resolved),
        );
        let mut first = None;
        while !sim.finished() {
            let t = sim.cycle();
            let sampled = sim.step(None);
            if t >= fault.cycle && sampled != self.golden[t as usize].as_slice() {
                first = Some(t);
                break;
            }
        }
        Ok(FaultVerdict {
            fault: fault.clone(),
            outcome: if first.is_some() {
                Outcome::Detected
            } else {
                Outcome::Undetected
            },
            first_divergence_cycle: first,
            sim_time: start.elapsed().as_secs_f64(),
        })
    }
}

pub fn inject_and_classify(
    design: &Design,
    stimulus: &Stimulus,
    golden: &ObservationTrace,
    fault: &FaultDescriptor,
    observation_points: &[String],
) -> Result<FaultVerdict, FaultError> {
    if golden.points != observation_points {
        return Err(SimError::TraceMismatch(format!(
            "golden trace observes [{}], run observes [{}]",
            golden.points.join(", "),
            observation_points.join(", ")
        ))
        .into());
    }
    Injector::new(design, stimulus, golden)?.run(fault)
}

/// Runs every fault on a pool of `parallelism` workers. The result is ordered
/// by fault descriptor whatever the schedule.
pub fn execute_fault_list(
    injector: &Injector<'_>,
    faults: &[FaultDescriptor],
    parallelism: usize,
) -> Result<Vec<FaultVerdict>, FaultError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| FaultError::Pool(e.to_string()))?;
    let mut verdicts = pool.install(|| {
        faults
            .par_iter()
            .map(|f| injector.run(f))
            .collect::<Result<Vec<_>, _>>()
    })?;
    verdicts.sort_by(|a, b| a.fault.cmp(&b.fault));
    Ok(verdicts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultTime {
    #[serde(flatten)]
    pub fault: FaultDescriptor,
    pub seconds: f64,
}

/// Wall-clock profile of one campaign, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingProfile {
    pub golden_time: f64,
    pub per_fault_times: Vec<FaultTime>,
    /// Golden run plus the sum of all faulty runs.
    pub total_cpu_time: f64,
}

impl TimingProfile {
    fn new(golden_time: f64, verdicts: &[FaultVerdict]) -> Self {
        let per_fault_times: Vec<FaultTime> = verdicts
            .iter()
            .filter(|v| v.outcome != Outcome::UndetectedCollapsed)
            .map(|v| FaultTime {
                fault: v.fault.clone(),
                seconds: v.sim_time,
            })
            .collect();
        let total_cpu_time = golden_time + per_fault_times.iter().map(|f| f.seconds).sum::<f64>();
        Self {
            golden_time,
            per_fault_times,
            total_cpu_time,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("timing profile serializes")
    }
}

/// Everything one campaign produced, including the intermediate artifacts.
#[derive(Debug, Clone)]
pub struct CampaignRun {
    pub observation_points: Vec<String>,
    pub graph: DependencyGraph,
    pub static_slices: Vec<StaticSlice>,
    pub golden: ObservationTrace,
    pub coverage: CoverageTrace,
    pub dynamic_slices: Vec<DynamicSliceSet>,
    pub fault_list: FaultList,
    /// Simulated and collapsed verdicts, ordered by fault descriptor.
    pub verdicts: Vec<FaultVerdict>,
    pub timing: TimingProfile,
}

impl CampaignRun {
    pub fn injected(&self) -> usize {
        self.fault_list.inject.len()
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.verdicts
            .iter()
            .filter(|v| v.outcome == outcome)
            .count()
    }

    pub fn detected(&self) -> BTreeSet<FaultDescriptor> {
        self.verdicts
            .iter()
            .filter(|v| v.outcome == Outcome::Detected)
            .map(|v| v.fault.clone())
            .collect()
    }
}

/// Golden run, slicing, fault-list generation and injection. `window`
/// defaults to the whole stimulus.
pub fn run_campaign(
    design: &Design,
    stimulus: &Stimulus,
    observation_points: &[String],
    mode: &CampaignMode,
    window: Option<CycleWindow>,
    parallelism: usize,
) -> Result<CampaignRun, FaultError> {
    run_campaign_with_graph(
        design,
        build_graph(design),
        stimulus,
        observation_points,
        mode,
        window,
        parallelism,
    )
}

/// As [`run_campaign`], slicing over a caller-supplied dependency graph.
pub fn run_campaign_with_graph(
    design: &Design,
    graph: DependencyGraph,
    stimulus: &Stimulus,
    observation_points: &[String],
    mode: &CampaignMode,
    window: Option<CycleWindow>,
    parallelism: usize,
) -> Result<CampaignRun, FaultError> {
    if observation_points.is_empty() {
        return Err(FaultError::NoObservationPoints);
    }
    let window = window.unwrap_or(CycleWindow::full(stimulus.len()));
    window.check(stimulus.len())?;

    let static_slices = observation_points
        .iter()
        .map(|p| static_slice(&graph, design, p))
        .collect::<Result<Vec<_>, _>>()?;

    let start = Instant::now();
    let (golden, coverage) = simulate(design, stimulus, observation_points, None)?;
    let golden_time = start.elapsed().as_secs_f64();

    let dynamic = static_slices
        .iter()
        .map(|s| dynamic_slices(s, &coverage))
        .collect::<Result<Vec<_>, _>>()?;

    let inputs = SliceInputs {
        graph: Some(&graph),
        static_slices: Some(&static_slices),
        dynamic_slices: Some(&dynamic),
    };
    let fault_list = generate_fault_list(design, mode, &inputs, window, observation_points)?;

    let injector = Injector::new(design, stimulus, &golden)?;
    let mut verdicts = execute_fault_list(&injector, &fault_list.inject, parallelism)?;
    let timing = TimingProfile::new(golden_time, &verdicts);
    verdicts.extend(fault_list.collapsed.iter().cloned());
    verdicts.sort_by(|a, b| a.fault.cmp(&b.fault));

    Ok(CampaignRun {
        observation_points: observation_points.to_vec(),
        graph,
        static_slices,
        golden,
        coverage,
        dynamic_slices: dynamic,
        fault_list,
        verdicts,
        timing,
    })
}

#[derive(Serialize)]
struct VerdictRow<'a> {
    register: &'a str,
    bit: u32,
    cycle: u32,
    outcome: &'static str,
    first_divergence_cycle: Option<u32>,
    sim_time: f64,
}

/// `register,bit,cycle,outcome,first_divergence_cycle,sim_time`
pub fn verdicts_csv(verdicts: &[FaultVerdict]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for v in verdicts {
        w.serialize(VerdictRow {
            register: &v.fault.register,
            bit: v.fault.bit,
            cycle: v.fault.cycle,
            outcome: v.outcome.as_str(),
            first_divergence_cycle: v.first_divergence_cycle,
            sim_time: v.sim_time,
        })
        .expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    let text = String::from_utf8(bytes).expect("utf-8 csv");
    if text.is_empty() {
        "register,bit,cycle,outcome,first_divergence_cycle,sim_time\n".into()
    } else {
        text
    }
}

pub fn verdicts_json(verdicts: &[FaultVerdict]) -> String {
    serde_json::to_string_pretty(verdicts).expect("verdicts serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdl::parse_str;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn chop() -> Design {
        parse_str(include_str!("../fixtures/chop.mhdl")).unwrap()
    }

    fn chop_ref() -> Stimulus {
        Stimulus::from_csv_str(include_str!("../fixtures/chop_ref.csv")).unwrap()
    }

    fn pipeline() -> Design {
        parse_str("design p; in SOURCE; reg FF = 0; out OUT = FF; always { FF <= SOURCE; } end")
            .unwrap()
    }

    #[test]
    fn mode_strings_roundtrip() {
        for m in [
            CampaignMode::Exhaustive,
            CampaignMode::StaticSlice,
            CampaignMode::DynamicSlice,
            CampaignMode::RandomSample { count: 7, seed: 42 },
        ] {
            assert_eq!(m.to_string().parse::<CampaignMode>().unwrap(), m);
        }
        assert!("random_sample:7".parse::<CampaignMode>().is_err());
        assert!("static".parse::<CampaignMode>().is_err());
    }

    #[test]
    fn exhaustive_counts_regs_bits_cycles() {
        let d = parse_str(
            "design t; in a; reg x = 0; reg y = 0; out o = x ^ y; always { x <= a; y <= x; } end",
        )
        .unwrap();
        let list = generate_fault_list(
            &d,
            &CampaignMode::Exhaustive,
            &SliceInputs::default(),
            CycleWindow::full(3),
            &names(&["o"]),
        )
        .unwrap();
        assert_eq!(list.inject.len(), 6);
        assert_eq!(list.universe_size, 6);
    }

    #[test]
    fn static_mode_skips_h0_and_dedupes() {
        let d = chop();
        let g = build_graph(&d);
        let slices: Vec<StaticSlice> = ["TAR_F", "TAR_D"]
            .iter()
            .map(|p| static_slice(&g, &d, p).unwrap())
            .collect();
        let inputs = SliceInputs {
            static_slices: Some(&slices),
            ..Default::default()
        };
        let w = CycleWindow::full(5);
        let one = generate_fault_list(
            &d,
            &CampaignMode::StaticSlice,
            &inputs,
            w,
            &names(&["TAR_F"]),
        )
        .unwrap();
        assert!(one.inject.iter().all(|f| f.register != "H0"));
        assert_eq!(one.inject.len(), 10);

        let both = generate_fault_list(
            &d,
            &CampaignMode::StaticSlice,
            &inputs,
            w,
            &names(&["TAR_F", "TAR_D"]),
        )
        .unwrap();
        let ff: Vec<_> = both.inject.iter().filter(|f| f.register == "FF").collect();
        assert_eq!(ff.len(), 5);
        let unique: BTreeSet<_> = both.inject.iter().collect();
        assert_eq!(unique.len(), both.inject.len());
    }

    #[test]
    fn missing_artifacts_and_bad_requests() {
        let d = chop();
        let w = CycleWindow::full(5);
        let none = SliceInputs::default();
        for m in [CampaignMode::StaticSlice, CampaignMode::DynamicSlice] {
            assert!(matches!(
                generate_fault_list(&d, &m, &none, w, &names(&["TAR_F"])),
                Err(FaultError::MissingArtifact { .. })
            ));
        }
        assert!(matches!(
            generate_fault_list(
                &d,
                &CampaignMode::Exhaustive,
                &none,
                CycleWindow::new(3, 3),
                &names(&["TAR_F"])
            ),
            Err(FaultError::Window(_))
        ));
        assert!(matches!(
            generate_fault_list(
                &d,
                &CampaignMode::RandomSample { count: 16, seed: 0 },
                &none,
                w,
                &names(&["TAR_F"])
            ),
            Err(FaultError::SampleTooLarge {
                count: 16,
                universe: 15
            })
        ));
    }

    #[test]
    fn random_sample_is_seeded_and_distinct() {
        let d = parse_str(include_str!("../fixtures/regfile8.mhdl")).unwrap();
        let w = CycleWindow::full(24);
        let gen = |seed| {
            generate_fault_list(
                &d,
                &CampaignMode::RandomSample { count: 50, seed },
                &SliceInputs::default(),
                w,
                &names(&["RDATA"]),
            )
            .unwrap()
            .inject
        };
        let a = gen(9);
        assert_eq!(a, gen(9));
        assert_ne!(a, gen(10));
        let set: BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), 50);
        let universe: BTreeSet<_> = fault_universe(&d, w).into_iter().collect();
        assert!(a.iter().all(|f| universe.contains(f)));
    }

    #[test]
    fn pipeline_flip_detected_same_cycle() {
        let d = pipeline();
        let stim = Stimulus::from_values(&d, &[("SOURCE", &[1, 0, 1, 0])]).unwrap();
        let obs = names(&["OUT"]);
        let (golden, _) = simulate(&d, &stim, &obs, None).unwrap();
        for t in 0..4 {
            let v =
                inject_and_classify(&d, &stim, &golden, &FaultDescriptor::new("FF", 0, t), &obs)
                    .unwrap();
            assert_eq!(v.outcome, Outcome::Detected);
            assert_eq!(v.first_divergence_cycle, Some(t));
        }
    }

    #[test]
    fn outside_cone_is_undetected() {
        let d = chop();
        let stim = chop_ref();
        let obs = names(&["TAR_F"]);
        let (golden, _) = simulate(&d, &stim, &obs, None).unwrap();
        for t in 0..5 {
            let v =
                inject_and_classify(&d, &stim, &golden, &FaultDescriptor::new("H0", 0, t), &obs)
                    .unwrap();
            assert_eq!(v.outcome, Outcome::Undetected);
            assert_eq!(v.first_divergence_cycle, None);
        }
    }

    #[test]
    fn overwritten_before_use_is_undetected() {
        let d = chop();
        let stim = chop_ref();
        let obs = names(&["TAR_F"]);
        let (golden, _) = simulate(&d, &stim, &obs, None).unwrap();
        // FF is rewritten in cycles 0 and 1 before FO first reads it.
        for t in [0, 1] {
            let v =
                inject_and_classify(&d, &stim, &golden, &FaultDescriptor::new("FF", 0, t), &obs)
                    .unwrap();
            assert_eq!(v.outcome, Outcome::Undetected, "t={t}");
        }
        let v = inject_and_classify(&d, &stim, &golden, &FaultDescriptor::new("FF", 0, 2), &obs)
            .unwrap();
        assert_eq!(
            (v.outcome, v.first_divergence_cycle),
            (Outcome::Detected, Some(3))
        );
    }

    #[test]
    fn golden_mismatch_is_rejected() {
        let d = chop();
        let stim = chop_ref();
        let (golden, _) = simulate(&d, &stim, &names(&["TAR_F"]), None).unwrap();
        let f = FaultDescriptor::new("FF", 0, 0);
        assert!(inject_and_classify(&d, &stim, &golden, &f, &names(&["TAR_D"])).is_err());
        let mut short = golden.clone();
        short.per_cycle.pop();
        assert!(inject_and_classify(&d, &stim, &short, &f, &names(&["TAR_F"])).is_err());
    }

    #[test]
    fn chop_mode_sizes_and_equal_detection() {
        let d = chop();
        let stim = chop_ref();
        let obs = names(&["TAR_F"]);
        let run = |m| run_campaign(&d, &stim, &obs, &m, None, 2).unwrap();
        let ex = run(CampaignMode::Exhaustive);
        let st = run(CampaignMode::StaticSlice);
        let dy = run(CampaignMode::DynamicSlice);
        assert_eq!((ex.injected(), st.injected(), dy.injected()), (15, 10, 8));
        assert_eq!(ex.detected(), dy.detected());
        assert_eq!(st.detected(), dy.detected());
        assert_eq!(dy.verdicts.len(), 15);
        assert_eq!(dy.count(Outcome::UndetectedCollapsed), 7);
        assert_eq!(dy.timing.per_fault_times.len(), 8);
        let mut sorted = dy.verdicts.clone();
        sorted.sort_by(|a, b| a.fault.cmp(&b.fault));
        assert_eq!(sorted, dy.verdicts);
    }

    #[test]
    fn dynamic_with_nothing_critical_runs_only_golden() {
        let d = parse_str(
            "design n; in a; reg r = 0; reg k = 0; out o = a; always { r <= a; k <= r; } end",
        )
        .unwrap();
        let stim = Stimulus::from_values(&d, &[("a", &[1, 0, 1])]).unwrap();
        let run = run_campaign(
            &d,
            &stim,
            &names(&["o"]),
            &CampaignMode::DynamicSlice,
            None,
            1,
        )
        .unwrap();
        assert_eq!(run.injected(), 0);
        assert!(run.timing.per_fault_times.is_empty());
        assert_eq!(run.timing.total_cpu_time, run.timing.golden_time);
        assert_eq!(run.count(Outcome::UndetectedCollapsed), 6);
    }

    #[test]
    fn parallel_schedule_does_not_change_verdicts() {
        let d = parse_str(include_str!("../fixtures/regfile8.mhdl")).unwrap();
        let stim = Stimulus::from_csv_str(include_str!("../fixtures/regfile8_sparse.csv")).unwrap();
        let obs = names(&["RDATA"]);
        let strip = |r: CampaignRun| -> Vec<_> {
            r.verdicts
                .into_iter()
                .map(|v| (v.fault, v.outcome, v.first_divergence_cycle))
                .collect()
        };
        let a = strip(run_campaign(&d, &stim, &obs, &CampaignMode::Exhaustive, None, 1).unwrap());
        let b = strip(run_campaign(&d, &stim, &obs, &CampaignMode::Exhaustive, None, 4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn exports() {
        let d = chop();
        let run = run_campaign(
            &d,
            &chop_ref(),
            &names(&["TAR_F"]),
            &CampaignMode::DynamicSlice,
            None,
            1,
        )
        .unwrap();
        let csv = verdicts_csv(&run.verdicts);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("register,bit,cycle,outcome,first_divergence_cycle,sim_time")
        );
        assert_eq!(lines.next(), Some("FF,0,0,undetected_collapsed,,0.0"));
        assert_eq!(csv.lines().count(), 16);
        assert_eq!(verdicts_csv(&[]).lines().count(), 1);

        let json: serde_json::Value = serde_json::from_str(&verdicts_json(&run.verdicts)).unwrap();
        assert_eq!(json[0]["register"], "FF");
        assert_eq!(json[0]["outcome"], "undetected_collapsed");
        let timing: serde_json::Value = serde_json::from_str(&run.timing.to_json()).unwrap();
        assert_eq!(timing["per_fault_times"].as_array().unwrap().len(), 8);
        assert!(
            timing["total_cpu_time"].as_f64().unwrap() >= timing["golden_time"].as_f64().unwrap()
        );
    }
}
