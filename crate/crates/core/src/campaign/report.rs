// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::{fault_coverage, reduction_percentage, time_saving_percentage, Percentage};
use crate::fault::{CampaignMode, CampaignRun, FaultDescriptor, Outcome};
use crate::sim::{CycleWindow, Stimulus};

/// Keys holding wall-clock measurements; they vary between otherwise
/// identical runs.
pub const WALL_CLOCK_FIELDS: &[&str] = &[
    "golden_time",
    "total_cpu_time",
    "time_saving_vs_baseline",
    "time_saving",
    "total_cpu_time_delta",
];

/// Counts and metrics of one campaign mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: CampaignMode,
    pub universe: usize,
    pub injected: usize,
    pub detected: usize,
    pub undetected: usize,
    pub collapsed: usize,
    /// Detected over injected faults; absent when nothing was injected.
    pub fault_coverage: Option<Percentage>,
    /// Detected over injected plus collapsed faults.
    pub fault_coverage_all: Option<Percentage>,
    pub golden_time: f64,
    pub total_cpu_time: f64,
}

impl ModeSummary {
    pub fn from_run(run: &CampaignRun) -> Self {
        let detected = run.count(Outcome::Detected);
        let collapsed = run.count(Outcome::UndetectedCollapsed);
        let injected = run.injected();
        Self {
            mode: run.fault_list.mode.clone(),
            universe: run.fault_list.universe_size,
            injected,
            detected,
            undetected: run.count(Outcome::Undetected),
            collapsed,
            fault_coverage: fault_coverage(detected as u64, injected as u64).ok(),
            fault_coverage_all: fault_coverage(detected as u64, (injected + collapsed) as u64).ok(),
            golden_time: run.timing.golden_time,
            total_cpu_time: run.timing.total_cpu_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub design: String,
    /// Hash of design source, stimulus, observation points and window.
    pub setup_fingerprint: String,
    pub cycles: usize,
    pub observation_points: Vec<String>,
    pub window: CycleWindow,
    pub primary: ModeSummary,
    pub baseline: Option<ModeSummary>,
    /// Share of baseline injections the primary mode avoided.
    pub reduction_vs_baseline: Option<Percentage>,
    pub time_saving_vs_baseline: Option<Percentage>,
    pub detected_equal_to_baseline: Option<bool>,
    /// Detected faults of the primary mode, ordered.
    pub detected: Vec<FaultDescriptor>,
}

pub fn setup_fingerprint(
    design_source: &str,
    stimulus: &Stimulus,
    observation_points: &[String],
    window: CycleWindow,
) -> String {
    let mut h = Sha256::new();
    for part in [
        design_source,
        &stimulus.to_csv_string(),
        &observation_points.join("\n"),
        &format!("{}..{}", window.start, window.end),
    ] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

impl CampaignReport {
    pub fn build(
        design_name: &str,
        fingerprint: String,
        primary: &CampaignRun,
        baseline: Option<&CampaignRun>,
    ) -> Self {
        let p = ModeSummary::from_run(primary);
        let b = baseline.map(ModeSummary::from_run);
        let reduction = b
            .as_ref()
            .and_then(|b| reduction_percentage(b.injected as u64, p.injected as u64).ok());
        let time_saving = b
            .as_ref()
            .and_then(|b| time_saving_percentage(b.total_cpu_time, p.total_cpu_time).ok());
        let detected = primary.detected();
        Self {
            design: design_name.to_string(),
            setup_fingerprint: fingerprint,
            cycles: primary.golden.cycles(),
            observation_points: primary.observation_points.clone(),
            window: primary.fault_list.window,
            primary: p,
            baseline: b,
            reduction_vs_baseline: reduction,
            time_saving_vs_baseline: time_saving,
            detected_equal_to_baseline: baseline.map(|b| b.detected() == detected),
            detected: detected.into_iter().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The JSON report with every wall-clock field removed.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_wall_clock(&mut v);
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// One row per mode; the comparison columns are filled on the primary row.
    pub fn to_csv_string(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            role: &'a str,
            mode: String,
            universe: usize,
            injected: usize,
            detected: usize,
            undetected: usize,
            collapsed: usize,
            fault_coverage: Option<String>,
            fault_coverage_all: Option<String>,
            golden_time: f64,
            total_cpu_time: f64,
            reduction_vs_baseline: Option<String>,
            time_saving_vs_baseline: Option<String>,
        }
        let row = |role, s: &ModeSummary, primary: bool| Row {
            role,
            mode: s.mode.to_string(),
            universe: s.universe,
            injected: s.injected,
            detected: s.detected,
            undetected: s.undetected,
            collapsed: s.collapsed,
            fault_coverage: s.fault_coverage.map(|p| p.to_string()),
            fault_coverage_all: s.fault_coverage_all.map(|p| p.to_string()),
            golden_time: s.golden_time,
            total_cpu_time: s.total_cpu_time,
            reduction_vs_baseline: self
                .reduction_vs_baseline
                .filter(|_| primary)
                .map(|p| p.to_string()),
            time_saving_vs_baseline: self
                .time_saving_vs_baseline
                .filter(|_| primary)
                .map(|p| p.to_string()),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(row("primary", &self.primary, true))
            .expect("in-memory write");
        if let Some(b) = &self.baseline {
            w.serialize(row("baseline", b, false))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn strip_wall_clock(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            for k in WALL_CLOCK_FIELDS {
                map.remove(*k);
            }
            map.values_mut().for_each(strip_wall_clock);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_wall_clock),
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    #[error("reports come from different setups (design, stimulus, observation points or window)")]
    SetupMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignComparison {
    /// Whether both campaigns detected exactly the same faults.
    pub equivalent: bool,
    pub mode_a: CampaignMode,
    pub mode_b: CampaignMode,
    pub only_in_a: Vec<FaultDescriptor>,
    pub only_in_b: Vec<FaultDescriptor>,
    pub injected_a: usize,
    pub injected_b: usize,
    pub injected_delta: i64,
    /// Injections `b` avoided relative to `a`; absent when `b` injected more.
    pub reduction: Option<Percentage>,
    pub time_saving: Option<Percentage>,
    pub total_cpu_time_delta: f64,
}

/// Compares the primary runs of two reports over the same setup.
pub fn compare_campaigns(
    a: &CampaignReport,
    b: &CampaignReport,
) -> Result<CampaignComparison, CompareError> {
    if a.setup_fingerprint != b.setup_fingerprint {
        return Err(CompareError::SetupMismatch);
    }
    let da: BTreeSet<&FaultDescriptor> = a.detected.iter().collect();
    let db: BTreeSet<&FaultDescriptor> = b.detected.iter().collect();
    let only_in_a: Vec<FaultDescriptor> = da.difference(&db).map(|f| (*f).clone()).collect();
    let only_in_b: Vec<FaultDescriptor> = db.difference(&da).map(|f| (*f).clone()).collect();
    let (pa, pb) = (&a.primary, &b.primary);
    Ok(CampaignComparison {
        equivalent: only_in_a.is_empty() && only_in_b.is_empty(),
        mode_a: pa.mode.clone(),
        mode_b: pb.mode.clone(),
        only_in_a,
        only_in_b,
        injected_a: pa.injected,
        injected_b: pb.injected,
        injected_delta: pb.injected as i64 - pa.injected as i64,
        reduction: reduction_percentage(pa.injected as u64, pb.injected as u64).ok(),
        time_saving: time_saving_percentage(pa.total_cpu_time, pb.total_cpu_time).ok(),
        total_cpu_time_delta: pb.total_cpu_time - pa.total_cpu_time,
    })
}

impl CampaignComparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }
}
