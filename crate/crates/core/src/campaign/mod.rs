// SPDX-License-Identifier: Apache-2.0

//! End-to-end pipeline: parse, slice, golden run, fault list, injection,
//! report. Every intermediate artifact is written to the output directory.

mod config;
mod metrics;
mod report;

use std::path::{Path, PathBuf};

pub use config::{CampaignConfig, ConfigError, ReportFormat};
pub use metrics::{
    fault_coverage, reduction_percentage, time_saving_percentage, MetricError, Percentage,
    PercentageParseError, COVERAGE_DECIMALS, REDUCTION_DECIMALS,
};
pub use report::{
    compare_campaigns, setup_fingerprint, CampaignComparison, CampaignReport, CompareError,
    ModeSummary, WALL_CLOCK_FIELDS,
};

use crate::deps::SliceError;
use crate::dynslice::{collapse_csv, critical_csv};
use crate::fault::{
    run_campaign, verdicts_csv, verdicts_json, CampaignMode, CampaignRun, FaultError,
};
use crate::hdl::{parse, statement_table, Design, ParseError, SourceUnit};
use crate::sim::{coverage_summary, CycleWindow, SimError, Stimulus, WindowError};

/// Failure classes of [`run_pipeline`], each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("config: {0}")]
    Config(String),
    #[error("simulation: {0}")]
    Simulation(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(_) => 2,
            PipelineError::Config(_) => 3,
            PipelineError::Simulation(_) => 4,
            PipelineError::Internal(_) => 5,
        }
    }
}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

impl From<FaultError> for PipelineError {
    fn from(e: FaultError) -> Self {
        use crate::dynslice::DynSliceError;
        match &e {
            FaultError::Sim(SimError::UnknownObservation(_))
            | FaultError::Slice(SliceError::UnknownSignal(_))
            | FaultError::Window(_)
            | FaultError::Dynamic(DynSliceError::Window(_))
            | FaultError::SampleTooLarge { .. }
            | FaultError::NoObservationPoints => PipelineError::Config(e.to_string()),
            FaultError::Sim(_) => PipelineError::Simulation(e.to_string()),
            _ => PipelineError::Internal(e.to_string()),
        }
    }
}

/// Result of a pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: CampaignReport,
    pub primary: CampaignRun,
    pub baseline: Option<CampaignRun>,
    pub written: Vec<PathBuf>,
}

/// Parsed inputs of a campaign, shared by the CLI subcommands.
#[derive(Debug, Clone)]
pub struct LoadedSetup {
    pub source: SourceUnit,
    pub design: Design,
    pub stimulus: Stimulus,
}

/// Reads and parses the design, then reads and checks the stimulus.
pub fn load_setup(design_path: &Path, stimulus_path: &Path) -> Result<LoadedSetup, PipelineError> {
    let source = SourceUnit::from_file(design_path)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", design_path.display())))?;
    let design = parse(&source)?;
    let stimulus = Stimulus::from_csv_path(stimulus_path)
        .map_err(|e| PipelineError::Simulation(format!("{}: {e}", stimulus_path.display())))?;
    stimulus
        .validate(&design)
        .map_err(|e| PipelineError::Simulation(format!("{}: {e}", stimulus_path.display())))?;
    Ok(LoadedSetup {
        source,
        design,
        stimulus,
    })
}

/// Checks that every observation point names a declared signal.
pub fn check_observation_points(design: &Design, points: &[String]) -> Result<(), PipelineError> {
    if points.is_empty() {
        return Err(PipelineError::Config("observation_points is empty".into()));
    }
    for p in points {
        if design.signal(p).is_none() {
            return Err(PipelineError::Config(format!(
                "unknown observation point `{p}` in design `{}`",
                design.name
            )));
        }
    }
    Ok(())
}

pub fn run_pipeline(config: &CampaignConfig) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    let setup = load_setup(&config.design, &config.stimulus)?;
    let design = &setup.design;
    check_observation_points(design, &config.observation_points)?;
    let cycles = setup.stimulus.len();
    let window = config.window.unwrap_or(CycleWindow::full(cycles));
    window
        .check(cycles)
        .map_err(|e: WindowError| PipelineError::Config(e.to_string()))?;

    let obs = &config.observation_points;
    let run = |mode: &CampaignMode| {
        run_campaign(
            design,
            &setup.stimulus,
            obs,
            mode,
            Some(window),
            config.parallelism,
        )
    };
    let primary = run(&config.mode)?;
    let baseline = config.baseline.as_ref().map(run).transpose()?;

    let fingerprint = setup_fingerprint(&setup.source.text, &setup.stimulus, obs, window);
    let report = CampaignReport::build(&design.name, fingerprint, &primary, baseline.as_ref());

    let mut out = ArtifactWriter::new(&config.output_dir)?;
    write_artifacts(
        &mut out,
        design,
        &primary,
        baseline.as_ref(),
        &config.report_formats,
    )?;
    if config.report_formats.contains(&ReportFormat::Json) {
        out.write("report.json", &report.to_json())?;
    }
    if config.report_formats.contains(&ReportFormat::Csv) {
        out.write("report.csv", &report.to_csv_string())?;
    }

    Ok(PipelineOutput {
        report,
        primary,
        baseline,
        written: out.written,
    })
}

struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| PipelineError::Internal(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| PipelineError::Internal(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }
}

/// Observation-point names made safe for file names.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_artifacts(
    out: &mut ArtifactWriter,
    design: &Design,
    primary: &CampaignRun,
    baseline: Option<&CampaignRun>,
    formats: &[ReportFormat],
) -> Result<(), PipelineError> {
    let table: String = statement_table(design)
        .iter()
        .map(|r| format!("{r}\n"))
        .collect();
    out.write("statements.txt", &table)?;
    out.write(
        "graph.json",
        &serde_json::to_string_pretty(&primary.graph).expect("graph serializes"),
    )?;
    for s in &primary.static_slices {
        out.write(
            &format!("slice_{}.txt", file_stem(&s.observation_point)),
            &s.dump(design),
        )?;
    }
    for d in &primary.dynamic_slices {
        out.write(
            &format!("dynamic_slice_{}.csv", file_stem(&d.observation_point)),
            &d.to_csv_string(),
        )?;
    }
    out.write("golden_trace.csv", &primary.golden.to_csv_string())?;
    out.write(
        "coverage.json",
        &serde_json::to_string_pretty(&coverage_summary(&primary.coverage, design))
            .expect("coverage serializes"),
    )?;

    for (prefix, run) in std::iter::once(("", primary)).chain(baseline.map(|b| ("baseline_", b))) {
        if run.fault_list.mode == CampaignMode::DynamicSlice {
            out.write(
                &format!("{prefix}critical_faults.csv"),
                &critical_csv(&run.fault_list.critical),
            )?;
            out.write(
                &format!("{prefix}collapsed_faults.csv"),
                &collapse_csv(&run.fault_list.collapsed),
            )?;
        }
        if formats.contains(&ReportFormat::Csv) {
            out.write(
                &format!("{prefix}verdicts.csv"),
                &verdicts_csv(&run.verdicts),
            )?;
        }
        if formats.contains(&ReportFormat::Json) {
            out.write(
                &format!("{prefix}verdicts.json"),
                &verdicts_json(&run.verdicts),
            )?;
        }
        out.write(&format!("{prefix}timing.json"), &run.timing.to_json())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deps::build_graph;
    use crate::fault::run_campaign_with_graph;

    const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

    fn chop_config(dir: &Path, mode: CampaignMode) -> CampaignConfig {
        let mut c = CampaignConfig::new(
            Path::new(FIXTURES).join("chop.mhdl"),
            Path::new(FIXTURES).join("chop_ref.csv"),
            vec!["TAR_F".into()],
        );
        c.mode = mode;
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn dynamic_pipeline_matches_exhaustive() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = chop_config(dir.path(), CampaignMode::DynamicSlice);
        c.baseline = Some(CampaignMode::Exhaustive);
        let out = run_pipeline(&c).unwrap();
        let r = &out.report;
        assert_eq!(r.detected_equal_to_baseline, Some(true));
        assert_eq!((r.primary.injected, r.primary.collapsed), (8, 7));
        assert_eq!(r.baseline.as_ref().unwrap().injected, 15);
        // 7 of 15 avoided = 46.666... %
        assert_eq!(r.reduction_vs_baseline.unwrap().to_string(), "46.67");
        for name in [
            "statements.txt",
            "graph.json",
            "slice_TAR_F.txt",
            "dynamic_slice_TAR_F.csv",
            "golden_trace.csv",
            "coverage.json",
            "critical_faults.csv",
            "collapsed_faults.csv",
            "verdicts.csv",
            "verdicts.json",
            "timing.json",
            "baseline_verdicts.csv",
            "baseline_timing.json",
            "report.json",
            "report.csv",
        ] {
            assert!(dir.path().join(name).is_file(), "{name}");
        }
        let back = CampaignReport::from_json(
            &std::fs::read_to_string(dir.path().join("report.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(&back, r);
        let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn toy_exhaustive_total() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().join("toy.mhdl");
        let s = dir.path().join("toy.csv");
        std::fs::write(
            &d,
            "design toy; in a; reg x = 0; reg y = 0; out o = x ^ y; always { x <= a; y <= x; } end",
        )
        .unwrap();
        std::fs::write(&s, "a\n1\n0\n1\n").unwrap();
        let mut c = CampaignConfig::new(&d, &s, vec!["o".into()]);
        c.mode = CampaignMode::Exhaustive;
        c.output_dir = dir.path().join("out");
        let r = run_pipeline(&c).unwrap().report;
        assert_eq!(r.primary.injected, 6);
        assert_eq!(r.primary.detected + r.primary.undetected, 6);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = chop_config(dir.path(), CampaignMode::DynamicSlice);
        c.observation_points = vec!["NOPE".into()];
        let e = run_pipeline(&c).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("NOPE"));

        let bad = dir.path().join("bad.mhdl");
        std::fs::write(&bad, "design b; out o = q; end").unwrap();
        let mut c = chop_config(dir.path(), CampaignMode::DynamicSlice);
        c.design = bad;
        assert_eq!(run_pipeline(&c).unwrap_err().exit_code(), 2);

        let stim = dir.path().join("s.csv");
        std::fs::write(&stim, "SOURCE,INV,DUP\n1,1,11\n").unwrap();
        let mut c = chop_config(dir.path(), CampaignMode::DynamicSlice);
        c.stimulus = stim;
        assert_eq!(run_pipeline(&c).unwrap_err().exit_code(), 4);

        let mut c = chop_config(dir.path(), CampaignMode::DynamicSlice);
        c.window = Some(CycleWindow::new(0, 9));
        assert_eq!(run_pipeline(&c).unwrap_err().exit_code(), 3);

        let mut c = chop_config(
            dir.path(),
            CampaignMode::RandomSample { count: 99, seed: 1 },
        );
        c.output_dir = dir.path().join("rs");
        assert_eq!(run_pipeline(&c).unwrap_err().exit_code(), 3);

        let blocked = dir.path().join("file");
        std::fs::write(&blocked, "").unwrap();
        let mut c = chop_config(&blocked, CampaignMode::Exhaustive);
        c.output_dir = blocked.join("sub");
        assert_eq!(run_pipeline(&c).unwrap_err().exit_code(), 5);
    }

    #[test]
    fn reports_are_deterministic_across_parallelism() {
        let dir = tempfile::tempdir().unwrap();
        let mut views = Vec::new();
        for p in [1, 4, 1] {
            let mut c = CampaignConfig::new(
                Path::new(FIXTURES).join("regfile8.mhdl"),
                Path::new(FIXTURES).join("regfile8_busy.csv"),
                vec!["RDATA".into(), "WBUSY".into()],
            );
            c.baseline = Some(CampaignMode::StaticSlice);
            c.parallelism = p;
            c.output_dir = dir.path().join(format!("p{p}"));
            views.push(run_pipeline(&c).unwrap().report.deterministic_json());
        }
        assert_eq!(views[0], views[1]);
        assert_eq!(views[0], views[2]);
        for f in WALL_CLOCK_FIELDS {
            assert!(!views[0].contains(&format!("\"{f}\"")), "{f}");
        }
    }

    fn report_for(mode: CampaignMode) -> CampaignReport {
        let dir = tempfile::tempdir().unwrap();
        run_pipeline(&chop_config(dir.path(), mode)).unwrap().report
    }

    #[test]
    fn compare_self_and_exhaustive() {
        let dy = report_for(CampaignMode::DynamicSlice);
        let ex = report_for(CampaignMode::Exhaustive);
        let same = compare_campaigns(&dy, &dy).unwrap();
        assert!(same.equivalent);
        assert_eq!(same.injected_delta, 0);
        assert_eq!(same.reduction.unwrap().to_string(), "0.00");
        assert_eq!(same.time_saving.unwrap().to_string(), "0.00");
        assert_eq!(same.total_cpu_time_delta, 0.0);
        let cmp = compare_campaigns(&ex, &dy).unwrap();
        assert!(cmp.equivalent);
        assert_eq!(cmp.injected_delta, -7);

        let mut other = dy.clone();
        other.setup_fingerprint = "x".into();
        assert_eq!(
            compare_campaigns(&dy, &other),
            Err(CompareError::SetupMismatch)
        );
    }

    #[test]
    fn broken_slicer_is_caught() {
        let setup = load_setup(
            &Path::new(FIXTURES).join("chop.mhdl"),
            &Path::new(FIXTURES).join("chop_long.csv"),
        )
        .unwrap();
        let d = &setup.design;
        let obs = vec!["TAR_F".to_string()];
        let run = |g| {
            run_campaign_with_graph(
                d,
                g,
                &setup.stimulus,
                &obs,
                &CampaignMode::DynamicSlice,
                None,
                1,
            )
            .unwrap()
        };
        // Forget that the non-inverting copy `FO <= FF` reads FF. A flip of FF
        // read only by that copy and then overwritten is wrongly collapsed.
        let mut g = build_graph(d);
        let ff = d.definitions_of("FF").next().unwrap().id;
        let fo_copy = d.definitions_of("FO").nth(1).unwrap().id;
        assert!(g.remove_data_edge(fo_copy, ff));
        let fp = setup_fingerprint(
            &setup.source.text,
            &setup.stimulus,
            &obs,
            CycleWindow::full(16),
        );
        let good = CampaignReport::build(&d.name, fp.clone(), &run(build_graph(d)), None);
        let broken = CampaignReport::build(&d.name, fp, &run(g), None);
        let cmp = compare_campaigns(&good, &broken).unwrap();
        assert!(!cmp.equivalent);
        assert!(
            cmp.only_in_a
                .contains(&crate::fault::FaultDescriptor::new("FF", 0, 5)),
            "{cmp:?}"
        );
        assert!(cmp.only_in_b.is_empty());
    }
}
