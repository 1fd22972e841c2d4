// SPDX-License-Identifier: Apache-2.0

//! `slicefi` command-line front end.
//!
//! Exit codes: 0 success, 1 `compare` found different detected sets,
//! 2 HDL parse error, 3 configuration or usage error, 4 simulation error,
//! 5 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slicefi::campaign::{
    check_observation_points, compare_campaigns, load_setup, run_pipeline, CampaignConfig,
    CampaignReport, PipelineError, ReportFormat,
};
use slicefi::deps::{build_graph, static_slice};
use slicefi::fault::{CampaignMode, FaultDescriptor};
use slicefi::hdl::{parse, statement_table, SourceUnit};
use slicefi::sim::{coverage_summary, simulate, CycleWindow};

#[derive(Parser)]
#[command(
    name = "slicefi",
    version,
    about = "Slicing-pruned SEU fault-injection campaigns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a design and print its statement table.
    Parse {
        design: PathBuf,
        /// Print JSON instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Print the backward static slice of each observation point.
    Slice {
        design: PathBuf,
        #[arg(short, long = "observe", required = true)]
        observe: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Simulate a design and print the observation trace as CSV.
    Simulate {
        design: PathBuf,
        stimulus: PathBuf,
        #[arg(short, long = "observe", required = true)]
        observe: Vec<String>,
        /// Inject one upset, written REGISTER:BIT:CYCLE.
        #[arg(long, value_parser = parse_fault)]
        fault: Option<FaultDescriptor>,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write a coverage summary (JSON) here.
        #[arg(long)]
        coverage: Option<PathBuf>,
    },
    /// Run a fault-injection campaign. Flags override the config file.
    Campaign {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        stimulus: Option<PathBuf>,
        #[arg(short, long = "observe")]
        observe: Vec<String>,
        /// exhaustive, static_slice, dynamic_slice or random_sample:COUNT:SEED
        #[arg(long)]
        mode: Option<CampaignMode>,
        #[arg(long)]
        baseline: Option<CampaignMode>,
        /// Injection cycles START..END (end exclusive).
        #[arg(long, value_parser = parse_window)]
        window: Option<CycleWindow>,
        #[arg(short = 'j', long)]
        parallelism: Option<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long = "format", value_parser = parse_format)]
        formats: Vec<ReportFormat>,
    },
    /// Compare the detected sets of two campaign reports.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn parse_fault(s: &str) -> Result<FaultDescriptor, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [r, b, c] if !r.is_empty() => Ok(FaultDescriptor::new(
            *r,
            b.parse().map_err(|e| format!("bit: {e}"))?,
            c.parse().map_err(|e| format!("cycle: {e}"))?,
        )),
        _ => Err("expected REGISTER:BIT:CYCLE".into()),
    }
}

fn parse_window(s: &str) -> Result<CycleWindow, String> {
    let (a, b) = s.split_once("..").ok_or("expected START..END")?;
    Ok(CycleWindow::new(
        a.parse().map_err(|e| format!("start: {e}"))?,
        b.parse().map_err(|e| format!("end: {e}"))?,
    ))
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    match s {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        _ => Err("expected json or csv".into()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Bad flags are configuration errors; exit 2 is reserved for HDL parse errors.
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn internal(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Internal(format!("{}: {e}", path.display()))
}

fn run(command: Command) -> Result<u8, PipelineError> {
    match command {
        Command::Parse { design, json } => {
            let src = SourceUnit::from_file(&design)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", design.display())))?;
            let d = parse(&src)?;
            let rows = statement_table(&d);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&rows).expect("rows serialize")
                );
            } else {
                println!("design {}: {} statements", d.name, rows.len());
                for r in rows {
                    println!("{r}");
                }
            }
        }
        Command::Slice {
            design,
            observe,
            json,
        } => {
            let src = SourceUnit::from_file(&design)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", design.display())))?;
            let d = parse(&src)?;
            check_observation_points(&d, &observe)?;
            let g = build_graph(&d);
            let slices = observe
                .iter()
                .map(|p| static_slice(&g, &d, p))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&slices).expect("slices serialize")
                );
            } else {
                for s in slices {
                    print!("{}", s.dump(&d));
                }
            }
        }
        Command::Simulate {
            design,
            stimulus,
            observe,
            fault,
            output,
            coverage,
        } => {
            let setup = load_setup(&design, &stimulus)?;
            check_observation_points(&setup.design, &observe)?;
            let (trace, cov) = simulate(&setup.design, &setup.stimulus, &observe, fault.as_ref())
                .map_err(|e| PipelineError::Simulation(e.to_string()))?;
            let text = trace.to_csv_string();
            match output {
                Some(p) => std::fs::write(&p, text).map_err(|e| internal(&p, e))?,
                None => print!("{text}"),
            }
            if let Some(p) = coverage {
                let summary = coverage_summary(&cov, &setup.design);
                let json = serde_json::to_string_pretty(&summary).expect("coverage serializes");
                std::fs::write(&p, json).map_err(|e| internal(&p, e))?;
            }
        }
        Command::Campaign {
            config,
            design,
            stimulus,
            observe,
            mode,
            baseline,
            window,
            parallelism,
            output_dir,
            formats,
        } => {
            let mut c = match config {
                Some(p) => CampaignConfig::from_path(&p)?,
                None => CampaignConfig::new(
                    design.clone().ok_or_else(|| {
                        PipelineError::Config("--design is required without --config".into())
                    })?,
                    stimulus.clone().ok_or_else(|| {
                        PipelineError::Config("--stimulus is required without --config".into())
                    })?,
                    Vec::new(),
                ),
            };
            if let Some(d) = design {
                c.design = d;
            }
            if let Some(s) = stimulus {
                c.stimulus = s;
            }
            if !observe.is_empty() {
                c.observation_points = observe;
            }
            if let Some(m) = mode {
                c.mode = m;
            }
            if baseline.is_some() {
                c.baseline = baseline;
            }
            if window.is_some() {
                c.window = window;
            }
            if let Some(p) = parallelism {
                c.parallelism = p;
            }
            if let Some(o) = output_dir {
                c.output_dir = o;
            }
            if !formats.is_empty() {
                c.report_formats = formats;
            }
            let out = run_pipeline(&c)?;
            print_summary(&out.report);
            println!("artifacts: {}", c.output_dir.display());
        }
        Command::Compare { a, b, json } => {
            let read = |p: &Path| -> Result<CampaignReport, PipelineError> {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?;
                CampaignReport::from_json(&text)
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))
            };
            let cmp = compare_campaigns(&read(&a)?, &read(&b)?)
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            if json {
                println!("{}", cmp.to_json());
            } else {
                println!("equivalent: {}", cmp.equivalent);
                println!(
                    "injected: {} ({}) vs {} ({})",
                    cmp.injected_a, cmp.mode_a, cmp.injected_b, cmp.mode_b
                );
                if let Some(r) = cmp.reduction {
                    println!("reduction: {r}%");
                }
                if let Some(t) = cmp.time_saving {
                    println!("time saving: {t}%");
                }
                for f in &cmp.only_in_a {
                    println!("detected only in a: {f}");
                }
                for f in &cmp.only_in_b {
                    println!("detected only in b: {f}");
                }
            }
            return Ok(if cmp.equivalent { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn print_summary(r: &CampaignReport) {
    let pct = |p: Option<slicefi::campaign::Percentage>| {
        p.map(|p| format!("{p}%")).unwrap_or_else(|| "n/a".into())
    };
    for (role, s) in
        std::iter::once(("primary", &r.primary)).chain(r.baseline.as_ref().map(|b| ("baseline", b)))
    {
        println!(
            "{role} {}: injected {} detected {} undetected {} collapsed {} coverage {} cpu {:.6}s",
            s.mode,
            s.injected,
            s.detected,
            s.undetected,
            s.collapsed,
            pct(s.fault_coverage),
            s.total_cpu_time
        );
    }
    if r.baseline.is_some() {
        println!(
            "reduction {} time saving {} detected equal {}",
            pct(r.reduction_vs_baseline),
            pct(r.time_saving_vs_baseline),
            r.detected_equal_to_baseline.unwrap_or(false)
        );
    }
}
