// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fault::CampaignMode;
use crate::sim::CycleWindow;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

fn default_mode() -> CampaignMode {
    CampaignMode::DynamicSlice
}

fn default_parallelism() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("slicefi-out")
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Csv]
}

/// One campaign. Relative paths in a config file resolve against the file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub design: PathBuf,
    pub stimulus: PathBuf,
    pub observation_points: Vec<String>,
    #[serde(default = "default_mode")]
    pub mode: CampaignMode,
    /// Second mode to run for reduction and time-saving figures.
    #[serde(default)]
    pub baseline: Option<CampaignMode>,
    /// Injection cycles; the whole stimulus when absent.
    #[serde(default)]
    pub window: Option<CycleWindow>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub report_formats: Vec<ReportFormat>,
}

impl CampaignConfig {
    pub fn new(
        design: impl Into<PathBuf>,
        stimulus: impl Into<PathBuf>,
        observation_points: Vec<String>,
    ) -> Self {
        Self {
            design: design.into(),
            stimulus: stimulus.into(),
            observation_points,
            mode: default_mode(),
            baseline: None,
            window: None,
            parallelism: default_parallelism(),
            output_dir: default_output_dir(),
            report_formats: default_formats(),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, toml::de::Error> {
        let mut c: CampaignConfig = toml::from_str(text)?;
        for p in [&mut c.design, &mut c.stimulus, &mut c.output_dir] {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base).map_err(|source| ConfigError::Toml {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Checks the invariants that do not need the design.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (what, p) in [("design", &self.design), ("stimulus", &self.stimulus)] {
            if !p.is_file() {
                return Err(ConfigError::Invalid(format!(
                    "{what} file {} does not exist",
                    p.display()
                )));
            }
        }
        if self.observation_points.is_empty() {
            return Err(ConfigError::Invalid("observation_points is empty".into()));
        }
        if self.parallelism == 0 {
            return Err(ConfigError::Invalid(
                "parallelism must be at least 1".into(),
            ));
        }
        if let Some(w) = self.window {
            if w.is_empty() {
                return Err(ConfigError::Invalid(format!(
                    "window [{}, {}) is empty",
                    w.start, w.end
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults_and_relative_paths() {
        let c = CampaignConfig::from_toml_str(
            "design = \"d.mhdl\"\nstimulus = \"/abs/s.csv\"\nobservation_points = [\"o\"]\n",
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(c.design, PathBuf::from("/base/d.mhdl"));
        assert_eq!(c.stimulus, PathBuf::from("/abs/s.csv"));
        assert_eq!(c.output_dir, PathBuf::from("/base/slicefi-out"));
        assert_eq!(c.mode, CampaignMode::DynamicSlice);
        assert_eq!(c.parallelism, 1);
        assert_eq!(
            c.report_formats,
            vec![ReportFormat::Json, ReportFormat::Csv]
        );
    }

    #[test]
    fn parses_every_field() {
        let c = CampaignConfig::from_toml_str(
            r#"
design = "d.mhdl"
stimulus = "s.csv"
observation_points = ["a", "b"]
mode = "random_sample:10:7"
baseline = "exhaustive"
window = { start = 2, end = 9 }
parallelism = 4
output_dir = "out"
report_formats = ["json"]
"#,
            Path::new(""),
        )
        .unwrap();
        assert_eq!(c.mode, CampaignMode::RandomSample { count: 10, seed: 7 });
        assert_eq!(c.baseline, Some(CampaignMode::Exhaustive));
        assert_eq!(c.window, Some(CycleWindow::new(2, 9)));
        assert_eq!(c.parallelism, 4);
        assert_eq!(c.report_formats, vec![ReportFormat::Json]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let base = Path::new("");
        assert!(CampaignConfig::from_toml_str(
            "design=\"a\"\nstimulus=\"b\"\nobservation_points=[]\nspeed=1\n",
            base
        )
        .is_err());
        assert!(CampaignConfig::from_toml_str(
            "design=\"a\"\nstimulus=\"b\"\nobservation_points=[]\nmode=\"fast\"\n",
            base
        )
        .is_err());

        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().join("d.mhdl");
        let s = dir.path().join("s.csv");
        std::fs::write(&d, "design d; end").unwrap();
        std::fs::write(&s, "").unwrap();
        let mut c = CampaignConfig::new(&d, &s, vec!["o".into()]);
        c.validate().unwrap();
        c.parallelism = 0;
        assert!(c.validate().is_err());
        c.parallelism = 1;
        c.observation_points.clear();
        assert!(c.validate().is_err());
        c.observation_points.push("o".into());
        c.window = Some(CycleWindow::new(3, 1));
        assert!(c.validate().is_err());
        c.window = None;
        c.stimulus = dir.path().join("missing.csv");
        assert!(c
            .validate()
            .unwrap_err()
            .to_string()
            .contains("missing.csv"));
    }
}
