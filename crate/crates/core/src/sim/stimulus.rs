// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use crate::bits::{Bits, BitsParseError};
use crate::hdl::{Design, SignalKind};

#[derive(Debug, thiserror::Error)]
pub enum StimulusError {
    #[error("stimulus csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("stimulus: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}, column `{column}`: {source}")]
    BadValue {
        row: usize,
        column: String,
        source: BitsParseError,
    },
    #[error("row {row} has {found} values, header has {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("column `{0}` appears more than once")]
    DuplicateColumn(String),
    #[error("column `{0}` is not an input port of the design")]
    UnknownColumn(String),
    #[error("input port `{0}` has no stimulus column")]
    MissingColumn(String),
    #[error("cycle {cycle}: `{port}` is {expected} bits wide but the value has {found} bits")]
    Width {
        cycle: usize,
        port: String,
        expected: u32,
        found: u32,
    },
}

/// Per-cycle input values. Row `k` drives cycle `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus {
    columns: Vec<String>,
    rows: Vec<Vec<Bits>>,
}

impl Stimulus {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Bits>>) -> Result<Self, StimulusError> {
        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.as_str()) {
                return Err(StimulusError::DuplicateColumn(c.clone()));
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != columns.len() {
                return Err(StimulusError::RaggedRow {
                    row: i,
                    found: r.len(),
                    expected: columns.len(),
                });
            }
        }
        Ok(Self { columns, rows })
    }

    /// Builds a stimulus from integer columns, taking widths from the design.
    pub fn from_values(design: &Design, columns: &[(&str, &[u64])]) -> Result<Self, StimulusError> {
        let len = columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut names = Vec::with_capacity(columns.len());
        let mut widths = Vec::with_capacity(columns.len());
        for (name, _) in columns {
            let sig = design
                .signal(name)
                .filter(|s| s.kind == SignalKind::Input)
                .ok_or_else(|| StimulusError::UnknownColumn(name.to_string()))?;
            names.push(name.to_string());
            widths.push(sig.width);
        }
        let rows = (0..len)
            .map(|t| {
                columns
                    .iter()
                    .zip(&widths)
                    .map(|((_, vals), w)| Bits::new(*w, vals.get(t).copied().unwrap_or(0)))
                    .collect()
            })
            .collect();
        Self::new(names, rows)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self, StimulusError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(rec.len());
            for (j, field) in rec.iter().enumerate() {
                let column = columns.get(j).cloned().unwrap_or_default();
                row.push(
                    Bits::from_binary(field).map_err(|source| StimulusError::BadValue {
                        row: i,
                        column,
                        source,
                    })?,
                );
            }
            rows.push(row);
        }
        Self::new(columns, rows)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, StimulusError> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, StimulusError> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Bits::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// Number of cycles `T`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn value(&self, cycle: usize, port: &str) -> Option<Bits> {
        let col = self.columns.iter().position(|c| c == port)?;
        self.rows.get(cycle).map(|r| r[col])
    }

    /// Checks that every cycle assigns every input port a value of the right width.
    pub fn validate(&self, design: &Design) -> Result<(), StimulusError> {
        for c in &self.columns {
            match design.signal(c) {
                Some(s) if s.kind == SignalKind::Input => {}
                _ => return Err(StimulusError::UnknownColumn(c.clone())),
            }
        }
        for p in design.inputs() {
            if !self.columns.contains(&p.name) {
                return Err(StimulusError::MissingColumn(p.name.clone()));
            }
        }
        for (t, row) in self.rows.iter().enumerate() {
            for (c, v) in self.columns.iter().zip(row) {
                let expected = design.signal(c).map(|s| s.width).unwrap_or(0);
                if v.width() != expected {
                    return Err(StimulusError::Width {
                        cycle: t,
                        port: c.clone(),
                        expected,
                        found: v.width(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Resolves columns to signal indices for repeated simulation.
    pub(crate) fn prepare(&self, design: &Design) -> Result<PreparedStimulus, StimulusError> {
        self.validate(design)?;
        let idx: Vec<usize> = self
            .columns
            .iter()
            .map(|c| design.signal_idx(c).expect("validated column"))
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| idx.iter().zip(r).map(|(i, v)| (*i, v.value())).collect())
            .collect();
        Ok(PreparedStimulus { rows })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PreparedStimulus {
    pub rows: Vec<Vec<(usize, u64)>>,
}

impl PreparedStimulus {
    pub fn len(&self) -> usize {
        self.rows.len()
    }
}
