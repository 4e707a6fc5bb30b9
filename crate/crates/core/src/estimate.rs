//! Estimation of joint distributions from individual-level records, with
//! explicit additive smoothing and empty-cell accounting.
//!
//! Smoothing is never applied implicitly: the default pseudo-count is zero
//! and empty cells are surfaced in the diagnostics, because a smoothed table
//! can never contain the structural zeros that feasibility checking needs to
//! see.

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::schema::{Assignment, VariableSchema};
use std::path::Path;

/// Individual-level records under a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: VariableSchema,
    records: Vec<Assignment>,
}

impl Dataset {
    /// Validates every record against the schema; at least one record is
    /// required.
    pub fn new(schema: VariableSchema, records: Vec<Assignment>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for r in &records {
            schema.validate_assignment(r)?;
        }
        Ok(Dataset { schema, records })
    }

    pub fn schema(&self) -> &VariableSchema {
        &self.schema
    }

    pub fn records(&self) -> &[Assignment] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Additive (pseudo-count) smoothing added to every joint cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSpec {
    alpha: f64,
}

impl SmoothingSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::NegativeAlpha { alpha });
        }
        Ok(SmoothingSpec { alpha })
    }

    /// No smoothing: plain relative frequencies.
    pub fn none() -> Self {
        SmoothingSpec { alpha: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// What the estimator saw: zero-count cells and the implied sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateDiagnostics {
    pub record_count: usize,
    /// Number of joint cells with a raw count of zero.
    pub empty_cells: usize,
    /// Display labels of the empty cells, in cell order.
    pub empty_cell_labels: Vec<String>,
    /// Records plus total pseudo-count: n + alpha · #cells.
    pub effective_sample_size: f64,
}

/// Relative-frequency estimate with additive smoothing:
/// cell mass = (count + alpha) / (n + alpha · #cells).
pub fn estimate_joint(
    data: &Dataset,
    smoothing: &SmoothingSpec,
) -> Result<(JointDistribution, EstimateDiagnostics)> {
    let schema = data.schema();
    let cells = schema.cell_count();
    let mut counts = vec![0u64; cells];
    for r in data.records() {
        let (s, u, w) = schema.split_assignment(r);
        counts[schema.cell_index(s, u, w)] += 1;
    }
    let n = data.len() as f64;
    let alpha = smoothing.alpha();
    let denom = n + alpha * cells as f64;
    let mass: Vec<f64> = counts.iter().map(|&c| (c as f64 + alpha) / denom).collect();

    let empty: Vec<usize> = (0..cells).filter(|&c| counts[c] == 0).collect();
    let empty_cell_labels = empty
        .iter()
        .map(|&c| {
            let (s, u, w) = schema.cell_coords(c);
            schema.cell_label(s, u, w)
        })
        .collect();
    let diagnostics = EstimateDiagnostics {
        record_count: data.len(),
        empty_cells: empty.len(),
        empty_cell_labels,
        effective_sample_size: denom,
    };
    let dist = JointDistribution::from_probabilities(schema.clone(), mass)?;
    Ok((dist, diagnostics))
}

/// Reads a dataset from a CSV file.
///
/// Dialect: UTF-8, comma-separated, one header row naming every schema
/// variable (any column order), one column per variable, no quoting. Cells
/// are trimmed of surrounding whitespace. Blank lines and lines starting
/// with `#` are skipped, which lets emitted files carry their manifest as
/// comments.
pub fn load_csv(path: &Path, schema: &VariableSchema) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, schema)
}

/// The parser behind [`load_csv`]; line numbers in errors are 1-based
/// physical lines of the input text.
pub fn parse_csv(text: &str, schema: &VariableSchema) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (_, header) = lines.next().ok_or(Error::EmptyFile)?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    for (i, c) in columns.iter().enumerate() {
        if columns[..i].contains(c) {
            return Err(Error::DuplicateColumn {
                column: c.to_string(),
            });
        }
        if schema.variable(c).is_none() {
            return Err(Error::UnexpectedColumn {
                column: c.to_string(),
            });
        }
    }
    // Map each schema variable to its column position.
    let mut col_of_var = Vec::with_capacity(schema.variables().len());
    for v in schema.variables() {
        match columns.iter().position(|c| *c == v.name()) {
            Some(i) => col_of_var.push(i),
            None => {
                return Err(Error::MissingColumn {
                    column: v.name().to_string(),
                })
            }
        }
    }

    let mut records = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::RaggedRow {
                line: line_no,
                expected: columns.len(),
                found: fields.len(),
            });
        }
        let mut idx = Vec::with_capacity(schema.variables().len());
        for (v, &col) in schema.variables().iter().zip(&col_of_var) {
            let value = fields[col];
            match v.level_index(value) {
                Some(i) => idx.push(i),
                None => {
                    return Err(Error::UnknownLevel {
                        line: line_no,
                        column: v.name().to_string(),
                        value: value.to_string(),
                    })
                }
            }
        }
        records.push(Assignment::new(idx));
    }
    Dataset::new(schema.clone(), records)
}

/// Renders a dataset in the CSV dialect of [`load_csv`], one header line
/// plus one row per record in order. `comments` are emitted first, one `#`
/// line each.
pub fn write_csv(data: &Dataset, comments: &[String]) -> String {
    let schema = data.schema();
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    let header: Vec<&str> = schema.variables().iter().map(|v| v.name()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in data.records() {
        let row: Vec<&str> = schema
            .variables()
            .iter()
            .zip(r.indices())
            .map(|(v, &i)| v.levels()[i].as_str())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
