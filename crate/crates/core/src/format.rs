//! Text formats for schemas, joint distributions, and synthesis configs.
//!
//! All three formats share the same line discipline: UTF-8, `key: value`
//! lines, blank lines between blocks, and `#` comment lines that parsers
//! skip everywhere (emitted files carry their run manifest as comments).
//!
//! Schema config — one block per variable, in order:
//!
//! ```text
//! variable: track
//! role: protected
//! levels: a, b
//! ```
//!
//! Joint distribution — a format line, the schema blocks, then one
//! probability per line in row-major (outcome, unprotected, protected)
//! order with the protected index fastest, printed with 17 significant
//! digits so values round-trip exactly:
//!
//! ```text
//! format: outcome-equal-joint v1
//! <schema blocks>
//! probabilities:
//! 2.79999999999999982e-1
//! ...
//! ```
//!
//! Synthesis config — the schema blocks plus sampling parameters and the
//! chain tables, rows keyed by parent levels (unprotected labels first,
//! then protected, comma-separated):
//!
//! ```text
//! <schema blocks>
//! samples: 100000
//! seed: 42
//! prior: 0.5, 0.5
//! unprotected[a]: 0.7, 0.3
//! unprotected[b]: 0.3, 0.7
//! outcome[fit, a]: 0.8, 0.2
//! ...
//! ```

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::schema::{Role, Variable, VariableSchema};
use crate::synth::SynthConfig;

const JOINT_FORMAT_LINE: &str = "format: outcome-equal-joint v1";

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Numbered, non-blank, non-comment lines (1-based physical line numbers).
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn split_key_value(line_no: usize, line: &str) -> Result<(&str, &str)> {
    match line.split_once(':') {
        Some((k, v)) => Ok((k.trim(), v.trim())),
        None => Err(err(line_no, format!("expected 'key: value', got {line:?}"))),
    }
}

// ---------------------------------------------------------------- schema --

/// Renders a schema in the config grammar; `comments` go first.
pub fn write_schema_config(schema: &VariableSchema, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    for (i, v) in schema.variables().iter().enumerate() {
        if i > 0 || !comments.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("variable: {}\n", v.name()));
        out.push_str(&format!("role: {}\n", v.role()));
        out.push_str(&format!("levels: {}\n", v.levels().join(", ")));
    }
    out
}

pub fn parse_schema_config(text: &str) -> Result<VariableSchema> {
    let lines = content_lines(text);
    if lines.is_empty() {
        return Err(Error::EmptyFile);
    }
    let (variables, rest) = parse_variable_blocks(&lines)?;
    if let Some(&(line_no, line)) = rest.first() {
        return Err(err(line_no, format!("unexpected content {line:?}")));
    }
    VariableSchema::new(variables)
}

/// Parses leading `variable:`/`role:`/`levels:` triplets, returning the
/// variables and whatever lines follow.
fn parse_variable_blocks<'a>(
    lines: &'a [(usize, &'a str)],
) -> Result<(Vec<Variable>, &'a [(usize, &'a str)])> {
    let mut variables = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (line_no, line) = lines[i];
        let (key, value) = split_key_value(line_no, line)?;
        if key != "variable" {
            break;
        }
        if i + 2 >= lines.len() {
            return Err(err(line_no, "variable block is truncated"));
        }
        let (role_no, role_line) = lines[i + 1];
        let (role_key, role_value) = split_key_value(role_no, role_line)?;
        if role_key != "role" {
            return Err(err(role_no, "expected 'role:' after 'variable:'"));
        }
        let role = Role::parse(role_value)
            .ok_or_else(|| err(role_no, format!("unknown role {role_value:?}")))?;
        let (levels_no, levels_line) = lines[i + 2];
        let (levels_key, levels_value) = split_key_value(levels_no, levels_line)?;
        if levels_key != "levels" {
            return Err(err(levels_no, "expected 'levels:' after 'role:'"));
        }
        let levels: Vec<String> = levels_value
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        variables.push(
            Variable::new(value, role, levels)
                .map_err(|e| err(line_no, format!("invalid variable: {e}")))?,
        );
        i += 3;
    }
    Ok((variables, &lines[i..]))
}

// ----------------------------------------------------------------- joint --

/// Renders a joint distribution in the self-describing text format.
pub fn write_joint(dist: &JointDistribution, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str(JOINT_FORMAT_LINE);
    out.push('\n');
    for v in dist.schema().variables() {
        out.push('\n');
        out.push_str(&format!("variable: {}\n", v.name()));
        out.push_str(&format!("role: {}\n", v.role()));
        out.push_str(&format!("levels: {}\n", v.levels().join(", ")));
    }
    out.push_str("\nprobabilities:\n");
    for p in dist.probabilities() {
        out.push_str(&format!("{p:.17e}\n"));
    }
    out
}

pub fn parse_joint(text: &str) -> Result<JointDistribution> {
    let lines = content_lines(text);
    if lines.is_empty() {
        return Err(Error::EmptyFile);
    }
    let (first_no, first) = lines[0];
    if first != JOINT_FORMAT_LINE {
        return Err(err(
            first_no,
            format!("expected {JOINT_FORMAT_LINE:?}, got {first:?}"),
        ));
    }
    let (variables, rest) = parse_variable_blocks(&lines[1..])?;
    let schema = VariableSchema::new(variables)?;
    let Some((marker_no, marker)) = rest.first().copied() else {
        return Err(err(first_no, "missing 'probabilities:' section"));
    };
    if marker != "probabilities:" {
        return Err(err(marker_no, "expected 'probabilities:'"));
    }
    let mut mass = Vec::with_capacity(schema.cell_count());
    for &(line_no, line) in &rest[1..] {
        let p: f64 = line
            .parse()
            .map_err(|_| err(line_no, format!("not a probability: {line:?}")))?;
        mass.push(p);
    }
    JointDistribution::from_probabilities(schema, mass)
}

// ----------------------------------------------------------------- synth --

/// Parses a synthesis config: schema blocks, `samples:`/`seed:`, the
/// protected prior, and the two conditional tables keyed by parent levels.
pub fn parse_synth_config(text: &str) -> Result<SynthConfig> {
    let lines = content_lines(text);
    if lines.is_empty() {
        return Err(Error::EmptyFile);
    }
    let (variables, rest) = parse_variable_blocks(&lines)?;
    let schema = VariableSchema::new(variables)?;

    let mut samples: Option<usize> = None;
    let mut seed: Option<u64> = None;
    let mut prior: Option<Vec<f64>> = None;
    let mut unprotected_rows: Vec<(usize, String, Vec<f64>)> = Vec::new();
    let mut outcome_rows: Vec<(usize, String, Vec<f64>)> = Vec::new();

    for &(line_no, line) in rest {
        let (key, value) = split_key_value(line_no, line)?;
        if let Some(inner) = key.strip_prefix("unprotected[") {
            let inner = strip_bracket(line_no, inner)?;
            unprotected_rows.push((line_no, inner.to_string(), parse_row(line_no, value)?));
        } else if let Some(inner) = key.strip_prefix("outcome[") {
            let inner = strip_bracket(line_no, inner)?;
            outcome_rows.push((line_no, inner.to_string(), parse_row(line_no, value)?));
        } else {
            match key {
                "samples" => {
                    samples = Some(value.parse().map_err(|_| {
                        err(line_no, format!("samples must be a positive integer, got {value:?}"))
                    })?)
                }
                "seed" => {
                    seed = Some(value.parse().map_err(|_| {
                        err(line_no, format!("seed must be a 64-bit integer, got {value:?}"))
                    })?)
                }
                "prior" => prior = Some(parse_row(line_no, value)?),
                other => return Err(err(line_no, format!("unknown key {other:?}"))),
            }
        }
    }

    let samples = samples.ok_or_else(|| err(0, "missing 'samples:'"))?;
    let seed = seed.ok_or_else(|| err(0, "missing 'seed:'"))?;
    let prior = prior.ok_or_else(|| err(0, "missing 'prior:'"))?;

    let u_len = schema.unprotected_len();
    let w_len = schema.protected_len();
    let has_unprotected = schema.unprotected_variables().count() > 0;

    let mut u_table = vec![Vec::new(); w_len];
    if has_unprotected {
        fill_keyed_rows("unprotected", unprotected_rows, |w| w_key(&schema, w), &mut u_table)?;
    } else {
        if let Some((line_no, _, _)) = unprotected_rows.first() {
            return Err(err(
                *line_no,
                "schema has no unprotected variables; drop the 'unprotected[...]' rows",
            ));
        }
        u_table = vec![vec![1.0]; w_len];
    }

    let mut s_table = vec![Vec::new(); u_len * w_len];
    fill_keyed_rows("outcome", outcome_rows, |i| uw_key(&schema, i), &mut s_table)?;

    SynthConfig::new(schema, prior, u_table, s_table, samples, seed)
}

fn strip_bracket(line_no: usize, inner: &str) -> Result<&str> {
    inner
        .strip_suffix(']')
        .map(str::trim)
        .ok_or_else(|| err(line_no, "missing closing ']' in row key"))
}

fn parse_row(line_no: usize, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| err(line_no, format!("not a probability: {:?}", s.trim())))
        })
        .collect()
}

/// Canonical key of a protected cell: per-variable levels joined by ", ".
fn w_key(schema: &VariableSchema, w: usize) -> String {
    composite_key(schema.protected_variables(), w)
}

/// Canonical key of a (u, w) pair with index u·|W|+w.
fn uw_key(schema: &VariableSchema, i: usize) -> String {
    let w_len = schema.protected_len();
    let (u, w) = (i / w_len, i % w_len);
    let u_part = composite_key(schema.unprotected_variables(), u);
    let w_part = composite_key(schema.protected_variables(), w);
    if u_part.is_empty() {
        w_part
    } else {
        format!("{u_part}, {w_part}")
    }
}

fn composite_key<'a>(vars: impl Iterator<Item = &'a Variable>, code: usize) -> String {
    let vars: Vec<&Variable> = vars.collect();
    let mut coords = vec![0usize; vars.len()];
    let mut c = code;
    for (i, v) in vars.iter().enumerate().rev() {
        coords[i] = c % v.levels().len();
        c /= v.levels().len();
    }
    vars.iter()
        .zip(&coords)
        .map(|(v, &i)| v.levels()[i].as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Normalizes a bracketed key for comparison: labels joined by ", ".
fn normalize_key(raw: &str) -> String {
    raw.split(',')
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(", ")
}

fn fill_keyed_rows(
    table: &str,
    rows: Vec<(usize, String, Vec<f64>)>,
    key_of: impl Fn(usize) -> String,
    out: &mut [Vec<f64>],
) -> Result<()> {
    let expected: Vec<(usize, String)> = (0..out.len()).map(|i| (i, key_of(i))).collect();
    for (line_no, raw_key, row) in rows {
        let key = normalize_key(&raw_key);
        let Some((i, _)) = expected.iter().find(|(_, k)| *k == key) else {
            return Err(err(
                line_no,
                format!("{table}[{raw_key}] does not match any cell"),
            ));
        };
        if !out[*i].is_empty() {
            return Err(err(line_no, format!("duplicate row {table}[{key}]")));
        }
        out[*i] = row;
    }
    for (i, key) in &expected {
        if out[*i].is_empty() {
            return Err(err(0, format!("missing row {table}[{key}]")));
        }
    }
    Ok(())
}
