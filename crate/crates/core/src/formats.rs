//! Text and JSON file formats.
//!
//! Topology files:
//!
//! ```text
//! # comment
//! visible=3 hidden=1
//! arc 0 2
//! arc 3 2
//! ```
//!
//! Dataset files hold one sample per line as comma-separated `0`/`1`.
//! Solution and constraint-system files are JSON; every rational in them is
//! a `"num/den"` string.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{Constraint, ConstraintError, ConstraintSystem, Dataset, HiddenAssignment, Origin};
use crate::feasibility::{FeasibilityResult, Witness};
use crate::model::{ModelError, ParamId, ParamIdParseError, ParamLayout, ParameterVector, Topology};
use crate::rational::{format_rational, parse_rational, RationalParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn at(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("solution has status {0:?} and carries no witness")]
    NoWitness(String),
    #[error(transparent)]
    ParamId(#[from] ParamIdParseError),
    #[error(transparent)]
    Rational(#[from] RationalParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("duplicate parameter {0} in constraint-system file")]
    DuplicateParam(ParamId),
    #[error("row {row} refers to column {column}, but there are only {columns} parameters")]
    ColumnOutOfRange {
        row: usize,
        column: usize,
        columns: usize,
    },
}

/// Content lines with their 1-based numbers; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((k + 1, line))
    })
}

fn parse_count(line: usize, token: &str, key: &str) -> Result<usize, ParseError> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| at(line, format!("expected {key}=<count>, found {token:?}")))?
        .parse()
        .map_err(|_| at(line, format!("{key} must be a non-negative integer")))
}

fn parse_unit(line: usize, token: &str) -> Result<usize, ParseError> {
    token
        .parse()
        .map_err(|_| at(line, format!("unit index {token:?} is not a non-negative integer")))
}

pub fn parse_topology(text: &str) -> Result<Topology, ParseError> {
    let mut lines = content_lines(text);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| at(1, "missing header `visible=<I> hidden=<M>`"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let [visible, hidden] = tokens.as_slice() else {
        return Err(at(header_line, "header must be `visible=<I> hidden=<M>`"));
    };
    let num_visible = parse_count(header_line, visible, "visible")?;
    let num_hidden = parse_count(header_line, hidden, "hidden")?;
    if num_visible == 0 {
        return Err(at(header_line, "at least one visible unit is required"));
    }
    let num_units = num_visible + num_hidden;

    let mut seen = BTreeSet::new();
    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let ["arc", src, dst] = tokens.as_slice() else {
            return Err(at(line, format!("expected `arc <src> <dst>`, found {content:?}")));
        };
        let (src, dst) = (parse_unit(line, src)?, parse_unit(line, dst)?);
        if src >= num_units || dst >= num_units {
            return Err(at(
                line,
                format!("arc {src} -> {dst} is out of range for {num_units} units"),
            ));
        }
        if src == dst {
            return Err(at(line, format!("self-arc on unit {src}")));
        }
        if !seen.insert((src, dst)) {
            return Err(at(line, format!("duplicate arc {src} -> {dst}")));
        }
    }
    Topology::new(num_visible, num_hidden, seen).map_err(|e| at(header_line, e.to_string()))
}

pub fn write_topology(topo: &Topology) -> String {
    let mut out = format!("visible={} hidden={}\n", topo.num_visible(), topo.num_hidden());
    for arc in topo.arcs() {
        out.push_str(&format!("arc {} {}\n", arc.src, arc.dst));
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<Dataset, ParseError> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut width = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        let row = content
            .split(',')
            .map(|token| match token.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(at(line, format!("entry {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(at(line, format!("row has {} fields, expected {w}", row.len())));
            }
            Some(_) => {}
        }
        rows.push(row);
    }
    Dataset::new(rows).map_err(|e| at(1, e.to_string()))
}

pub fn write_dataset(data: &Dataset) -> String {
    data.rows()
        .iter()
        .map(|row| {
            let fields: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            fields.join(",") + "\n"
        })
        .collect()
}

/// Output of `solve`, input of `verify`, `sample` and `sweep`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: String,
    /// Row-major `D x M` bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    #[serde(default)]
    pub leaves_explored: u64,
}

impl SolutionFile {
    pub fn from_result(result: &FeasibilityResult) -> Self {
        let witness = result.witness.as_ref();
        SolutionFile {
            status: result.status.as_str().to_string(),
            hidden: witness.map(|w| w.hidden.to_bit_string()),
            params: witness
                .map(|w| {
                    w.params
                        .iter()
                        .map(|(id, v)| (id.to_string(), format_rational(v)))
                        .collect()
                })
                .unwrap_or_default(),
            margin: witness.map(|w| format_rational(&w.margin)),
            leaves_explored: result.leaves_explored,
        }
    }

    pub fn from_witness(witness: &Witness, leaves_explored: u64) -> Self {
        SolutionFile {
            status: "feasible".to_string(),
            hidden: Some(witness.hidden.to_bit_string()),
            params: witness
                .params
                .iter()
                .map(|(id, v)| (id.to_string(), format_rational(v)))
                .collect(),
            margin: Some(format_rational(&witness.margin)),
            leaves_explored,
        }
    }
}

/// Parameters of a solution file, checked against `topo`.
pub fn params_from_solution(
    file: &SolutionFile,
    topo: &Topology,
) -> Result<ParameterVector, FormatError> {
    if file.params.is_empty() {
        return Err(FormatError::NoWitness(file.status.clone()));
    }
    let pairs = file
        .params
        .iter()
        .map(|(id, value)| Ok((id.parse::<ParamId>()?, parse_rational(value)?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(ParameterVector::for_topology(topo, pairs)?)
}

pub fn witness_from_solution(
    file: &SolutionFile,
    topo: &Topology,
    data: &Dataset,
) -> Result<Witness, FormatError> {
    let params = params_from_solution(file, topo)?;
    let hidden_text = file
        .hidden
        .as_deref()
        .ok_or_else(|| FormatError::NoWitness(file.status.clone()))?;
    let hidden = HiddenAssignment::from_bit_string(hidden_text, data.num_samples(), topo.num_hidden())?;
    let margin = match &file.margin {
        Some(m) => parse_rational(m)?,
        None => return Err(FormatError::NoWitness(file.status.clone())),
    };
    Ok(Witness {
        params,
        hidden,
        margin,
    })
}

/// Output of `compile`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDump {
    /// Column order, e.g. `["q_0_2", "q_1_2", "b_2"]`.
    pub params: Vec<String>,
    pub rows: Vec<RowDump>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDump {
    /// Column index to coefficient; zero coefficients are omitted.
    pub coeffs: BTreeMap<usize, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<OriginDump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginDump {
    pub sample: usize,
    pub unit: usize,
}

impl SystemDump {
    pub fn from_system(sys: &ConstraintSystem) -> Self {
        let layout = sys.layout();
        SystemDump {
            params: layout.ids().iter().map(ToString::to_string).collect(),
            rows: sys
                .constraints()
                .iter()
                .map(|c| RowDump {
                    coeffs: c
                        .coeffs
                        .iter()
                        .map(|(id, v)| {
                            let col = layout.column(id).expect("row ids are layout columns");
                            (col, format_rational(v))
                        })
                        .collect(),
                    origin: c.origin.map(|o| OriginDump {
                        sample: o.sample,
                        unit: o.unit,
                    }),
                })
                .collect(),
        }
    }

    pub fn to_system(&self) -> Result<ConstraintSystem, FormatError> {
        let ids = self
            .params
            .iter()
            .map(|s| s.parse::<ParamId>())
            .collect::<Result<Vec<_>, _>>()?;
        let layout = ParamLayout::new(ids).map_err(FormatError::DuplicateParam)?;
        let constraints = self
            .rows
            .iter()
            .enumerate()
            .map(|(row, dump)| {
                let coeffs = dump
                    .coeffs
                    .iter()
                    .map(|(&column, value)| {
                        if column >= layout.len() {
                            return Err(FormatError::ColumnOutOfRange {
                                row,
                                column,
                                columns: layout.len(),
                            });
                        }
                        Ok((layout.id(column), parse_rational(value)?))
                    })
                    .collect::<Result<BTreeMap<_, _>, FormatError>>()?;
                Ok(Constraint {
                    coeffs,
                    origin: dump.origin.map(|o| Origin {
                        sample: o.sample,
                        unit: o.unit,
                    }),
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(ConstraintSystem::new(layout, constraints)?)
    }
}
