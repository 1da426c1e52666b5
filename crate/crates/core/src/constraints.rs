//! Turns a dataset and a hidden-unit assignment into linear inequalities on
//! the parameters.
//!
//! Every sample `d` pins the full state `x_d`. For each constrained unit `i`
//! the state must be a fixed point of the unit response, which is the
//! inequality
//!
//! ```text
//! (-1)^{x_{d,i}} * ( sum_{j -> i} q_{j,i} x_{d,j} + b_i ) <= 0
//! ```
//!
//! Rows are emitted samples-outer, units-inner, both ascending. Units without
//! incoming arcs get no row.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{ParamId, ParamLayout, ParameterVector, Pattern, Topology};
use crate::rational::{rational_from_i64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("dataset rows must have at least one column")]
    EmptyRow,
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry {value} in row {row} is not 0 or 1")]
    NonBinary { row: usize, value: u8 },
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("hidden assignment string has invalid character {0:?}")]
    InvalidHiddenBit(char),
    #[error("parameter {0} is missing")]
    MissingParameter(ParamId),
    #[error("parameter {0} is not a column of the system")]
    UnknownParameter(ParamId),
    #[error("margin must be non-negative")]
    NegativeMargin,
}

/// `D` visible binary vectors of width `I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    width: usize,
    rows: Vec<Vec<bool>>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self, ConstraintError> {
        let width = rows.first().ok_or(ConstraintError::EmptyDataset)?.len();
        if width == 0 {
            return Err(ConstraintError::EmptyRow);
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(ConstraintError::RaggedRow {
                row,
                expected: width,
                found: r.len(),
            });
        }
        Ok(Dataset { width, rows })
    }

    pub fn from_bits(rows: &[Vec<u8>]) -> Result<Self, ConstraintError> {
        let rows = rows
            .iter()
            .enumerate()
            .map(|(row, r)| {
                r.iter()
                    .map(|&value| match value {
                        0 => Ok(false),
                        1 => Ok(true),
                        value => Err(ConstraintError::NonBinary { row, value }),
                    })
                    .collect()
            })
            .collect::<Result<Vec<Vec<bool>>, _>>()?;
        Self::new(rows)
    }

    pub fn num_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, sample: usize) -> &[bool] {
        &self.rows[sample]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn contains(&self, visible: &[bool]) -> bool {
        self.rows.iter().any(|r| r.as_slice() == visible)
    }
}

/// Hidden-unit values, one row of `M` bits per sample, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HiddenAssignment {
    num_samples: usize,
    num_hidden: usize,
    bits: Vec<bool>,
}

impl HiddenAssignment {
    pub fn new(
        num_samples: usize,
        num_hidden: usize,
        bits: Vec<bool>,
    ) -> Result<Self, ConstraintError> {
        if bits.len() != num_samples * num_hidden {
            return Err(ConstraintError::DimensionMismatch {
                what: "hidden assignment bits",
                expected: num_samples * num_hidden,
                found: bits.len(),
            });
        }
        Ok(HiddenAssignment {
            num_samples,
            num_hidden,
            bits,
        })
    }

    pub fn zeros(num_samples: usize, num_hidden: usize) -> Self {
        HiddenAssignment {
            num_samples,
            num_hidden,
            bits: vec![false; num_samples * num_hidden],
        }
    }

    /// Leaf `code` of the lexicographic enumeration: the first bit of the
    /// row-major string is the most significant.
    pub fn from_index(code: u64, num_samples: usize, num_hidden: usize) -> Self {
        let bits = Pattern::from_index(code, num_samples * num_hidden)
            .bits()
            .to_vec();
        HiddenAssignment {
            num_samples,
            num_hidden,
            bits,
        }
    }

    /// Parses the row-major bit string written by [`Self::to_bit_string`].
    pub fn from_bit_string(
        text: &str,
        num_samples: usize,
        num_hidden: usize,
    ) -> Result<Self, ConstraintError> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ConstraintError::InvalidHiddenBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(num_samples, num_hidden, bits)
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn num_hidden(&self) -> usize {
        self.num_hidden
    }

    pub fn get(&self, sample: usize, hidden: usize) -> bool {
        self.bits[sample * self.num_hidden + hidden]
    }

    pub fn row(&self, sample: usize) -> &[bool] {
        &self.bits[sample * self.num_hidden..(sample + 1) * self.num_hidden]
    }

    pub fn complement(&self) -> Self {
        HiddenAssignment {
            bits: self.bits.iter().map(|b| !b).collect(),
            ..self.clone()
        }
    }
}

/// Sample and unit a row was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Origin {
    pub sample: usize,
    pub unit: usize,
}

/// `sum coeffs[n] * w_n <= 0`. Zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: BTreeMap<ParamId, Rational>,
    pub origin: Option<Origin>,
}

impl Constraint {
    /// Left-hand side at `params`. The row holds iff the value is `<= 0`.
    pub fn evaluate_slack(&self, params: &ParameterVector) -> Result<Rational, ConstraintError> {
        self.coeffs
            .iter()
            .try_fold(Rational::zero(), |acc, (id, coeff)| {
                let value = params
                    .get(id)
                    .ok_or(ConstraintError::MissingParameter(*id))?;
                Ok(acc + coeff * value)
            })
    }

    pub fn negated(&self) -> Self {
        Constraint {
            coeffs: self.coeffs.iter().map(|(id, c)| (*id, -c)).collect(),
            origin: self.origin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    constraints: Vec<Constraint>,
    layout: ParamLayout,
}

impl ConstraintSystem {
    /// Every coefficient id must be a column of `layout`.
    pub fn new(layout: ParamLayout, constraints: Vec<Constraint>) -> Result<Self, ConstraintError> {
        for c in &constraints {
            if let Some(id) = c.coeffs.keys().find(|id| layout.column(id).is_none()) {
                return Err(ConstraintError::UnknownParameter(*id));
            }
        }
        Ok(ConstraintSystem {
            constraints,
            layout,
        })
    }

    /// Builds a system from dense rows over `layout`, without origins.
    pub fn from_dense(layout: ParamLayout, rows: &[Vec<Rational>]) -> Result<Self, ConstraintError> {
        let constraints = rows
            .iter()
            .map(|row| {
                if row.len() != layout.len() {
                    return Err(ConstraintError::DimensionMismatch {
                        what: "dense row width",
                        expected: layout.len(),
                        found: row.len(),
                    });
                }
                let coeffs = row
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(col, c)| (layout.id(col), c.clone()))
                    .collect();
                Ok(Constraint {
                    coeffs,
                    origin: None,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(ConstraintSystem {
            constraints,
            layout,
        })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn num_params(&self) -> usize {
        self.layout.len()
    }

    /// Coefficient matrix with one column per layout entry.
    pub fn dense_rows(&self) -> Vec<Vec<Rational>> {
        self.constraints
            .iter()
            .map(|c| {
                let mut row = vec![Rational::zero(); self.layout.len()];
                for (id, coeff) in &c.coeffs {
                    let col = self
                        .layout
                        .column(id)
                        .expect("coefficient ids are checked at construction");
                    row[col] = coeff.clone();
                }
                row
            })
            .collect()
    }

    pub fn slacks(&self, params: &ParameterVector) -> Result<Vec<Rational>, ConstraintError> {
        self.constraints
            .iter()
            .map(|c| c.evaluate_slack(params))
            .collect()
    }
}

pub fn compile_system(
    topo: &Topology,
    data: &Dataset,
    hidden: &HiddenAssignment,
) -> Result<ConstraintSystem, ConstraintError> {
    if data.width() != topo.num_visible() {
        return Err(ConstraintError::DimensionMismatch {
            what: "dataset width vs visible units",
            expected: topo.num_visible(),
            found: data.width(),
        });
    }
    if hidden.num_samples() != data.num_samples() {
        return Err(ConstraintError::DimensionMismatch {
            what: "hidden assignment rows vs samples",
            expected: data.num_samples(),
            found: hidden.num_samples(),
        });
    }
    if hidden.num_hidden() != topo.num_hidden() {
        return Err(ConstraintError::DimensionMismatch {
            what: "hidden assignment columns vs hidden units",
            expected: topo.num_hidden(),
            found: hidden.num_hidden(),
        });
    }

    let one = rational_from_i64(1);
    let minus_one = rational_from_i64(-1);
    let targets: Vec<(usize, Vec<usize>)> = topo
        .constrained_units()
        .into_iter()
        .map(|unit| (unit, topo.sources_of(unit)))
        .collect();

    let mut constraints = Vec::with_capacity(data.num_samples() * targets.len());
    for sample in 0..data.num_samples() {
        let state: Vec<bool> = data
            .row(sample)
            .iter()
            .chain(hidden.row(sample))
            .copied()
            .collect();
        for (unit, sources) in &targets {
            let sign = if state[*unit] { &minus_one } else { &one };
            let mut coeffs: BTreeMap<ParamId, Rational> = sources
                .iter()
                .filter(|&&src| state[src])
                .map(|&src| (ParamId::Weight { src, dst: *unit }, sign.clone()))
                .collect();
            coeffs.insert(ParamId::Bias { unit: *unit }, sign.clone());
            constraints.push(Constraint {
                coeffs,
                origin: Some(Origin {
                    sample,
                    unit: *unit,
                }),
            });
        }
    }
    Ok(ConstraintSystem {
        constraints,
        layout: topo.param_layout(),
    })
}

pub fn evaluate_slack(c: &Constraint, params: &ParameterVector) -> Result<Rational, ConstraintError> {
    c.evaluate_slack(params)
}

/// Number of rows with slack `<= -margin`.
pub fn count_satisfied(
    sys: &ConstraintSystem,
    params: &ParameterVector,
    margin: &Rational,
) -> Result<usize, ConstraintError> {
    if margin.is_negative() {
        return Err(ConstraintError::NegativeMargin);
    }
    let bound = -margin;
    let mut count = 0;
    for c in sys.constraints() {
        if c.evaluate_slack(params)? <= bound {
            count += 1;
        }
    }
    Ok(count)
}

/// Largest `s` with every slack `<= -s`, i.e. minus the largest slack.
/// `None` for an empty system.
pub fn achieved_margin(
    sys: &ConstraintSystem,
    params: &ParameterVector,
) -> Result<Option<Rational>, ConstraintError> {
    Ok(sys.slacks(params)?.into_iter().max().map(|worst| -worst))
}
