//! Mixed binary feasibility: find hidden-unit values and parameters that
//! satisfy every compiled row with a strictly positive margin.
//!
//! For fixed hidden values the problem is linear. [`lp_feasible`] maximizes
//! one shared margin `s` over
//!
//! ```text
//! row . w + s <= 0,   -B <= w_n <= B,   0 <= s <= cap
//! ```
//!
//! with an exact simplex, and [`solve`] enumerates hidden assignments
//! (leaves) until one admits `s >= s_min`. [`fm_feasible`] answers the same
//! question by Fourier–Motzkin elimination and [`verify`] re-checks
//! witnesses directly against the compiled rows.

pub mod elimination;
pub mod simplex;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::constraints::{compile_system, ConstraintError, ConstraintSystem, Dataset, HiddenAssignment};
use crate::model::{ParameterVector, Topology};
use crate::rational::{ratio, rational_from_i64, Rational};
use simplex::LpOutcome;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeasibilityError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("{0} hidden binaries is beyond exhaustive enumeration (max 63)")]
    TooManyBinaries(usize),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumerationOrder {
    /// Leaf codes counted upward; the first row-major bit is most significant.
    #[default]
    Lexicographic,
    ReverseLexicographic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// `|w_n| <= box_bound` for every parameter.
    pub box_bound: Rational,
    /// Smallest margin that counts as strict feasibility.
    pub min_margin: Rational,
    /// Upper bound on the margin variable.
    pub margin_cap: Rational,
    pub order: EnumerationOrder,
    pub max_leaves: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            box_bound: rational_from_i64(16),
            min_margin: ratio(1, 1000),
            margin_cap: Rational::one(),
            order: EnumerationOrder::Lexicographic,
            max_leaves: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), FeasibilityError> {
        if !self.min_margin.is_positive() {
            return Err(FeasibilityError::InvalidConfig("min_margin must be positive"));
        }
        if self.min_margin > self.margin_cap {
            return Err(FeasibilityError::InvalidConfig("min_margin exceeds margin_cap"));
        }
        if self.margin_cap > self.box_bound {
            return Err(FeasibilityError::InvalidConfig("margin_cap exceeds box_bound"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Infeasible,
    BudgetExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::BudgetExhausted => "budget_exhausted",
        }
    }
}

/// Parameters and hidden values that satisfy every row with slack `<= -margin`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub params: ParameterVector,
    pub hidden: HiddenAssignment,
    pub margin: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityResult {
    pub status: Status,
    pub witness: Option<Witness>,
    pub leaves_explored: u64,
}

/// Maximizes the margin over the box. The origin is always feasible, so
/// this never fails; the returned margin may be zero.
pub fn max_margin(sys: &ConstraintSystem, cfg: &SolverConfig) -> (ParameterVector, Rational) {
    let p = sys.num_params();
    let bound = &cfg.box_bound;
    let width = p + 1;
    let mut rows = Vec::with_capacity(sys.len() + width);
    let mut rhs = Vec::with_capacity(sys.len() + width);

    // Shifted variables y = w + B keep every column non-negative.
    for dense in sys.dense_rows() {
        let total: Rational = dense.iter().fold(Rational::zero(), |acc, c| acc + c);
        let mut row = dense;
        row.push(Rational::one());
        rows.push(row);
        rhs.push(bound * total);
    }
    for col in 0..width {
        let mut row = vec![Rational::zero(); width];
        row[col] = Rational::one();
        rows.push(row);
        rhs.push(if col < p {
            bound * rational_from_i64(2)
        } else {
            cfg.margin_cap.clone()
        });
    }
    let mut objective = vec![Rational::zero(); width];
    objective[p] = Rational::one();

    match simplex::maximize(&objective, &rows, &rhs) {
        LpOutcome::Optimal { x, value } => {
            let values = x[..p].iter().map(|y| y - bound).collect();
            let params = ParameterVector::from_layout(sys.layout(), values)
                .expect("one value per layout column");
            (params, value)
        }
        // The origin is feasible and s is capped.
        LpOutcome::Infeasible | LpOutcome::Unbounded => {
            unreachable!("margin LP is feasible and bounded")
        }
    }
}

/// Witness parameters and their margin when the maximum margin reaches
/// `cfg.min_margin`.
pub fn lp_feasible(
    sys: &ConstraintSystem,
    cfg: &SolverConfig,
) -> Result<Option<(ParameterVector, Rational)>, FeasibilityError> {
    cfg.validate()?;
    let (params, margin) = max_margin(sys, cfg);
    Ok((margin >= cfg.min_margin).then_some((params, margin)))
}

/// Same decision as [`lp_feasible`] by Fourier–Motzkin elimination of
/// `rows . w <= -s_min` inside the box.
pub fn fm_feasible(
    sys: &ConstraintSystem,
    cfg: &SolverConfig,
) -> Result<Option<ParameterVector>, FeasibilityError> {
    cfg.validate()?;
    let p = sys.num_params();
    let mut rows = sys.dense_rows();
    let mut rhs = vec![-cfg.min_margin.clone(); rows.len()];
    for col in 0..p {
        for sign in [1, -1] {
            let mut row = vec![Rational::zero(); p];
            row[col] = rational_from_i64(sign);
            rows.push(row);
            rhs.push(cfg.box_bound.clone());
        }
    }
    Ok(elimination::find_point(&rows, &rhs).map(|values| {
        ParameterVector::from_layout(sys.layout(), values).expect("one value per layout column")
    }))
}

/// Enumerates hidden assignments in `cfg.order` and returns the first leaf
/// whose linear system is strictly feasible.
pub fn solve(
    topo: &Topology,
    data: &Dataset,
    cfg: &SolverConfig,
) -> Result<FeasibilityResult, FeasibilityError> {
    cfg.validate()?;
    let samples = data.num_samples();
    let hidden = topo.num_hidden();
    let binaries = samples * hidden;
    if binaries > 63 {
        return Err(FeasibilityError::TooManyBinaries(binaries));
    }
    let total = 1u64 << binaries;
    let mut explored = 0u64;
    for k in 0..total {
        if cfg.max_leaves.is_some_and(|max| explored >= max) {
            return Ok(FeasibilityResult {
                status: Status::BudgetExhausted,
                witness: None,
                leaves_explored: explored,
            });
        }
        let code = match cfg.order {
            EnumerationOrder::Lexicographic => k,
            EnumerationOrder::ReverseLexicographic => total - 1 - k,
        };
        let assignment = HiddenAssignment::from_index(code, samples, hidden);
        let sys = compile_system(topo, data, &assignment)?;
        explored += 1;
        if let Some((params, margin)) = lp_feasible(&sys, cfg)? {
            return Ok(FeasibilityResult {
                status: Status::Feasible,
                witness: Some(Witness {
                    params,
                    hidden: assignment,
                    margin,
                }),
                leaves_explored: explored,
            });
        }
    }
    Ok(FeasibilityResult {
        status: Status::Infeasible,
        witness: None,
        leaves_explored: explored,
    })
}

/// Recompiles the rows and checks every slack is `<= -margin` exactly.
/// Any inconsistency between the inputs is a failed check.
pub fn verify(
    topo: &Topology,
    data: &Dataset,
    hidden: &HiddenAssignment,
    params: &ParameterVector,
    margin: &Rational,
) -> bool {
    if params.check_domain(topo).is_err() {
        return false;
    }
    let Ok(sys) = compile_system(topo, data, hidden) else {
        return false;
    };
    verify_system(&sys, params, margin)
}

/// [`verify`] for an already compiled system.
pub fn verify_system(sys: &ConstraintSystem, params: &ParameterVector, margin: &Rational) -> bool {
    let bound = -margin;
    sys.constraints().iter().all(|c| {
        c.evaluate_slack(params)
            .map(|slack| slack <= bound)
            .unwrap_or(false)
    })
}
