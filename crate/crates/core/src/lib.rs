//! Training deterministic Boltzmann machines as exact mixed binary
//! feasibility problems, and sampling patterns from the maximum-entropy
//! posterior around a solution.
//!
//! ```
//! use bmfeas::feasibility::{solve, SolverConfig, Status};
//! use bmfeas::fixtures;
//!
//! let result = solve(&fixtures::fig2b(), &fixtures::xor_dataset(), &SolverConfig::default()).unwrap();
//! assert_eq!(result.status, Status::Feasible);
//! ```

pub mod cli;
pub mod constraints;
pub mod eval;
pub mod feasibility;
pub mod fixtures;
pub mod formats;
pub mod model;
pub mod posterior;
pub mod rational;

pub use constraints::{compile_system, ConstraintSystem, Dataset, HiddenAssignment};
pub use feasibility::{solve, verify, FeasibilityResult, SolverConfig, Status, Witness};
pub use model::{complete_pattern, ParamId, ParameterVector, Pattern, Topology, UpdateSchedule};
pub use posterior::{build_posterior, sample_patterns, SamplerConfig, TailMode};
pub use rational::Rational;
