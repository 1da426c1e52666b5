//! Metrics over sampled batches and the two canned experiments: the noise
//! sweep over `epsilon` and the three-architecture XOR feasibility check.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::Dataset;
use crate::feasibility::{solve, verify, FeasibilityError, FeasibilityResult, SolverConfig, Status};
use crate::fixtures;
use crate::model::{ParameterVector, Topology};
use crate::posterior::{build_posterior, sample_patterns, PosteriorError, SampleBatch, SamplerConfig};
use crate::rational::format_rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("batch patterns have {found} visible bits, dataset rows have {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("cannot compute metrics of an empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Posterior(#[from] PosteriorError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub size: usize,
    /// Share of samples whose visible pattern is a dataset row.
    pub in_dataset_fraction: f64,
    pub convergence_rate: f64,
    /// Visible pattern (e.g. `"011"`) to count.
    pub histogram: BTreeMap<String, usize>,
}

pub fn pattern_fraction(batch: &SampleBatch, data: &Dataset) -> Result<Metrics, EvalError> {
    if batch.is_empty() {
        return Err(EvalError::EmptyBatch);
    }
    let mut histogram = BTreeMap::new();
    let mut hits = 0usize;
    for visible in &batch.visible_patterns {
        if visible.len() != data.width() {
            return Err(EvalError::WidthMismatch {
                expected: data.width(),
                found: visible.len(),
            });
        }
        if data.contains(visible.bits()) {
            hits += 1;
        }
        *histogram.entry(visible.to_bit_string()).or_insert(0) += 1;
    }
    let size = batch.len();
    let converged = batch.converged_flags.iter().filter(|&&c| c).count();
    Ok(Metrics {
        size,
        in_dataset_fraction: hits as f64 / size as f64,
        convergence_rate: converged as f64 / size as f64,
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub seed: u64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMean {
    pub epsilon: f64,
    pub mean_in_dataset_fraction: f64,
    pub mean_convergence_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Fractions for `seed`, in the order the epsilons were requested.
    pub fn fractions_for_seed(&self, seed: u64) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.seed == seed)
            .map(|r| (r.epsilon, r.metrics.in_dataset_fraction))
            .collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        let mut seeds: Vec<u64> = Vec::new();
        for row in &self.rows {
            if !seeds.contains(&row.seed) {
                seeds.push(row.seed);
            }
        }
        seeds
    }

    /// Per-epsilon averages over seeds, in first-seen epsilon order.
    pub fn means(&self) -> Vec<SweepMean> {
        let mut order: Vec<f64> = Vec::new();
        for row in &self.rows {
            if !order.contains(&row.epsilon) {
                order.push(row.epsilon);
            }
        }
        order
            .into_iter()
            .map(|epsilon| {
                let cells: Vec<&Metrics> = self
                    .rows
                    .iter()
                    .filter(|r| r.epsilon == epsilon)
                    .map(|r| &r.metrics)
                    .collect();
                let n = cells.len() as f64;
                SweepMean {
                    epsilon,
                    mean_in_dataset_fraction: cells.iter().map(|m| m.in_dataset_fraction).sum::<f64>() / n,
                    mean_convergence_rate: cells.iter().map(|m| m.convergence_rate).sum::<f64>() / n,
                }
            })
            .collect()
    }

    /// Plain-text table: one row per cell, then one mean row per epsilon.
    pub fn to_table(&self) -> String {
        let mut out = String::from("epsilon      seed  in_dataset  converged\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>6}  {:>10.4}  {:>9.4}\n",
                row.epsilon, row.seed, row.metrics.in_dataset_fraction, row.metrics.convergence_rate
            ));
        }
        for mean in self.means() {
            out.push_str(&format!(
                "{:<10} {:>6}  {:>10.4}  {:>9.4}\n",
                mean.epsilon, "mean", mean.mean_in_dataset_fraction, mean.mean_convergence_rate
            ));
        }
        out
    }
}

/// Runs the sampler for every `(epsilon, seed)` pair, epsilons outer.
pub fn noise_sweep(
    witness: &ParameterVector,
    topo: &Topology,
    data: &Dataset,
    epsilons: &[f64],
    size: usize,
    seeds: &[u64],
    base: &SamplerConfig,
) -> Result<SweepReport, EvalError> {
    let mut rows = Vec::with_capacity(epsilons.len() * seeds.len());
    for &epsilon in epsilons {
        for &seed in seeds {
            let cfg = SamplerConfig {
                epsilon,
                seed,
                size,
                ..base.clone()
            };
            let spec = build_posterior(witness, &cfg)?;
            let batch = sample_patterns(&spec, topo, &cfg)?;
            rows.push(SweepRow {
                epsilon,
                seed,
                metrics: pattern_fraction(&batch, data)?,
            });
        }
    }
    Ok(SweepReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrioCase {
    pub name: &'static str,
    pub expected: Status,
    pub result: FeasibilityResult,
    /// Whether a reported witness passed the independent check. `true` when
    /// there is no witness to check.
    pub witness_verified: bool,
}

impl TrioCase {
    pub fn passed(&self) -> bool {
        self.result.status == self.expected && self.witness_verified
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrioReport {
    pub cases: Vec<TrioCase>,
}

impl TrioReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(TrioCase::passed)
    }
}

impl fmt::Display for TrioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for case in &self.cases {
            let verdict = if case.passed() { "ok" } else { "MISMATCH" };
            writeln!(
                f,
                "{:<3} expected {:<10} got {:<16} leaves {:<3} {}",
                case.name,
                case.expected.as_str(),
                case.result.status.as_str(),
                case.result.leaves_explored,
                verdict
            )?;
            if let Some(w) = &case.result.witness {
                writeln!(
                    f,
                    "    hidden {}  margin {}  verified {}",
                    w.hidden.to_bit_string(),
                    format_rational(&w.margin),
                    case.witness_verified
                )?;
                for (id, value) in w.params.iter() {
                    writeln!(f, "    {id} = {}", format_rational(value))?;
                }
            }
        }
        Ok(())
    }
}

/// Solves XOR on the three reference architectures: the two-arc network
/// must be infeasible, the hidden-unit networks feasible.
pub fn xor_trio() -> Result<TrioReport, EvalError> {
    let data = fixtures::xor_dataset();
    let cfg = SolverConfig::default();
    let cases = [
        ("2A", fixtures::fig2a(), Status::Infeasible),
        ("2B", fixtures::fig2b(), Status::Feasible),
        ("2C", fixtures::fig2c(), Status::Feasible),
    ]
    .into_iter()
    .map(|(name, topo, expected)| {
        let result = solve(&topo, &data, &cfg)?;
        let witness_verified = result
            .witness
            .as_ref()
            .is_none_or(|w| verify(&topo, &data, &w.hidden, &w.params, &w.margin));
        Ok(TrioCase {
            name,
            expected,
            result,
            witness_verified,
        })
    })
    .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(TrioReport { cases })
}
