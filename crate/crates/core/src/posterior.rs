//! Product-exponential posterior over the parameters, and pattern sampling.
//!
//! Each parameter `w_n` gets an independent two-parameter exponential
//! distribution with density `alpha_n exp(-alpha_n (w_n - beta_n))` on
//! `[beta_n, inf)`, mean `beta_n + 1/alpha_n` and standard deviation
//! `1/alpha_n`. Draws use the inverse transform
//! `w = beta - (1/alpha) ln(1 - u)` of a uniform deviate `u` in `[0, 1)`.
//!
//! A sample is produced by drawing one full parameter vector and completing
//! a uniformly random initial pattern under it. Sample `s` reads only its
//! own ChaCha stream (`seed`, stream `s`) and always consumes the same
//! number of deviates: one `f64` per parameter, then one `bool` per unit.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Machine, ModelError, ParamId, ParameterVector, Pattern, Topology, UpdateSchedule};
use crate::rational::{rational_from_i64, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosteriorError {
    #[error("epsilon must be a positive finite number, got {0}")]
    InvalidEpsilon(f64),
    #[error("scale C must be positive")]
    InvalidScale,
    #[error("sample size must be at least 1")]
    ZeroSize,
    #[error("uniform deviate {0} is outside [0, 1)")]
    DeviateOutOfRange(f64),
    #[error("posterior parameters do not match the topology: {0}")]
    Mismatch(#[from] ModelError),
}

/// Where the witness sits in each parameter's distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMode {
    /// The witness is the location `beta`; draws never fall below it.
    Literal,
    /// The witness is the mean; draws are shifted down by `1/alpha`.
    #[default]
    Centered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// `1/alpha_n = epsilon * C` for every parameter.
    pub epsilon: f64,
    /// Unit in which the witness is expressed; `beta_n = C * w*_n`.
    pub scale_c: Rational,
    pub size: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tail_mode: TailMode,
    pub schedule: UpdateSchedule,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            epsilon: 0.1,
            scale_c: rational_from_i64(1),
            size: 1500,
            seed: 0,
            max_iter: 10,
            tail_mode: TailMode::default(),
            schedule: UpdateSchedule::default(),
        }
    }
}

impl SamplerConfig {
    fn validate(&self) -> Result<(), PosteriorError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(PosteriorError::InvalidEpsilon(self.epsilon));
        }
        if self.scale_c <= Rational::zero() {
            return Err(PosteriorError::InvalidScale);
        }
        if self.size == 0 {
            return Err(PosteriorError::ZeroSize);
        }
        if self.max_iter == 0 {
            return Err(PosteriorError::Mismatch(ModelError::ZeroIterations));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEntry {
    pub beta: Rational,
    /// Scale `1/alpha`, also the standard deviation.
    pub inv_alpha: f64,
}

impl PosteriorEntry {
    /// Mean of the exponential as parameterized.
    pub fn mean(&self) -> f64 {
        to_f64(&self.beta) + self.inv_alpha
    }
}

/// One entry per parameter, in parameter-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSpec {
    entries: Vec<(ParamId, PosteriorEntry)>,
}

impl PosteriorSpec {
    pub fn entries(&self) -> &[(ParamId, PosteriorEntry)] {
        &self.entries
    }

    pub fn get(&self, id: &ParamId) -> Option<&PosteriorEntry> {
        self.entries.iter().find(|(i, _)| i == id).map(|(_, e)| e)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_topology(&self, topo: &Topology) -> Result<(), PosteriorError> {
        let layout = topo.param_layout();
        if layout.len() != self.entries.len() {
            return Err(ModelError::ParameterCount {
                expected: layout.len(),
                found: self.entries.len(),
            }
            .into());
        }
        for (expected, (id, _)) in layout.ids().iter().zip(&self.entries) {
            if expected != id {
                return Err(ModelError::MissingParameter(*expected).into());
            }
        }
        Ok(())
    }
}

pub fn build_posterior(
    witness: &ParameterVector,
    cfg: &SamplerConfig,
) -> Result<PosteriorSpec, PosteriorError> {
    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
        return Err(PosteriorError::InvalidEpsilon(cfg.epsilon));
    }
    if cfg.scale_c <= Rational::zero() {
        return Err(PosteriorError::InvalidScale);
    }
    let inv_alpha = cfg.epsilon * to_f64(&cfg.scale_c);
    let entries = witness
        .iter()
        .map(|(id, w)| {
            (
                *id,
                PosteriorEntry {
                    beta: w * &cfg.scale_c,
                    inv_alpha,
                },
            )
        })
        .collect();
    Ok(PosteriorSpec { entries })
}

/// Inverse-transform draw from one entry.
pub fn draw_parameter(entry: &PosteriorEntry, u: f64, mode: TailMode) -> Result<f64, PosteriorError> {
    if !(0.0..1.0).contains(&u) {
        return Err(PosteriorError::DeviateOutOfRange(u));
    }
    let tail = -entry.inv_alpha * (-u).ln_1p();
    let beta = to_f64(&entry.beta);
    Ok(match mode {
        TailMode::Literal => beta + tail,
        TailMode::Centered => beta - entry.inv_alpha + tail,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleBatch {
    pub visible_patterns: Vec<Pattern>,
    pub converged_flags: Vec<bool>,
    pub full_patterns: Vec<Pattern>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.full_patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full_patterns.is_empty()
    }

    fn push(&mut self, full: Pattern, converged: bool, num_visible: usize) {
        self.visible_patterns.push(full.prefix(num_visible));
        self.converged_flags.push(converged);
        self.full_patterns.push(full);
    }
}

/// Stream for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Consumes exactly `spec.len()` uniforms and `num_units` bits.
fn draw_inputs<R: Rng>(
    rng: &mut R,
    spec: &PosteriorSpec,
    num_units: usize,
    mode: TailMode,
) -> (Vec<f64>, Pattern) {
    let weights = spec
        .entries
        .iter()
        .map(|(_, entry)| {
            let u: f64 = rng.gen();
            draw_parameter(entry, u, mode).expect("gen::<f64> lies in [0, 1)")
        })
        .collect();
    let init = Pattern::new((0..num_units).map(|_| rng.gen::<bool>()).collect());
    (weights, init)
}

/// Draws sample `index` on its own stream. `init` overrides the random
/// initial pattern; the bits are still drawn so the stream layout stays fixed.
pub fn draw_sample(
    spec: &PosteriorSpec,
    topo: &Topology,
    cfg: &SamplerConfig,
    index: u64,
    init: Option<&Pattern>,
) -> Result<(Pattern, bool), PosteriorError> {
    let mut rng = sample_rng(cfg.seed, index);
    let (weights, random_init) = draw_inputs(&mut rng, spec, topo.num_units(), cfg.tail_mode);
    let machine = Machine::from_layout_values(topo, &weights)?;
    let start = init.unwrap_or(&random_init);
    let result = machine.complete(start, cfg.max_iter, cfg.schedule)?;
    Ok((result.pattern, result.converged))
}

pub fn sample_patterns(
    spec: &PosteriorSpec,
    topo: &Topology,
    cfg: &SamplerConfig,
) -> Result<SampleBatch, PosteriorError> {
    cfg.validate()?;
    spec.check_topology(topo)?;
    let mut batch = SampleBatch::default();
    for index in 0..cfg.size as u64 {
        let (full, converged) = draw_sample(spec, topo, cfg, index, None)?;
        batch.push(full, converged, topo.num_visible());
    }
    Ok(batch)
}

/// One sample per given initial pattern (sample `k` starts from `inits[k]`);
/// `cfg.size` is ignored.
pub fn sample_from_inits(
    spec: &PosteriorSpec,
    topo: &Topology,
    cfg: &SamplerConfig,
    inits: &[Pattern],
) -> Result<SampleBatch, PosteriorError> {
    cfg.validate()?;
    spec.check_topology(topo)?;
    let mut batch = SampleBatch::default();
    for (index, init) in inits.iter().enumerate() {
        let (full, converged) = draw_sample(spec, topo, cfg, index as u64, Some(init))?;
        batch.push(full, converged, topo.num_visible());
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{ratio, rational_from_i64};
    use rand::RngCore;

    fn entry(beta: i64, inv_alpha: f64) -> PosteriorEntry {
        PosteriorEntry {
            beta: rational_from_i64(beta),
            inv_alpha,
        }
    }

    #[test]
    fn posterior_from_witness() {
        let witness = ParameterVector::from_pairs([(ParamId::Bias { unit: 2 }, rational_from_i64(-1))]);
        let cfg = SamplerConfig {
            epsilon: 0.1,
            ..SamplerConfig::default()
        };
        let spec = build_posterior(&witness, &cfg).unwrap();
        assert_eq!(spec.entries(), &[(ParamId::Bias { unit: 2 }, entry(-1, 0.1))]);

        let wide = SamplerConfig {
            epsilon: 2.0,
            ..SamplerConfig::default()
        };
        let spec = build_posterior(&fixtures::reference_solution(), &wide).unwrap();
        assert_eq!(spec.len(), 15);
        assert!(spec.entries().iter().all(|(_, e)| e.inv_alpha == 2.0));
    }

    #[test]
    fn scale_c_multiplies_location_and_width() {
        let witness = ParameterVector::from_pairs([(ParamId::Bias { unit: 0 }, ratio(3, 4))]);
        let cfg = SamplerConfig {
            epsilon: 0.5,
            scale_c: rational_from_i64(100),
            ..SamplerConfig::default()
        };
        let spec = build_posterior(&witness, &cfg).unwrap();
        let e = spec.get(&ParamId::Bias { unit: 0 }).unwrap();
        assert_eq!(e.beta, rational_from_i64(75));
        assert_eq!(e.inv_alpha, 50.0);
    }

    #[test]
    fn invalid_epsilon() {
        let witness = fixtures::reference_solution();
        for eps in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let cfg = SamplerConfig {
                epsilon: eps,
                ..SamplerConfig::default()
            };
            assert!(matches!(
                build_posterior(&witness, &cfg),
                Err(PosteriorError::InvalidEpsilon(_))
            ));
        }
    }

    #[test]
    fn inverse_transform_values() {
        let e = entry(-1, 0.1);
        assert_eq!(draw_parameter(&e, 0.0, TailMode::Literal).unwrap(), -1.0);
        let u = 1.0 - (-1.0f64).exp();
        let w = draw_parameter(&e, u, TailMode::Literal).unwrap();
        assert!((w - (-0.9)).abs() < 1e-12, "{w}");
        let centered = draw_parameter(&e, u, TailMode::Centered).unwrap();
        assert!((centered - (-1.0)).abs() < 1e-12, "{centered}");
        assert!(matches!(
            draw_parameter(&e, 1.0, TailMode::Literal),
            Err(PosteriorError::DeviateOutOfRange(_))
        ));
        assert!(draw_parameter(&e, -0.1, TailMode::Literal).is_err());
        assert!(draw_parameter(&e, f64::NAN, TailMode::Literal).is_err());
    }

    #[test]
    fn empirical_mean_and_support() {
        let e = entry(-1, 0.1);
        let n = 100_000;
        let mut rng = sample_rng(7, 0);
        let mut sum = 0.0;
        for _ in 0..n {
            let w = draw_parameter(&e, rng.gen(), TailMode::Literal).unwrap();
            assert!(w >= -1.0);
            sum += w;
        }
        let mean = sum / n as f64;
        let se = 0.1 / (n as f64).sqrt();
        assert!((mean - e.mean()).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn kolmogorov_smirnov_against_exponential_cdf() {
        let e = entry(2, 0.5);
        let n = 10_000;
        let mut rng = sample_rng(11, 3);
        let mut draws: Vec<f64> = (0..n)
            .map(|_| draw_parameter(&e, rng.gen(), TailMode::Literal).unwrap())
            .collect();
        draws.sort_by(f64::total_cmp);
        let cdf = |w: f64| 1.0 - (-(w - 2.0) / 0.5).exp();
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let f = cdf(w);
                (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
            })
            .fold(0.0, f64::max);
        // Asymptotic 1% critical value.
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "D = {d}");
    }

    #[test]
    fn draw_consumption_is_fixed() {
        let topo = fixtures::fig2c();
        let spec = build_posterior(&fixtures::reference_solution(), &SamplerConfig::default()).unwrap();
        for mode in [TailMode::Literal, TailMode::Centered] {
            let mut used = sample_rng(5, 9);
            draw_inputs(&mut used, &spec, topo.num_units(), mode);
            let mut manual = sample_rng(5, 9);
            for _ in 0..spec.len() {
                let _: f64 = manual.gen();
            }
            for _ in 0..topo.num_units() {
                let _: bool = manual.gen();
            }
            assert_eq!(used.next_u64(), manual.next_u64());
        }
    }

    #[test]
    fn batches_are_deterministic_and_index_stable() {
        let topo = fixtures::fig2c();
        let cfg = SamplerConfig {
            size: 40,
            seed: 42,
            ..SamplerConfig::default()
        };
        let spec = build_posterior(&fixtures::reference_solution(), &cfg).unwrap();
        let a = sample_patterns(&spec, &topo, &cfg).unwrap();
        let b = sample_patterns(&spec, &topo, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        assert_eq!(a.visible_patterns[0].len(), 3);
        assert_eq!(a.full_patterns[0].len(), 4);

        let shorter = sample_patterns(&spec, &topo, &SamplerConfig { size: 10, ..cfg.clone() }).unwrap();
        assert_eq!(shorter.full_patterns[..], a.full_patterns[..10]);
        // Sample 25 computed on its own matches its slot in the batch.
        let (alone, converged) = draw_sample(&spec, &topo, &cfg, 25, None).unwrap();
        assert_eq!(alone, a.full_patterns[25]);
        assert_eq!(converged, a.converged_flags[25]);

        let single = SamplerConfig { size: 1, ..cfg };
        assert_eq!(
            sample_patterns(&spec, &topo, &single).unwrap(),
            sample_patterns(&spec, &topo, &single).unwrap()
        );
    }

    #[test]
    fn tiny_epsilon_emits_only_fixed_points() {
        let topo = fixtures::fig2c();
        let witness = fixtures::reference_solution();
        let exact = Machine::exact(&topo, &witness).unwrap();
        let fixed: Vec<Pattern> = (0..16)
            .map(|c| Pattern::from_index(c, 4))
            .filter(|x| exact.is_fixed_point(x).unwrap())
            .collect();
        let cfg = SamplerConfig {
            epsilon: 1e-6,
            ..SamplerConfig::default()
        };
        let spec = build_posterior(&witness, &cfg).unwrap();
        let inits: Vec<Pattern> = (0..16).map(|c| Pattern::from_index(c, 4)).collect();
        let batch = sample_from_inits(&spec, &topo, &cfg, &inits).unwrap();
        assert!(batch.converged_flags.iter().all(|&c| c));
        for p in &batch.full_patterns {
            assert!(fixed.contains(p), "{p} is not a fixed point");
        }
    }

    #[test]
    fn mismatched_topology_is_rejected() {
        let spec = build_posterior(&fixtures::reference_solution(), &SamplerConfig::default()).unwrap();
        assert!(matches!(
            sample_patterns(&spec, &fixtures::fig2b(), &SamplerConfig::default()),
            Err(PosteriorError::Mismatch(_))
        ));
        let zero = SamplerConfig {
            size: 0,
            ..SamplerConfig::default()
        };
        assert_eq!(
            sample_patterns(&spec, &fixtures::fig2c(), &zero),
            Err(PosteriorError::ZeroSize)
        );
    }
}
