//! Network structure, parameters and the deterministic unit response.
//!
//! A unit fires when its activation `z_i = sum_j q_{j,i} x_j + b_i` over the
//! incoming arcs `j -> i` is non-negative. That is the logistic response
//! rounded to the nearest integer, with the tie at `z = 0` rounded up, so the
//! response is evaluated as a sign test and never through `exp`.
//!
//! Units with no incoming arc are "unconstrained": they carry no bias, have
//! no activation, and keep whatever value they are given.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("topology needs at least one visible unit")]
    NoVisibleUnits,
    #[error("self-arc on unit {0}")]
    SelfArc(usize),
    #[error("arc {src} -> {dst} is out of range for {num_units} units")]
    ArcOutOfRange {
        src: usize,
        dst: usize,
        num_units: usize,
    },
    #[error("duplicate arc {src} -> {dst}")]
    DuplicateArc { src: usize, dst: usize },
    #[error("unconstrained unit has no activation (unit {0})")]
    UnconstrainedUnit(usize),
    #[error("unit {unit} is out of range for {num_units} units")]
    UnitOutOfRange { unit: usize, num_units: usize },
    #[error("pattern has {found} bits, expected {expected}")]
    PatternLength { expected: usize, found: usize },
    #[error("pattern entry {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("parameter {0} is missing")]
    MissingParameter(ParamId),
    #[error("parameter {0} is not part of the topology")]
    UnexpectedParameter(ParamId),
    #[error("expected {expected} parameter values, found {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error("max_iter must be at least 1")]
    ZeroIterations,
}

/// Directed arc `src -> dst`; its weight is `q_{src,dst}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub src: usize,
    pub dst: usize,
}

impl Arc {
    pub fn new(src: usize, dst: usize) -> Self {
        Arc { src, dst }
    }
}

/// Units `0..num_visible` are visible, the hidden units follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    num_visible: usize,
    num_hidden: usize,
    arcs: BTreeSet<Arc>,
}

impl Topology {
    pub fn new<I>(num_visible: usize, num_hidden: usize, arcs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if num_visible == 0 {
            return Err(ModelError::NoVisibleUnits);
        }
        let num_units = num_visible + num_hidden;
        let mut set = BTreeSet::new();
        for (src, dst) in arcs {
            if src >= num_units || dst >= num_units {
                return Err(ModelError::ArcOutOfRange {
                    src,
                    dst,
                    num_units,
                });
            }
            if src == dst {
                return Err(ModelError::SelfArc(src));
            }
            if !set.insert(Arc::new(src, dst)) {
                return Err(ModelError::DuplicateArc { src, dst });
            }
        }
        Ok(Topology {
            num_visible,
            num_hidden,
            arcs: set,
        })
    }

    pub fn num_visible(&self) -> usize {
        self.num_visible
    }

    pub fn num_hidden(&self) -> usize {
        self.num_hidden
    }

    pub fn num_units(&self) -> usize {
        self.num_visible + self.num_hidden
    }

    /// Arcs in ascending `(src, dst)` order.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.arcs.iter().copied()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn has_arc(&self, src: usize, dst: usize) -> bool {
        self.arcs.contains(&Arc::new(src, dst))
    }

    /// Sources of the arcs entering `unit`, ascending.
    pub fn sources_of(&self, unit: usize) -> Vec<usize> {
        self.arcs
            .iter()
            .filter(|a| a.dst == unit)
            .map(|a| a.src)
            .collect()
    }

    pub fn is_constrained(&self, unit: usize) -> bool {
        self.arcs.iter().any(|a| a.dst == unit)
    }

    pub fn constrained_units(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.arcs.iter().map(|a| a.dst).collect();
        set.into_iter().collect()
    }

    /// Column layout of the parameter vector: weights in arc order, then
    /// biases of the constrained units in unit order.
    pub fn param_layout(&self) -> ParamLayout {
        let ids = self
            .arcs()
            .map(|a| ParamId::Weight {
                src: a.src,
                dst: a.dst,
            })
            .chain(
                self.constrained_units()
                    .into_iter()
                    .map(|unit| ParamId::Bias { unit }),
            )
            .collect();
        ParamLayout::new(ids).expect("topology parameters are distinct")
    }
}

/// Names one entry of the parameter vector.
///
/// The derived order (all weights by `(src, dst)`, then biases by unit)
/// matches [`Topology::param_layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamId {
    Weight { src: usize, dst: usize },
    Bias { unit: usize },
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamId::Weight { src, dst } => write!(f, "q_{src}_{dst}"),
            ParamId::Bias { unit } => write!(f, "b_{unit}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameter id {0:?}, expected q_<src>_<dst> or b_<unit>")]
pub struct ParamIdParseError(pub String);

impl FromStr for ParamId {
    type Err = ParamIdParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParamIdParseError(s.to_string());
        let mut parts = s.split('_');
        let kind = parts.next().ok_or_else(err)?;
        let nums: Vec<usize> = parts
            .map(|p| p.parse::<usize>().map_err(|_| err()))
            .collect::<Result<_, _>>()?;
        match (kind, nums.as_slice()) {
            ("q", [src, dst]) => Ok(ParamId::Weight {
                src: *src,
                dst: *dst,
            }),
            ("b", [unit]) => Ok(ParamId::Bias { unit: *unit }),
            _ => Err(err()),
        }
    }
}

/// Bijection between parameter ids and column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    ids: Vec<ParamId>,
    index: HashMap<ParamId, usize>,
}

impl ParamLayout {
    /// Fails with the first repeated id.
    pub fn new(ids: Vec<ParamId>) -> Result<Self, ParamId> {
        let mut index = HashMap::with_capacity(ids.len());
        for (col, id) in ids.iter().enumerate() {
            if index.insert(*id, col).is_some() {
                return Err(*id);
            }
        }
        Ok(ParamLayout { ids, index })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ParamId] {
        &self.ids
    }

    pub fn id(&self, col: usize) -> ParamId {
        self.ids[col]
    }

    pub fn column(&self, id: &ParamId) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// Exact values for the weights and biases.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParameterVector {
    values: BTreeMap<ParamId, Rational>,
}

impl ParameterVector {
    /// Parameter vector over an arbitrary id set, with no topology check.
    pub fn from_pairs<I: IntoIterator<Item = (ParamId, Rational)>>(pairs: I) -> Self {
        ParameterVector {
            values: pairs.into_iter().collect(),
        }
    }

    /// Requires the id set to equal the topology's weights and biases.
    pub fn for_topology<I>(topo: &Topology, pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (ParamId, Rational)>,
    {
        let params = Self::from_pairs(pairs);
        params.check_domain(topo)?;
        Ok(params)
    }

    /// Values given in `layout` order.
    pub fn from_layout(layout: &ParamLayout, values: Vec<Rational>) -> Result<Self, ModelError> {
        if values.len() != layout.len() {
            return Err(ModelError::ParameterCount {
                expected: layout.len(),
                found: values.len(),
            });
        }
        Ok(Self::from_pairs(layout.ids().iter().copied().zip(values)))
    }

    pub fn zeros(layout: &ParamLayout) -> Self {
        Self::from_pairs(layout.ids().iter().map(|id| (*id, Rational::zero())))
    }

    pub fn check_domain(&self, topo: &Topology) -> Result<(), ModelError> {
        let layout = topo.param_layout();
        for id in layout.ids() {
            if !self.values.contains_key(id) {
                return Err(ModelError::MissingParameter(*id));
            }
        }
        for id in self.values.keys() {
            if layout.column(id).is_none() {
                return Err(ModelError::UnexpectedParameter(*id));
            }
        }
        Ok(())
    }

    /// Keeps only the entries the topology uses; fails if any is missing.
    pub fn restricted_to(&self, topo: &Topology) -> Result<Self, ModelError> {
        let layout = topo.param_layout();
        Self::from_layout(&layout, self.to_layout(&layout)?)
    }

    pub fn get(&self, id: &ParamId) -> Option<&Rational> {
        self.values.get(id)
    }

    pub fn weight(&self, src: usize, dst: usize) -> Option<&Rational> {
        self.values.get(&ParamId::Weight { src, dst })
    }

    pub fn bias(&self, unit: usize) -> Option<&Rational> {
        self.values.get(&ParamId::Bias { unit })
    }

    pub fn set(&mut self, id: ParamId, value: Rational) {
        self.values.insert(id, value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParamId, &Rational)> {
        self.values.iter()
    }

    /// Values in `layout` order.
    pub fn to_layout(&self, layout: &ParamLayout) -> Result<Vec<Rational>, ModelError> {
        layout
            .ids()
            .iter()
            .map(|id| {
                self.values
                    .get(id)
                    .cloned()
                    .ok_or(ModelError::MissingParameter(*id))
            })
            .collect()
    }

    pub fn scaled(&self, k: &Rational) -> Self {
        Self::from_pairs(self.values.iter().map(|(id, v)| (*id, v * k)))
    }

    pub fn max_abs(&self) -> Rational {
        self.values
            .values()
            .map(num_traits::Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Full binary state of the network, visible units first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    bits: Vec<bool>,
}

impl Pattern {
    pub fn new(bits: Vec<bool>) -> Self {
        Pattern { bits }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, ModelError> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(ModelError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Pattern::new)
    }

    pub fn zeros(len: usize) -> Self {
        Pattern::new(vec![false; len])
    }

    /// Pattern whose bit `k` is bit `len-1-k` of `code`, so counting
    /// `code` upward enumerates patterns in lexicographic order.
    pub fn from_index(code: u64, len: usize) -> Self {
        Pattern::new((0..len).map(|k| (code >> (len - 1 - k)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, unit: usize) -> bool {
        self.bits[unit]
    }

    pub fn set(&mut self, unit: usize, value: bool) {
        self.bits[unit] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn prefix(&self, len: usize) -> Pattern {
        Pattern::new(self.bits[..len].to_vec())
    }

    /// Compact form, e.g. `"1101"`.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &b) in self.bits.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Rounded logistic response: 1 iff `z >= 0`.
pub fn unit_response<T: Zero + PartialOrd>(z: &T) -> bool {
    *z >= T::zero()
}

/// Order in which constrained units are refreshed during completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateSchedule {
    /// One pass over the constrained units in ascending order, each unit
    /// seeing the values already refreshed in this pass.
    #[default]
    Sequential,
    /// Every constrained unit is refreshed from the previous pattern.
    Synchronous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResult {
    pub pattern: Pattern,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
struct UnitRule<T> {
    inputs: Vec<(usize, T)>,
    bias: T,
}

/// Topology and parameters flattened into per-unit input lists.
///
/// `Machine<Rational>` is used wherever results are certified;
/// `Machine<f64>` runs the Monte Carlo sampler.
#[derive(Debug, Clone)]
pub struct Machine<T> {
    num_visible: usize,
    rules: Vec<Option<UnitRule<T>>>,
}

impl<T> Machine<T>
where
    T: Clone + Zero + PartialOrd + for<'a> AddAssign<&'a T>,
{
    /// `values` are in `topo.param_layout()` order.
    pub fn from_layout_values(topo: &Topology, values: &[T]) -> Result<Self, ModelError> {
        let layout = topo.param_layout();
        if values.len() != layout.len() {
            return Err(ModelError::ParameterCount {
                expected: layout.len(),
                found: values.len(),
            });
        }
        let mut inputs: Vec<Vec<(usize, T)>> = vec![Vec::new(); topo.num_units()];
        let mut biases: Vec<Option<T>> = vec![None; topo.num_units()];
        for (id, value) in layout.ids().iter().zip(values) {
            match *id {
                ParamId::Weight { src, dst } => inputs[dst].push((src, value.clone())),
                ParamId::Bias { unit } => biases[unit] = Some(value.clone()),
            }
        }
        let rules = inputs
            .into_iter()
            .zip(biases)
            .map(|(inputs, bias)| bias.map(|bias| UnitRule { inputs, bias }))
            .collect();
        Ok(Machine {
            num_visible: topo.num_visible(),
            rules,
        })
    }

    pub fn num_units(&self) -> usize {
        self.rules.len()
    }

    pub fn num_visible(&self) -> usize {
        self.num_visible
    }

    pub fn is_constrained(&self, unit: usize) -> bool {
        self.rules.get(unit).is_some_and(Option::is_some)
    }

    fn check_len(&self, x: &Pattern) -> Result<(), ModelError> {
        if x.len() != self.num_units() {
            return Err(ModelError::PatternLength {
                expected: self.num_units(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn activation_unchecked(rule: &UnitRule<T>, x: &Pattern) -> T {
        let mut z = rule.bias.clone();
        for (src, w) in &rule.inputs {
            if x.get(*src) {
                z += w;
            }
        }
        z
    }

    /// `z_i = sum_{j -> i} q_{j,i} x_j + b_i`.
    pub fn activation_input(&self, x: &Pattern, unit: usize) -> Result<T, ModelError> {
        self.check_len(x)?;
        let rule = self
            .rules
            .get(unit)
            .ok_or(ModelError::UnitOutOfRange {
                unit,
                num_units: self.num_units(),
            })?
            .as_ref()
            .ok_or(ModelError::UnconstrainedUnit(unit))?;
        Ok(Self::activation_unchecked(rule, x))
    }

    pub fn synchronous_step(&self, x: &Pattern) -> Result<Pattern, ModelError> {
        self.check_len(x)?;
        let mut next = x.clone();
        for (unit, rule) in self.rules.iter().enumerate() {
            if let Some(rule) = rule {
                next.set(unit, unit_response(&Self::activation_unchecked(rule, x)));
            }
        }
        Ok(next)
    }

    pub fn sequential_sweep(&self, x: &Pattern) -> Result<Pattern, ModelError> {
        self.check_len(x)?;
        let mut next = x.clone();
        for (unit, rule) in self.rules.iter().enumerate() {
            if let Some(rule) = rule {
                let fired = unit_response(&Self::activation_unchecked(rule, &next));
                next.set(unit, fired);
            }
        }
        Ok(next)
    }

    pub fn step(&self, x: &Pattern, schedule: UpdateSchedule) -> Result<Pattern, ModelError> {
        match schedule {
            UpdateSchedule::Sequential => self.sequential_sweep(x),
            UpdateSchedule::Synchronous => self.synchronous_step(x),
        }
    }

    /// Every constrained unit already agrees with its own response.
    pub fn is_fixed_point(&self, x: &Pattern) -> Result<bool, ModelError> {
        Ok(self.synchronous_step(x)? == *x)
    }

    /// Iterates `step` until a step changes nothing or `max_iter` steps have
    /// run. The step that confirms convergence is counted.
    pub fn complete(
        &self,
        init: &Pattern,
        max_iter: usize,
        schedule: UpdateSchedule,
    ) -> Result<CompletionResult, ModelError> {
        if max_iter == 0 {
            return Err(ModelError::ZeroIterations);
        }
        self.check_len(init)?;
        let mut current = init.clone();
        for iteration in 1..=max_iter {
            let next = self.step(&current, schedule)?;
            if next == current {
                return Ok(CompletionResult {
                    pattern: current,
                    converged: true,
                    iterations: iteration,
                });
            }
            current = next;
        }
        Ok(CompletionResult {
            pattern: current,
            converged: false,
            iterations: max_iter,
        })
    }
}

impl Machine<Rational> {
    pub fn exact(topo: &Topology, params: &ParameterVector) -> Result<Self, ModelError> {
        params.check_domain(topo)?;
        let values = params.to_layout(&topo.param_layout())?;
        Self::from_layout_values(topo, &values)
    }
}

/// Exact activation of a constrained unit.
pub fn activation_input(
    params: &ParameterVector,
    topo: &Topology,
    x: &Pattern,
    unit: usize,
) -> Result<Rational, ModelError> {
    Machine::exact(topo, params)?.activation_input(x, unit)
}

pub fn synchronous_step(
    params: &ParameterVector,
    topo: &Topology,
    x: &Pattern,
) -> Result<Pattern, ModelError> {
    Machine::exact(topo, params)?.synchronous_step(x)
}

pub fn complete_pattern(
    params: &ParameterVector,
    topo: &Topology,
    init: &Pattern,
    max_iter: usize,
    schedule: UpdateSchedule,
) -> Result<CompletionResult, ModelError> {
    Machine::exact(topo, params)?.complete(init, max_iter, schedule)
}
