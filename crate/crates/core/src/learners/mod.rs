//! Greedy learners for conjunctions of decision stumps.
//!
//! Hard learners ([`greedy_sc_learn`], [`occam_learn`]) pick deterministic
//! stumps; soft learners ([`pacbayes_learn`], [`fixed_margin_learn`]) pick
//! interval stumps for the Gibbs posterior. Every learner records its stumps
//! in selection order, so the model with the first `v` stumps is what the
//! learner would have returned with `v_max = v`.

mod dyadic;
mod hard;
mod index;
mod soft;

use std::fmt;

use thiserror::Error;

pub use dyadic::{bit_budget, dyadic_code, dyadic_point, DyadicCode};
pub use hard::{greedy_sc_learn, greedy_sc_learn_indexed, occam_learn, occam_learn_indexed};
pub use index::{AttributeIndex, SortedAttribute};
pub use soft::{
    fixed_margin_learn, fixed_margin_learn_indexed, pacbayes_learn, pacbayes_learn_indexed,
};

use crate::bounds::{self, BoundError, BoundReport, SizePrior};
use crate::data::{AttrRange, Dataset};
use crate::stumps::{
    DecisionStump, Direction, GibbsConjunction, IntervalStump, StumpConjunction, StumpError,
};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("dataset has no examples")]
    Empty,
    #[error("invalid learner parameter: {0}")]
    InvalidParams(String),
    #[error("margin exceeds every attribute range")]
    MarginExceedsRanges,
    #[error("dyadic coding failed: {0}")]
    Dyadic(String),
    #[error(transparent)]
    Stump(#[from] StumpError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnerKind {
    Sc,
    Occam,
    PacBayes,
    PacBayesFixed,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] = [
        LearnerKind::Sc,
        LearnerKind::Occam,
        LearnerKind::PacBayes,
        LearnerKind::PacBayesFixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Sc => "sc",
            LearnerKind::Occam => "occam",
            LearnerKind::PacBayes => "pacbayes",
            LearnerKind::PacBayesFixed => "pacbayes-fixed",
        }
    }

    pub fn uses_eta(self) -> bool {
        self != LearnerKind::Sc
    }

    pub fn uses_gamma(self) -> bool {
        self == LearnerKind::PacBayesFixed
    }

    pub fn is_soft(self) -> bool {
        matches!(self, LearnerKind::PacBayes | LearnerKind::PacBayesFixed)
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown learner `{s}` (expected sc, occam, pacbayes or pacbayes-fixed)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    #[default]
    Conjunction,
    Disjunction,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Conjunction => "conjunction",
            Target::Disjunction => "disjunction",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "conjunction" => Ok(Target::Conjunction),
            "disjunction" => Ok(Target::Disjunction),
            _ => Err(format!(
                "unknown target `{s}` (expected conjunction or disjunction)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    /// Penalty for each positive example a stump errs on.
    pub p: f64,
    /// Bit cost (Occam) or log-margin cost (PAC-Bayes).
    pub eta: f64,
    pub v_max: usize,
    /// Half-width of the fixed-margin intervals.
    pub gamma: Option<f64>,
    pub size_prior: SizePrior,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            p: 1.0,
            eta: 0.0,
            v_max: 10,
            gamma: None,
            size_prior: SizePrior::default(),
        }
    }
}

impl LearnerParams {
    pub fn validate(&self, kind: LearnerKind) -> Result<(), LearnError> {
        if !(self.p > 0.0) {
            return Err(LearnError::InvalidParams(format!(
                "p must be positive, got {}",
                self.p
            )));
        }
        if !(self.eta >= 0.0) || self.eta.is_infinite() {
            return Err(LearnError::InvalidParams(format!(
                "eta must be a nonnegative real, got {}",
                self.eta
            )));
        }
        if self.v_max == 0 {
            return Err(LearnError::InvalidParams("v_max must be at least 1".into()));
        }
        if kind.uses_gamma() {
            match self.gamma {
                Some(g) if g > 0.0 && g.is_finite() => {}
                Some(g) => {
                    return Err(LearnError::InvalidParams(format!(
                        "gamma must be positive, got {g}"
                    )))
                }
                None => return Err(LearnError::InvalidParams("gamma is required".into())),
            }
        }
        Ok(())
    }
}

/// The strictly-better test behind every learner's tie-break: higher
/// utility, then lexicographically smaller key.
#[inline]
pub(crate) fn improves<K: PartialOrd>(u: f64, key: K, best: Option<(f64, K)>) -> bool {
    match best {
        None => true,
        Some((bu, bk)) => u > bu || (u == bu && key < bk),
    }
}

/// Tie-break rank: +1 before -1.
#[inline]
pub(crate) fn dir_rank(d: Direction) -> u8 {
    match d {
        Direction::Positive => 0,
        Direction::Negative => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionStep {
    pub stump: DecisionStump,
    /// Training example whose attribute value is the threshold.
    pub anchor: usize,
}

/// Conjunction reconstructible from one training example per stump.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompressionModel {
    steps: Vec<CompressionStep>,
    conjunction: StumpConjunction,
}

impl CompressionModel {
    pub fn from_steps(steps: Vec<CompressionStep>) -> Result<Self, StumpError> {
        let conjunction = StumpConjunction::from_unsorted(steps.iter().map(|s| s.stump).collect())?;
        Ok(CompressionModel { steps, conjunction })
    }

    /// Steps in selection order.
    pub fn steps(&self) -> &[CompressionStep] {
        &self.steps
    }

    pub fn conjunction(&self) -> &StumpConjunction {
        &self.conjunction
    }

    /// Sorted example indices of the compression set.
    pub fn compression_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.steps.iter().map(|s| s.anchor).collect();
        idx.sort_unstable();
        idx
    }

    /// Anchors listed in the order of [`Self::conjunction`]'s stumps.
    pub fn anchors_by_attribute(&self) -> Vec<usize> {
        let mut steps = self.steps.clone();
        steps.sort_by_key(|s| s.stump.attr);
        steps.iter().map(|s| s.anchor).collect()
    }

    /// Rebuilds the conjunction from the compression examples alone.
    /// `examples[i]` anchors the stump on `attrs[i]` with direction `dirs[i]`.
    pub fn reconstruct(
        examples: &[&[f64]],
        attrs: &[usize],
        dirs: &[Direction],
    ) -> Result<StumpConjunction, StumpError> {
        StumpConjunction::from_unsorted(
            examples
                .iter()
                .zip(attrs)
                .zip(dirs)
                .map(|((x, &k), &d)| DecisionStump::new(k, x[k], d))
                .collect(),
        )
    }

    pub fn truncated(&self, v: usize) -> Self {
        Self::from_steps(self.steps[..v.min(self.steps.len())].to_vec())
            .expect("prefix of a valid model")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccamStep {
    pub stump: DecisionStump,
    pub bits: u32,
    pub code_index: u64,
    /// The interval of equally good thresholds the code was chosen from.
    pub interval: (f64, f64),
    pub range: AttrRange,
}

/// Conjunction whose thresholds are named by dyadic codes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OccamModel {
    steps: Vec<OccamStep>,
    conjunction: StumpConjunction,
}

impl OccamModel {
    pub fn from_steps(steps: Vec<OccamStep>) -> Result<Self, StumpError> {
        let conjunction = StumpConjunction::from_unsorted(steps.iter().map(|s| s.stump).collect())?;
        Ok(OccamModel { steps, conjunction })
    }

    pub fn steps(&self) -> &[OccamStep] {
        &self.steps
    }

    pub fn conjunction(&self) -> &StumpConjunction {
        &self.conjunction
    }

    /// Steps ordered as the conjunction's stumps.
    pub fn steps_by_attribute(&self) -> Vec<OccamStep> {
        let mut steps = self.steps.clone();
        steps.sort_by_key(|s| s.stump.attr);
        steps
    }

    pub fn bit_lengths(&self) -> Vec<u32> {
        self.steps_by_attribute().iter().map(|s| s.bits).collect()
    }

    pub fn code_indices(&self) -> Vec<u64> {
        self.steps_by_attribute()
            .iter()
            .map(|s| s.code_index)
            .collect()
    }

    pub fn truncated(&self, v: usize) -> Self {
        Self::from_steps(self.steps[..v.min(self.steps.len())].to_vec())
            .expect("prefix of a valid model")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsStep {
    pub stump: IntervalStump,
    pub range: AttrRange,
}

impl GibbsStep {
    /// `(b - a) / (B - A)`.
    pub fn ratio(&self) -> f64 {
        self.stump.width() / self.range.width()
    }
}

/// Interval stumps of a Gibbs posterior with the attribute ranges that
/// define their margin ratios.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GibbsModel {
    steps: Vec<GibbsStep>,
    posterior: GibbsConjunction,
    midpoints: StumpConjunction,
}

impl GibbsModel {
    pub fn from_steps(steps: Vec<GibbsStep>) -> Result<Self, StumpError> {
        let posterior = GibbsConjunction::from_unsorted(steps.iter().map(|s| s.stump).collect())?;
        let midpoints = posterior.midpoint_conjunction();
        Ok(GibbsModel {
            steps,
            posterior,
            midpoints,
        })
    }

    pub fn steps(&self) -> &[GibbsStep] {
        &self.steps
    }

    pub fn posterior(&self) -> &GibbsConjunction {
        &self.posterior
    }

    /// Deterministic companion with thresholds at interval midpoints.
    pub fn midpoint_conjunction(&self) -> &StumpConjunction {
        &self.midpoints
    }

    pub fn steps_by_attribute(&self) -> Vec<GibbsStep> {
        let mut steps = self.steps.clone();
        steps.sort_by_key(|s| s.stump.attr);
        steps
    }

    /// Margin ratios ordered as the posterior's stumps.
    pub fn ratios(&self) -> Vec<f64> {
        self.steps_by_attribute()
            .iter()
            .map(|s| s.ratio())
            .collect()
    }

    pub fn truncated(&self, v: usize) -> Self {
        Self::from_steps(self.steps[..v.min(self.steps.len())].to_vec())
            .expect("prefix of a valid model")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelBody {
    Compression(CompressionModel),
    Occam(OccamModel),
    Gibbs(GibbsModel),
}

/// A learned classifier with everything needed to predict, bound and
/// serialize it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: LearnerKind,
    pub target: Target,
    pub n_attributes: usize,
    pub params: LearnerParams,
    pub body: ModelBody,
    pub label_names: Option<[String; 2]>,
}

/// Trains `kind` on `ds`; a disjunction is the complement of a conjunction
/// learned with the labels exchanged.
pub fn train(
    ds: &Dataset,
    kind: LearnerKind,
    target: Target,
    params: &LearnerParams,
) -> Result<TrainedModel, LearnError> {
    let index = AttributeIndex::new(ds);
    train_indexed(ds, &index, kind, target, params)
}

/// [`train`] with a prebuilt index of `ds`.
pub fn train_indexed(
    ds: &Dataset,
    index: &AttributeIndex,
    kind: LearnerKind,
    target: Target,
    params: &LearnerParams,
) -> Result<TrainedModel, LearnError> {
    params.validate(kind)?;
    let swapped;
    let data = match target {
        Target::Conjunction => ds,
        Target::Disjunction => {
            swapped = ds.with_swapped_labels();
            &swapped
        }
    };
    let body = match kind {
        LearnerKind::Sc => ModelBody::Compression(greedy_sc_learn_indexed(data, index, params)?),
        LearnerKind::Occam => ModelBody::Occam(occam_learn_indexed(data, index, params)?),
        LearnerKind::PacBayes => ModelBody::Gibbs(pacbayes_learn_indexed(data, index, params)?),
        LearnerKind::PacBayesFixed => {
            ModelBody::Gibbs(fixed_margin_learn_indexed(data, index, params)?)
        }
    };
    Ok(TrainedModel {
        kind,
        target,
        n_attributes: ds.n(),
        params: *params,
        body,
        label_names: ds.label_names().cloned(),
    })
}

/// [`train`] with `target = Disjunction`.
pub fn learn_disjunction(
    ds: &Dataset,
    kind: LearnerKind,
    params: &LearnerParams,
) -> Result<TrainedModel, LearnError> {
    train(ds, kind, Target::Disjunction, params)
}

pub(crate) fn warn_no_negatives(kind: &str) {
    log::warn!("{kind}: training set has no negative examples; returning the empty conjunction");
}

impl TrainedModel {
    /// Number of stumps.
    pub fn size(&self) -> usize {
        match &self.body {
            ModelBody::Compression(c) => c.steps().len(),
            ModelBody::Occam(o) => o.steps().len(),
            ModelBody::Gibbs(g) => g.steps().len(),
        }
    }

    /// Selected attributes, ascending.
    pub fn attributes(&self) -> Vec<usize> {
        let mut a: Vec<usize> = match &self.body {
            ModelBody::Compression(c) => c.steps().iter().map(|s| s.stump.attr).collect(),
            ModelBody::Occam(o) => o.steps().iter().map(|s| s.stump.attr).collect(),
            ModelBody::Gibbs(g) => g.steps().iter().map(|s| s.stump.attr).collect(),
        };
        a.sort_unstable();
        a
    }

    /// The model a learner capped at `v` stumps would have returned.
    pub fn truncated(&self, v: usize) -> TrainedModel {
        let body = match &self.body {
            ModelBody::Compression(c) => ModelBody::Compression(c.truncated(v)),
            ModelBody::Occam(o) => ModelBody::Occam(o.truncated(v)),
            ModelBody::Gibbs(g) => ModelBody::Gibbs(g.truncated(v)),
        };
        TrainedModel {
            params: LearnerParams {
                v_max: v.min(self.params.v_max),
                ..self.params
            },
            body,
            label_names: self.label_names.clone(),
            ..*self
        }
    }

    fn orient(&self, conj_out: u8) -> u8 {
        match self.target {
            Target::Conjunction => conj_out,
            Target::Disjunction => 1 - conj_out,
        }
    }

    /// The label the model assigns: the conjunction (or its complement for
    /// disjunctions); Bayes vote for PAC-Bayes; midpoint thresholds for the
    /// fixed-margin heuristic.
    pub fn predict(&self, x: &[f64]) -> u8 {
        let out = match &self.body {
            ModelBody::Compression(c) => c.conjunction().predict(x),
            ModelBody::Occam(o) => o.conjunction().predict(x),
            ModelBody::Gibbs(g) => match self.kind {
                LearnerKind::PacBayesFixed => g.midpoint_conjunction().predict(x),
                _ => g.posterior().bayes_predict(x),
            },
        };
        self.orient(out)
    }

    /// Bayes vote of the Gibbs posterior, for soft models.
    pub fn bayes_predict(&self, x: &[f64]) -> Option<u8> {
        match &self.body {
            ModelBody::Gibbs(g) => Some(self.orient(g.posterior().bayes_predict(x))),
            _ => None,
        }
    }

    /// Probability that a Gibbs draw misclassifies `(x, y)`, for soft models.
    pub fn gibbs_example_risk(&self, x: &[f64], y: u8) -> Option<f64> {
        match &self.body {
            ModelBody::Gibbs(g) => {
                let y = match self.target {
                    Target::Conjunction => y,
                    Target::Disjunction => 1 - y,
                };
                Some(g.posterior().example_risk(x, y))
            }
            _ => None,
        }
    }

    pub fn count_errors(&self, ds: &Dataset) -> usize {
        (0..ds.m())
            .filter(|&i| self.predict(ds.row(i)) != ds.label(i))
            .count()
    }

    /// Expected number of Gibbs errors on `ds`, for soft models.
    pub fn gibbs_errors(&self, ds: &Dataset) -> Option<f64> {
        match &self.body {
            ModelBody::Gibbs(_) => Some(
                (0..ds.m())
                    .map(|i| self.gibbs_example_risk(ds.row(i), ds.label(i)).unwrap())
                    .sum(),
            ),
            _ => None,
        }
    }

    pub fn bayes_errors(&self, ds: &Dataset) -> Option<usize> {
        match &self.body {
            ModelBody::Gibbs(_) => Some(
                (0..ds.m())
                    .filter(|&i| self.bayes_predict(ds.row(i)).unwrap() != ds.label(i))
                    .count(),
            ),
            _ => None,
        }
    }

    /// The learner's risk bound evaluated on its own training set `ds`.
    pub fn training_bound(&self, ds: &Dataset, delta: f64) -> Result<BoundReport, BoundError> {
        let m = ds.m();
        let n = self.n_attributes;
        match &self.body {
            ModelBody::Compression(c) => {
                let anchors = c.compression_indices();
                let outside = (0..m)
                    .filter(|i| anchors.binary_search(i).is_err())
                    .filter(|&i| self.predict(ds.row(i)) != ds.label(i))
                    .count();
                let mut report = bounds::sc_bound(m, anchors.len(), outside, n, delta)?;
                report
                    .components
                    .insert("train_errors".into(), self.count_errors(ds) as f64);
                Ok(report)
            }
            ModelBody::Occam(o) => bounds::occam_bound(
                m,
                self.count_errors(ds),
                n,
                &o.bit_lengths(),
                delta,
                self.params.size_prior,
            ),
            ModelBody::Gibbs(g) => {
                let risk = self.gibbs_errors(ds).unwrap() / m as f64;
                let mut report = bounds::pacbayes_bound_full(
                    m,
                    n,
                    &g.ratios(),
                    risk.clamp(0.0, 1.0),
                    delta,
                    self.params.size_prior,
                )?;
                report
                    .components
                    .insert("bayes_errors".into(), self.bayes_errors(ds).unwrap() as f64);
                Ok(report)
            }
        }
    }
}
