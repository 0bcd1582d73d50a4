//! Stratified folds, parameter grids and nested cross-validation.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{SizePrior, DEFAULT_DELTA};
use crate::data::Dataset;
use crate::learners::{
    train_indexed, AttributeIndex, LearnerKind, LearnerParams, Target, TrainedModel,
};

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("cannot split {m} examples into {k} folds")]
    TooManyFolds { k: usize, m: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{0} labels for {1} examples")]
    LabelCount(usize, usize),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("need at least one permutation")]
    NoPermutations,
    #[error("every fold failed to train")]
    AllFoldsFailed,
}

/// Partitions `0..labels.len()` into `k` folds. Each class is shuffled and
/// dealt round-robin, the negatives continuing where the positives
/// stopped, so every fold's class counts are within one of proportional.
pub fn stratified_kfold(
    labels: &[u8],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, SelectError> {
    let m = labels.len();
    if k < 2 {
        return Err(SelectError::TooFewFolds(k));
    }
    if k > m {
        return Err(SelectError::TooManyFolds { k, m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..m).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[slot].push(i);
            slot = (slot + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// splitmix64 finaliser over a base seed and two coordinates.
fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A penalty value, possibly "the training-set size".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Fixed(f64),
    SampleSize,
}

impl Penalty {
    pub fn resolve(self, m: usize) -> f64 {
        match self {
            Penalty::Fixed(p) => p,
            Penalty::SampleSize => m as f64,
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Fixed(p) => write!(f, "{p}"),
            Penalty::SampleSize => f.write_str("m"),
        }
    }
}

impl std::str::FromStr for Penalty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "m" {
            return Ok(Penalty::SampleSize);
        }
        match s.parse::<f64>() {
            Ok(p) if p > 0.0 => Ok(Penalty::Fixed(p)),
            _ => Err(format!(
                "penalty must be a positive number or `m`, got `{s}`"
            )),
        }
    }
}

/// Parameter values to search. `gamma` holds fractions of the training
/// set's median attribute range width and is empty for learners without
/// a margin parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub p: Vec<Penalty>,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub v: Vec<usize>,
    pub size_prior: SizePrior,
}

/// One point of a [`Grid`], before resolution against a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub p: Penalty,
    pub eta: f64,
    pub gamma: Option<f64>,
    pub v: usize,
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} eta={} v={}", self.p, self.eta, self.v)?;
        if let Some(g) = self.gamma {
            write!(f, " gamma={g}")?;
        }
        Ok(())
    }
}

/// Defaults: p in {0.5, 1, 2, 4, m}, eta in {0, 0.01, 0.1, 0.5, 1},
/// v in 1..=10, gamma in {0.05, 0.1, 0.2, 0.4} times the median range
/// width. Learners without a parameter get no values for it.
pub fn default_grid(kind: LearnerKind) -> Grid {
    Grid {
        p: vec![
            Penalty::Fixed(0.5),
            Penalty::Fixed(1.0),
            Penalty::Fixed(2.0),
            Penalty::Fixed(4.0),
            Penalty::SampleSize,
        ],
        eta: if kind.uses_eta() {
            vec![0.0, 0.01, 0.1, 0.5, 1.0]
        } else {
            vec![0.0]
        },
        gamma: if kind.uses_gamma() {
            vec![0.05, 0.1, 0.2, 0.4]
        } else {
            Vec::new()
        },
        v: (1..=10).collect(),
        size_prior: SizePrior::default(),
    }
}

impl Grid {
    pub fn single(point: GridPoint, size_prior: SizePrior) -> Grid {
        Grid {
            p: vec![point.p],
            eta: vec![point.eta],
            gamma: point.gamma.into_iter().collect(),
            v: vec![point.v],
            size_prior,
        }
    }

    pub fn validate(&self, kind: LearnerKind) -> Result<(), SelectError> {
        if self.p.is_empty() || self.eta.is_empty() || self.v.is_empty() {
            return Err(SelectError::EmptyGrid);
        }
        if kind.uses_gamma() && self.gamma.is_empty() {
            return Err(SelectError::InvalidGrid(format!(
                "{kind} needs gamma values"
            )));
        }
        if !kind.uses_gamma() && !self.gamma.is_empty() {
            return Err(SelectError::InvalidGrid(format!("{kind} takes no gamma")));
        }
        if !kind.uses_eta() && self.eta.iter().any(|&e| e != 0.0) {
            return Err(SelectError::InvalidGrid(format!("{kind} takes no eta")));
        }
        if self.v.contains(&0) {
            return Err(SelectError::InvalidGrid(
                "v values must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Training configurations (everything but `v`), in grid order.
    fn configs(&self) -> Vec<(Penalty, f64, Option<f64>)> {
        let gammas: Vec<Option<f64>> = if self.gamma.is_empty() {
            vec![None]
        } else {
            self.gamma.iter().map(|&g| Some(g)).collect()
        };
        let mut out = Vec::new();
        for &p in &self.p {
            for &eta in &self.eta {
                for &g in &gammas {
                    out.push((p, eta, g));
                }
            }
        }
        out
    }

    /// All points in grid order: p, then eta, then gamma, then v.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for (p, eta, gamma) in self.configs() {
            for &v in &self.v {
                out.push(GridPoint { p, eta, gamma, v });
            }
        }
        out
    }

    fn max_v(&self) -> usize {
        self.v.iter().copied().max().unwrap_or(1)
    }
}

/// Median width of the nondegenerate attribute ranges; 1 if there are none.
pub fn range_scale(ds: &Dataset) -> f64 {
    let mut widths: Vec<f64> = ds
        .ranges()
        .iter()
        .filter(|r| !r.is_degenerate())
        .map(|r| r.width())
        .collect();
    if widths.is_empty() {
        return 1.0;
    }
    widths.sort_by(f64::total_cmp);
    let mid = widths.len() / 2;
    if widths.len() % 2 == 1 {
        widths[mid]
    } else {
        0.5 * (widths[mid - 1] + widths[mid])
    }
}

/// Learner parameters for `point` on a training set of `m` examples with
/// range scale `scale`.
pub fn resolve_point(
    point: &GridPoint,
    m: usize,
    scale: f64,
    size_prior: SizePrior,
) -> LearnerParams {
    LearnerParams {
        p: point.p.resolve(m),
        eta: point.eta,
        v_max: point.v,
        gamma: point.gamma.map(|g| g * scale),
        size_prior,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvPlan {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub permutations: usize,
    pub seed: u64,
    pub grid: Grid,
    pub target: Target,
    pub delta: f64,
}

impl CvPlan {
    pub fn new(kind: LearnerKind, seed: u64) -> CvPlan {
        CvPlan {
            outer_folds: 5,
            inner_folds: 5,
            permutations: 20,
            seed,
            grid: default_grid(kind),
            target: Target::Conjunction,
            delta: DEFAULT_DELTA,
        }
    }
}

/// Outcome of one (permutation, outer fold) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldRecord {
    pub permutation: usize,
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub outcome: Result<FoldOutcome, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub chosen: GridPoint,
    pub params: LearnerParams,
    pub train_errors: usize,
    pub test_errors: usize,
    pub model_size: usize,
    /// Expected Gibbs errors on the test fold (soft learners).
    pub gibbs_errors: Option<f64>,
    /// Bayes errors on the test fold (soft learners).
    pub bayes_errors: Option<usize>,
    /// The learner's bound on its outer training set, if computable.
    pub bound: Option<f64>,
    pub attributes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub kind: LearnerKind,
    pub m: usize,
    pub n: usize,
    pub records: Vec<FoldRecord>,
    /// Test errors summed over each permutation's folds, then averaged.
    pub mean_errors: f64,
    pub std_errors: f64,
    pub mean_model_size: f64,
    pub std_model_size: f64,
    pub mean_gibbs_errors: Option<f64>,
    pub mean_bayes_errors: Option<f64>,
    /// Mean over folds of the training-set bound times `m`.
    pub mean_bound: Option<f64>,
    /// Most frequent selected attribute set, ties to the smallest set.
    pub modal_attributes: Vec<usize>,
    pub failed_folds: usize,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl CvResult {
    /// Computes every aggregate from `records`.
    pub fn from_records(
        kind: LearnerKind,
        m: usize,
        n: usize,
        permutations: usize,
        records: Vec<FoldRecord>,
    ) -> CvResult {
        let ok: Vec<&FoldOutcome> = records
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok())
            .collect();
        let failed_folds = records.len() - ok.len();
        let per_perm = |f: &dyn Fn(&FoldOutcome) -> Option<f64>| -> Option<Vec<f64>> {
            let mut sums = vec![0.0; permutations];
            for r in &records {
                if let Ok(o) = &r.outcome {
                    sums[r.permutation] += f(o)?;
                }
            }
            Some(sums)
        };
        let (mean_errors, std_errors) =
            mean_std(&per_perm(&|o| Some(o.test_errors as f64)).unwrap_or_default());
        let sizes: Vec<f64> = ok.iter().map(|o| o.model_size as f64).collect();
        let (mean_model_size, std_model_size) = mean_std(&sizes);
        let soft = kind.is_soft() && !ok.is_empty();
        let mean_gibbs_errors = soft
            .then(|| per_perm(&|o| o.gibbs_errors))
            .flatten()
            .map(|v| mean_std(&v).0);
        let mean_bayes_errors = soft
            .then(|| per_perm(&|o| o.bayes_errors.map(|b| b as f64)))
            .flatten()
            .map(|v| mean_std(&v).0);
        let bounds: Vec<f64> = ok
            .iter()
            .filter_map(|o| o.bound)
            .map(|b| b * m as f64)
            .collect();
        let mean_bound = (!bounds.is_empty()).then(|| mean_std(&bounds).0);
        let mut counts: BTreeMap<&Vec<usize>, usize> = BTreeMap::new();
        for o in &ok {
            *counts.entry(&o.attributes).or_default() += 1;
        }
        let modal_attributes = counts
            .iter()
            .max_by(|a, b| {
                a.1.cmp(b.1)
                    .then(b.0.len().cmp(&a.0.len()))
                    .then(b.0.cmp(a.0))
            })
            .map(|(k, _)| (*k).clone())
            .unwrap_or_default();
        CvResult {
            kind,
            m,
            n,
            records,
            mean_errors,
            std_errors,
            mean_model_size,
            std_model_size,
            mean_gibbs_errors,
            mean_bayes_errors,
            mean_bound,
            modal_attributes,
            failed_folds,
        }
    }
}

/// Errors and sizes of every grid point on one train/test split, training
/// each configuration once at the largest `v` and truncating.
fn score_grid(
    train: &Dataset,
    test: &Dataset,
    kind: LearnerKind,
    grid: &Grid,
    target: Target,
) -> Vec<Option<(usize, usize)>> {
    let index = AttributeIndex::new(train);
    let scale = range_scale(train);
    let vmax = grid.max_v();
    let mut out = Vec::new();
    for (p, eta, gamma) in grid.configs() {
        let point = GridPoint {
            p,
            eta,
            gamma,
            v: vmax,
        };
        let params = resolve_point(&point, train.m(), scale, grid.size_prior);
        let full = train_indexed(train, &index, kind, target, &params);
        for &v in &grid.v {
            out.push(match &full {
                Ok(model) => {
                    let model = model.truncated(v);
                    Some((model.count_errors(test), model.size()))
                }
                Err(_) => None,
            });
        }
    }
    out
}

/// Picks the grid point with fewest total inner-CV errors, then smallest
/// total size, then earliest in grid order.
fn select_point(
    train: &Dataset,
    kind: LearnerKind,
    plan: &CvPlan,
    seed: u64,
) -> Result<GridPoint, String> {
    let points = plan.grid.points();
    if points.len() == 1 {
        return Ok(points[0]);
    }
    let folds = stratified_kfold(train.labels(), plan.inner_folds.min(train.m()), seed)
        .map_err(|e| e.to_string())?;
    let mut totals: Vec<Option<(usize, usize)>> = vec![Some((0, 0)); points.len()];
    for (f, test_idx) in folds.iter().enumerate() {
        let train_idx = complement(train.m(), &folds, f);
        let inner_train = train.subset(&train_idx);
        let inner_test = train.subset(test_idx);
        for (t, s) in totals.iter_mut().zip(score_grid(
            &inner_train,
            &inner_test,
            kind,
            &plan.grid,
            plan.target,
        )) {
            *t = match (*t, s) {
                (Some((e, z)), Some((e2, z2))) => Some((e + e2, z + z2)),
                _ => None,
            };
        }
    }
    let mut best: Option<(usize, usize, usize)> = None;
    for (i, t) in totals.iter().enumerate() {
        if let Some((e, z)) = *t {
            if best.is_none_or(|(be, bz, _)| (e, z) < (be, bz)) {
                best = Some((e, z, i));
            }
        }
    }
    best.map(|(_, _, i)| points[i])
        .ok_or_else(|| "every grid point failed during inner cross-validation".to_string())
}

fn complement(m: usize, folds: &[Vec<usize>], skip: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != skip)
        .flat_map(|(_, fold)| fold.iter().copied())
        .collect();
    idx.sort_unstable();
    debug_assert!(idx.len() + folds[skip].len() == m);
    idx
}

fn run_cell(
    ds: &Dataset,
    kind: LearnerKind,
    plan: &CvPlan,
    permutation: usize,
    fold: usize,
    folds: &[Vec<usize>],
) -> FoldRecord {
    let train_idx = complement(ds.m(), folds, fold);
    let train = ds.subset(&train_idx);
    let test = ds.subset(&folds[fold]);
    let outcome = (|| -> Result<FoldOutcome, String> {
        let chosen = select_point(
            &train,
            kind,
            plan,
            derive_seed(plan.seed, permutation as u64 + 1, fold as u64 + 1),
        )?;
        let params = resolve_point(
            &chosen,
            train.m(),
            range_scale(&train),
            plan.grid.size_prior,
        );
        let model: TrainedModel = crate::learners::train(&train, kind, plan.target, &params)
            .map_err(|e| e.to_string())?;
        Ok(FoldOutcome {
            chosen,
            params,
            train_errors: model.count_errors(&train),
            test_errors: model.count_errors(&test),
            model_size: model.size(),
            gibbs_errors: model.gibbs_errors(&test),
            bayes_errors: model.bayes_errors(&test),
            bound: model
                .training_bound(&train, plan.delta)
                .ok()
                .map(|r| r.bound),
            attributes: model.attributes(),
        })
    })();
    if let Err(e) = &outcome {
        log::warn!("permutation {permutation} fold {fold}: {e}");
    }
    FoldRecord {
        permutation,
        fold,
        train_size: train.m(),
        test_size: test.m(),
        outcome,
    }
}

/// The outer split `nested_cv` uses for `permutation`.
pub fn outer_folds(
    labels: &[u8],
    plan: &CvPlan,
    permutation: usize,
) -> Result<Vec<Vec<usize>>, SelectError> {
    stratified_kfold(
        labels,
        plan.outer_folds,
        derive_seed(plan.seed, permutation as u64 + 1, 0),
    )
}

/// Nested cross-validation: for every permutation and outer fold, an inner
/// CV on the outer training set picks a grid point, a model trained on the
/// whole outer training set with it is scored on the outer test fold.
pub fn nested_cv(ds: &Dataset, kind: LearnerKind, plan: &CvPlan) -> Result<CvResult, SelectError> {
    plan.grid.validate(kind)?;
    if plan.permutations == 0 {
        return Err(SelectError::NoPermutations);
    }
    if plan.inner_folds < 2 {
        return Err(SelectError::TooFewFolds(plan.inner_folds));
    }
    let mut cells = Vec::new();
    for perm in 0..plan.permutations {
        let folds = outer_folds(ds.labels(), plan, perm)?;
        for fold in 0..plan.outer_folds {
            cells.push((perm, fold, folds.clone()));
        }
    }
    let records: Vec<FoldRecord> = cells
        .par_iter()
        .map(|(perm, fold, folds)| run_cell(ds, kind, plan, *perm, *fold, folds))
        .collect();
    let result = CvResult::from_records(kind, ds.m(), ds.n(), plan.permutations, records);
    if result.failed_folds == result.records.len() {
        return Err(SelectError::AllFoldsFailed);
    }
    if result.failed_folds > 0 {
        log::warn!(
            "{} of {} folds failed and were left out",
            result.failed_folds,
            result.records.len()
        );
    }
    Ok(result)
}
