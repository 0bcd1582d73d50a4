use super::{
    dir_rank, improves, warn_no_negatives, AttributeIndex, GibbsModel, GibbsStep, LearnError,
    LearnerParams, SortedAttribute,
};
use crate::data::Dataset;
use crate::stumps::{Direction, IntervalStump};

/// Below this remaining negative mass the soft greedy stops.
pub const MASS_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy)]
enum Candidates {
    /// Every pair of distinct training values plus the full range.
    Pairs,
    /// Windows of half-width gamma centred between consecutive values.
    Fixed(f64),
}

/// Prefix sums of product weights per distinct value, split by class.
/// Offsets are taken from the smallest value to limit cancellation.
#[derive(Default)]
struct Weights {
    neg: Vec<f64>,
    neg_x: Vec<f64>,
    pos: Vec<f64>,
    pos_x: Vec<f64>,
}

impl Weights {
    fn fill(&mut self, sa: &SortedAttribute, ds: &Dataset, pi: &[f64]) {
        let g = sa.groups();
        let v0 = sa.values[0];
        for buf in [
            &mut self.neg,
            &mut self.neg_x,
            &mut self.pos,
            &mut self.pos_x,
        ] {
            buf.clear();
            buf.resize(g + 1, 0.0);
        }
        for grp in 0..g {
            let (mut wn, mut wp) = (0.0, 0.0);
            for &e in sa.group(grp) {
                let w = pi[e as usize];
                if w == 0.0 {
                    continue;
                }
                if ds.label(e as usize) == 0 {
                    wn += w;
                } else {
                    wp += w;
                }
            }
            let u = sa.values[grp] - v0;
            self.neg[grp + 1] = self.neg[grp] + wn;
            self.neg_x[grp + 1] = self.neg_x[grp] + wn * u;
            self.pos[grp + 1] = self.pos[grp] + wp;
            self.pos_x[grp + 1] = self.pos_x[grp] + wp * u;
        }
    }
}

/// `sum w (1 - sigma(v))` over groups, for the interval `[a, b]` whose
/// interior holds groups `lo..hi`. `a` and `b` are offsets from the
/// smallest value.
#[inline]
fn removed_mass(
    w: &[f64],
    wx: &[f64],
    lo: usize,
    hi: usize,
    a: f64,
    b: f64,
    dir: Direction,
) -> f64 {
    let total = w[w.len() - 1];
    let s = w[hi] - w[lo];
    let sx = wx[hi] - wx[lo];
    let width = b - a;
    match dir {
        Direction::Positive => w[lo] + (b * s - sx) / width,
        Direction::Negative => (sx - a * s) / width + (total - w[hi]),
    }
}

struct SoftState<'a> {
    ds: &'a Dataset,
    pi: Vec<f64>,
    used: Vec<bool>,
    negative_mass: f64,
    positives: f64,
}

impl SoftState<'_> {
    fn apply(&mut self, stump: &IntervalStump) {
        let mut mass = 0.0;
        for i in 0..self.ds.m() {
            if self.pi[i] == 0.0 {
                continue;
            }
            self.pi[i] *= stump.sigma(self.ds.row(i));
            if self.ds.label(i) == 0 {
                mass += self.pi[i];
            }
        }
        self.negative_mass = mass;
        self.used[stump.attr] = true;
    }
}

type Key = (usize, u8, f64, f64);

struct Search<'p> {
    params: &'p LearnerParams,
    best: Option<(f64, Key)>,
}

impl Search<'_> {
    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn consider(
        &mut self,
        weights: &Weights,
        state: &SoftState,
        attr: usize,
        lo: usize,
        hi: usize,
        a: f64,
        b: f64,
        v0: f64,
        log_ratio: f64,
    ) {
        for dir in Direction::BOTH {
            let (ao, bo) = (a - v0, b - v0);
            let c = removed_mass(&weights.neg, &weights.neg_x, lo, hi, ao, bo, dir);
            let e = if state.positives > 0.0 {
                removed_mass(&weights.pos, &weights.pos_x, lo, hi, ao, bo, dir) / state.positives
            } else {
                0.0
            };
            let u = c / state.negative_mass - self.params.p * e - self.params.eta * log_ratio;
            let key = (attr, dir_rank(dir), a, b);
            if improves(u, key, self.best) {
                self.best = Some((u, key));
            }
        }
    }
}

/// Soft greedy over interval stumps with utility
/// `C/N - p E/|P| - eta ln((B - A)/(b - a))`. Candidate intervals join two
/// distinct training values of an attribute, or span its whole range.
pub fn pacbayes_learn(ds: &Dataset, params: &LearnerParams) -> Result<GibbsModel, LearnError> {
    pacbayes_learn_indexed(ds, &AttributeIndex::new(ds), params)
}

pub fn pacbayes_learn_indexed(
    ds: &Dataset,
    index: &AttributeIndex,
    params: &LearnerParams,
) -> Result<GibbsModel, LearnError> {
    soft_learn(ds, index, params, Candidates::Pairs)
}

/// The soft greedy restricted to intervals `[c - gamma, c + gamma]`
/// (clipped to the attribute range) centred midway between consecutive
/// training values. Requires `params.gamma`.
pub fn fixed_margin_learn(ds: &Dataset, params: &LearnerParams) -> Result<GibbsModel, LearnError> {
    fixed_margin_learn_indexed(ds, &AttributeIndex::new(ds), params)
}

pub fn fixed_margin_learn_indexed(
    ds: &Dataset,
    index: &AttributeIndex,
    params: &LearnerParams,
) -> Result<GibbsModel, LearnError> {
    let gamma = match params.gamma {
        Some(g) if g > 0.0 => g,
        _ => {
            return Err(LearnError::InvalidParams(
                "the fixed-margin learner needs a positive gamma".into(),
            ))
        }
    };
    if !index
        .attributes()
        .iter()
        .any(|sa| 2.0 * gamma <= sa.range.width())
    {
        return Err(LearnError::MarginExceedsRanges);
    }
    soft_learn(ds, index, params, Candidates::Fixed(gamma))
}

fn soft_learn(
    ds: &Dataset,
    index: &AttributeIndex,
    params: &LearnerParams,
    candidates: Candidates,
) -> Result<GibbsModel, LearnError> {
    if ds.m() == 0 {
        return Err(LearnError::Empty);
    }
    let mut state = SoftState {
        ds,
        pi: vec![1.0; ds.m()],
        used: vec![false; ds.n()],
        negative_mass: ds.count_negatives() as f64,
        positives: ds.count_positives() as f64,
    };
    if state.negative_mass == 0.0 {
        warn_no_negatives("pacbayes");
        return Ok(GibbsModel::default());
    }
    let log_ratios = match candidates {
        Candidates::Pairs if params.eta > 0.0 => index.log_ratios(),
        _ => None,
    };
    let mut weights = Weights::default();
    let mut steps = Vec::new();
    while steps.len() < params.v_max && state.negative_mass >= MASS_EPSILON {
        let mut search = Search { params, best: None };
        for (slot, sa) in index.attributes().iter().enumerate() {
            if state.used[sa.attr] {
                continue;
            }
            let (range_lo, range_hi) = (sa.range.lo, sa.range.hi);
            let ln_range = sa.range.width().ln();
            let g = sa.groups();
            let v0 = sa.values[0];
            match candidates {
                Candidates::Pairs => {
                    weights.fill(sa, ds, &state.pi);
                    if range_lo < v0 || range_hi > sa.values[g - 1] {
                        search
                            .consider(&weights, &state, sa.attr, 0, g, range_lo, range_hi, v0, 0.0);
                    }
                    let table = log_ratios.map(|t| &t[slot]);
                    for s in 0..g {
                        let base = sa.pair_offset(s);
                        for t in s + 1..g {
                            let log_ratio = if params.eta == 0.0 {
                                0.0
                            } else if let Some(table) = table {
                                table[base + t - s - 1]
                            } else {
                                ln_range - (sa.values[t] - sa.values[s]).ln()
                            };
                            search.consider(
                                &weights,
                                &state,
                                sa.attr,
                                s,
                                t + 1,
                                sa.values[s],
                                sa.values[t],
                                v0,
                                log_ratio,
                            );
                        }
                    }
                }
                Candidates::Fixed(gamma) => {
                    if 2.0 * gamma > sa.range.width() {
                        continue;
                    }
                    weights.fill(sa, ds, &state.pi);
                    for c in 0..g - 1 {
                        let centre = 0.5 * (sa.values[c] + sa.values[c + 1]);
                        let a = (centre - gamma).max(range_lo);
                        let b = (centre + gamma).min(range_hi);
                        if !(a < b) {
                            continue;
                        }
                        let lo = sa.values.partition_point(|&v| v < a);
                        let hi = sa.values.partition_point(|&v| v <= b);
                        let log_ratio = if params.eta == 0.0 {
                            0.0
                        } else {
                            ln_range - (b - a).ln()
                        };
                        search.consider(&weights, &state, sa.attr, lo, hi, a, b, v0, log_ratio);
                    }
                }
            }
        }
        let Some((u, (attr, rank, a, b))) = search.best else {
            break;
        };
        if u <= 0.0 {
            break;
        }
        let stump = IntervalStump::new(attr, a, b, Direction::BOTH[rank as usize])?;
        state.apply(&stump);
        steps.push(GibbsStep {
            stump,
            range: ds.range(attr),
        });
    }
    Ok(GibbsModel::from_steps(steps)?)
}
