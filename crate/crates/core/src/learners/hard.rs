use super::{
    dir_rank, dyadic_code, improves, warn_no_negatives, AttributeIndex, CompressionModel,
    CompressionStep, LearnError, LearnerParams, OccamModel, OccamStep, SortedAttribute,
};
use crate::data::Dataset;
use crate::stumps::{DecisionStump, Direction};

/// Active-example bookkeeping shared by the hard learners.
struct Cover<'a> {
    ds: &'a Dataset,
    active: Vec<bool>,
    negatives_left: usize,
    positives: usize,
    used: Vec<bool>,
    neg: Vec<u32>,
    pos: Vec<u32>,
    first_neg: Vec<u32>,
}

impl<'a> Cover<'a> {
    fn new(ds: &'a Dataset) -> Self {
        Cover {
            ds,
            active: vec![true; ds.m()],
            negatives_left: ds.count_negatives(),
            positives: ds.count_positives(),
            used: vec![false; ds.n()],
            neg: Vec::new(),
            pos: Vec::new(),
            first_neg: Vec::new(),
        }
    }

    /// Active negative/positive counts per distinct value of `sa`, and the
    /// lowest-index active negative in each group (`u32::MAX` if none).
    fn tally(&mut self, sa: &SortedAttribute) {
        let g = sa.groups();
        self.neg.clear();
        self.neg.resize(g, 0);
        self.pos.clear();
        self.pos.resize(g, 0);
        self.first_neg.clear();
        self.first_neg.resize(g, u32::MAX);
        for grp in 0..g {
            for &e in sa.group(grp) {
                if !self.active[e as usize] {
                    continue;
                }
                if self.ds.label(e as usize) == 0 {
                    self.neg[grp] += 1;
                    if self.first_neg[grp] == u32::MAX {
                        self.first_neg[grp] = e;
                    }
                } else {
                    self.pos[grp] += 1;
                }
            }
        }
    }

    /// Removes every active example the stump assigns to class 0.
    fn apply(&mut self, stump: &DecisionStump) {
        for i in 0..self.ds.m() {
            if self.active[i] && stump.predict(self.ds.row(i)) == 0 {
                self.active[i] = false;
                if self.ds.label(i) == 0 {
                    self.negatives_left -= 1;
                }
            }
        }
        self.used[stump.attr] = true;
    }
}

/// Hard greedy with utility `|Q| - p |R|` and thresholds at negative
/// training values.
pub fn greedy_sc_learn(
    ds: &Dataset,
    params: &LearnerParams,
) -> Result<CompressionModel, LearnError> {
    greedy_sc_learn_indexed(ds, &AttributeIndex::new(ds), params)
}

pub fn greedy_sc_learn_indexed(
    ds: &Dataset,
    index: &AttributeIndex,
    params: &LearnerParams,
) -> Result<CompressionModel, LearnError> {
    if ds.m() == 0 {
        return Err(LearnError::Empty);
    }
    let mut cover = Cover::new(ds);
    if cover.negatives_left == 0 {
        warn_no_negatives("sc");
        return Ok(CompressionModel::default());
    }
    let mut steps = Vec::new();
    while steps.len() < params.v_max && cover.negatives_left > 0 {
        // (utility, (attr, dir rank, threshold)), anchor
        let mut best: Option<(f64, (usize, u8, f64))> = None;
        let mut best_anchor = 0u32;
        for sa in index.attributes() {
            if cover.used[sa.attr] {
                continue;
            }
            cover.tally(sa);
            let g = sa.groups();
            for dir in Direction::BOTH {
                let (mut q, mut r) = (0usize, 0usize);
                let groups: Box<dyn Iterator<Item = usize>> = match dir {
                    Direction::Positive => Box::new(0..g),
                    Direction::Negative => Box::new((0..g).rev()),
                };
                for grp in groups {
                    q += cover.neg[grp] as usize;
                    r += cover.pos[grp] as usize;
                    if cover.neg[grp] == 0 {
                        continue;
                    }
                    let u = q as f64 - params.p * r as f64;
                    let key = (sa.attr, dir_rank(dir), sa.values[grp]);
                    if improves(u, key, best) {
                        best = Some((u, key));
                        best_anchor = cover.first_neg[grp];
                    }
                }
            }
        }
        let Some((u, (attr, rank, t))) = best else {
            break;
        };
        if u <= 0.0 {
            break;
        }
        let dir = Direction::BOTH[rank as usize];
        let stump = DecisionStump::new(attr, t, dir);
        cover.apply(&stump);
        steps.push(CompressionStep {
            stump,
            anchor: best_anchor as usize,
        });
    }
    Ok(CompressionModel::from_steps(steps)?)
}

/// `|Q|/N' - p |R|/|P| - eta l`; the positive term vanishes when there
/// are no positives.
pub(crate) fn occam_utility(
    q: usize,
    remaining: f64,
    p: f64,
    r: usize,
    positives: f64,
    eta: f64,
    bits: u32,
) -> f64 {
    let err = if positives > 0.0 {
        p * r as f64 / positives
    } else {
        0.0
    };
    q as f64 / remaining - err - eta * bits as f64
}

/// Hard greedy with utility `|Q|/N' - p |R|/|P| - eta l`, where `l` is the
/// dyadic code length of a threshold inside the candidate's interval of
/// equally good thresholds.
pub fn occam_learn(ds: &Dataset, params: &LearnerParams) -> Result<OccamModel, LearnError> {
    occam_learn_indexed(ds, &AttributeIndex::new(ds), params)
}

pub fn occam_learn_indexed(
    ds: &Dataset,
    index: &AttributeIndex,
    params: &LearnerParams,
) -> Result<OccamModel, LearnError> {
    if ds.m() == 0 {
        return Err(LearnError::Empty);
    }
    let mut cover = Cover::new(ds);
    if cover.negatives_left == 0 {
        warn_no_negatives("occam");
        return Ok(OccamModel::default());
    }
    let positives = cover.positives as f64;
    let mut active_groups: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    while steps.len() < params.v_max && cover.negatives_left > 0 {
        let remaining = cover.negatives_left as f64;
        let mut best: Option<(f64, (usize, u8, f64))> = None;
        let mut best_step: Option<OccamStep> = None;
        for sa in index.attributes() {
            if cover.used[sa.attr] {
                continue;
            }
            cover.tally(sa);
            active_groups.clear();
            active_groups.extend((0..sa.groups()).filter(|&g| cover.neg[g] + cover.pos[g] > 0));
            let na = active_groups.len();
            let (lo, hi) = (sa.range.lo, sa.range.hi);
            for dir in Direction::BOTH {
                let (mut q, mut r) = (0usize, 0usize);
                for step in 0..na {
                    let j = match dir {
                        Direction::Positive => step,
                        Direction::Negative => na - 1 - step,
                    };
                    let grp = active_groups[j];
                    q += cover.neg[grp] as usize;
                    r += cover.pos[grp] as usize;
                    if q == 0 {
                        continue;
                    }
                    // closed interval of thresholds covering exactly the
                    // scanned groups
                    let (a, b) = match dir {
                        Direction::Positive => (
                            sa.values[grp],
                            if j + 1 < na {
                                sa.values[active_groups[j + 1]].next_down()
                            } else {
                                hi
                            },
                        ),
                        Direction::Negative => (
                            if j > 0 {
                                sa.values[active_groups[j - 1]].next_up()
                            } else {
                                lo
                            },
                            sa.values[grp],
                        ),
                    };
                    if !(a < b) {
                        continue;
                    }
                    let fit = occam_utility(q, remaining, params.p, r, positives, 0.0, 0);
                    // every code costs at least 0 bits
                    if let Some((bu, _)) = best {
                        if fit < bu {
                            continue;
                        }
                    }
                    let code = dyadic_code(lo, hi, a, b)?;
                    let u = fit - params.eta * code.bits as f64;
                    let key = (sa.attr, dir_rank(dir), code.threshold);
                    if improves(u, key, best) {
                        best = Some((u, key));
                        best_step = Some(OccamStep {
                            stump: DecisionStump::new(sa.attr, code.threshold, dir),
                            bits: code.bits,
                            code_index: code.index,
                            interval: (a, b),
                            range: sa.range,
                        });
                    }
                }
            }
        }
        let (Some((u, _)), Some(step)) = (best, best_step) else {
            break;
        };
        if u <= 0.0 {
            break;
        }
        cover.apply(&step.stump);
        steps.push(step);
    }
    Ok(OccamModel::from_steps(steps)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{bit_budget, dyadic_point};

    fn one_dim(values: &[f64], labels: &[u8]) -> Dataset {
        Dataset::new(values.iter().map(|&v| vec![v]).collect(), labels.to_vec()).unwrap()
    }

    fn params(p: f64, eta: f64) -> LearnerParams {
        LearnerParams {
            p,
            eta,
            ..LearnerParams::default()
        }
    }

    #[test]
    fn sc_separable_line() {
        let ds = one_dim(&[1.0, 2.0, 2.5, 4.0, 5.0, 6.0], &[0, 0, 0, 1, 1, 1]);
        let model = greedy_sc_learn(&ds, &params(1.0, 0.0)).unwrap();
        assert_eq!(model.steps().len(), 1);
        let s = model.steps()[0];
        assert_eq!(
            (s.stump.threshold, s.stump.dir, s.anchor),
            (2.5, Direction::Positive, 2)
        );
        for i in 0..ds.m() {
            assert_eq!(model.conjunction().predict(ds.row(i)), ds.label(i));
        }
    }

    #[test]
    fn sc_hand_traced_two_stumps() {
        let ds = Dataset::new(
            vec![
                vec![0.0, 1.0],
                vec![1.0, 1.0],
                vec![2.0, 1.0],
                vec![3.0, 2.0],
                vec![4.0, 2.0],
                vec![5.0, 1.0],
                vec![6.0, 2.0],
            ],
            vec![0, 0, 0, 1, 1, 0, 0],
        )
        .unwrap();
        let model = greedy_sc_learn(&ds, &params(10.0, 0.0)).unwrap();
        // x1 <= 1 covers negatives 0, 1, 2, 5 (x0 <= 2 only three), then
        // x1 is used and x0 >= 6 covers example 6
        let got: Vec<_> = model
            .steps()
            .iter()
            .map(|s| (s.stump.attr, s.stump.dir, s.stump.threshold))
            .collect();
        assert_eq!(
            got,
            vec![(1, Direction::Positive, 1.0), (0, Direction::Negative, 6.0)]
        );
        assert_eq!(model.compression_indices(), vec![0, 6]);
    }

    #[test]
    fn sc_ties_prefer_low_attribute_then_positive_direction() {
        // both attributes separate identically
        let ds = Dataset::new(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 1.0],
                vec![2.0, 2.0],
                vec![3.0, 3.0],
            ],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        let model = greedy_sc_learn(&ds, &params(1.0, 0.0)).unwrap();
        assert_eq!(model.steps()[0].stump.attr, 0);
        assert_eq!(model.steps()[0].stump.dir, Direction::Positive);
    }

    #[test]
    fn sc_large_penalty_never_covers_positives() {
        let ds = Dataset::new(
            vec![
                vec![0.0, 3.0],
                vec![1.0, 0.0],
                vec![2.0, 2.0],
                vec![3.0, 1.0],
                vec![4.0, 4.0],
                vec![5.0, 5.0],
            ],
            vec![0, 1, 0, 1, 0, 1],
        )
        .unwrap();
        let model = greedy_sc_learn(&ds, &params(ds.m() as f64, 0.0)).unwrap();
        for i in 0..ds.m() {
            if ds.label(i) == 1 {
                assert_eq!(model.conjunction().predict(ds.row(i)), 1);
            }
        }
    }

    #[test]
    fn no_negatives_gives_empty_model() {
        let ds = one_dim(&[1.0, 2.0], &[1, 1]);
        assert!(greedy_sc_learn(&ds, &params(1.0, 0.0))
            .unwrap()
            .steps()
            .is_empty());
        assert!(occam_learn(&ds, &params(1.0, 0.0))
            .unwrap()
            .steps()
            .is_empty());
    }

    #[test]
    fn occam_wide_gap_few_bits() {
        let ds = one_dim(&[0.0, 0.05, 0.1, 0.9, 0.95, 1.0], &[0, 0, 0, 1, 1, 1]);
        let model = occam_learn(&ds, &params(1.0, 0.01)).unwrap();
        assert_eq!(model.steps().len(), 1);
        let s = model.steps()[0];
        assert_eq!((s.bits, s.stump.threshold), (0, 0.5));
        assert_eq!(s.interval.0, 0.1);
        assert!(s.interval.1 < 0.9);
    }

    #[test]
    fn occam_bits_sound() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 41) as f64 / 41.0).collect();
        let labels: Vec<u8> = xs.iter().map(|&x| (x > 0.3 && x < 0.8) as u8).collect();
        let ds = one_dim(&xs, &labels);
        let model = occam_learn(&ds, &params(2.0, 0.001)).unwrap();
        assert!(!model.steps().is_empty());
        for s in model.steps() {
            let (a, b) = s.interval;
            assert!(a <= s.stump.threshold && s.stump.threshold <= b);
            assert!(s.bits <= bit_budget(s.range.lo, s.range.hi, a, b));
            assert_eq!(
                dyadic_point(s.range.lo, s.range.hi, s.bits, s.code_index),
                s.stump.threshold
            );
        }
    }

    #[test]
    fn occam_eta_zero_matches_normalized_hard_greedy() {
        let ds = Dataset::new(
            (0..30)
                .map(|i| vec![(i % 7) as f64, ((i * 5) % 11) as f64, ((i * 3) % 13) as f64])
                .collect(),
            (0..30)
                .map(|i| ((i % 7) > 2 && ((i * 5) % 11) < 8) as u8)
                .collect(),
        )
        .unwrap();
        let occam = occam_learn(&ds, &params(1.0, 0.0)).unwrap();
        // oracle: brute-force argmax of |Q|/N' - p|R|/|P| over interval
        // scans, with covered sets compared instead of thresholds
        let mut active = vec![true; ds.m()];
        let mut used = vec![false; ds.n()];
        let positives = ds.count_positives() as f64;
        for step in occam.steps() {
            let remaining = (0..ds.m())
                .filter(|&i| active[i] && ds.label(i) == 0)
                .count() as f64;
            let mut best = f64::NEG_INFINITY;
            for k in 0..ds.n() {
                if used[k] {
                    continue;
                }
                for dir in Direction::BOTH {
                    for i in 0..ds.m() {
                        let stump = DecisionStump::new(k, ds.value(i, k), dir);
                        let (mut q, mut r, mut alive) = (0.0, 0.0, 0.0);
                        for e in 0..ds.m() {
                            if !active[e] {
                                continue;
                            }
                            alive += 1.0;
                            if stump.predict(ds.row(e)) == 0 {
                                if ds.label(e) == 0 {
                                    q += 1.0
                                } else {
                                    r += 1.0
                                }
                            }
                        }
                        // covering every active example has no coded interval
                        if q > 0.0 && q + r < alive {
                            best = best.max(q / remaining - r / positives);
                        }
                    }
                }
            }
            let chosen = step.stump;
            let (mut q, mut r) = (0.0, 0.0);
            for e in 0..ds.m() {
                if active[e] && chosen.predict(ds.row(e)) == 0 {
                    if ds.label(e) == 0 {
                        q += 1.0
                    } else {
                        r += 1.0
                    }
                    active[e] = false;
                }
            }
            used[chosen.attr] = true;
            assert!((q / remaining - r / positives - best).abs() < 1e-12);
        }
    }

    #[test]
    fn occam_utility_arithmetic() {
        let u = occam_utility(8, 10.0, 1.0, 1, 20.0, 0.01, 3);
        assert!((u - 0.72).abs() < 1e-12);
    }
}
