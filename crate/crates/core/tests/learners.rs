use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stumpsel::data::{synth_generate, Dataset, SynthSpec};
use stumpsel::learners::{
    bit_budget, dyadic_point, learn_disjunction, train, CompressionModel, LearnerKind,
    LearnerParams, ModelBody, Target, TrainedModel,
};
use stumpsel::stumps::Direction;

fn planted(n: usize, m: usize, r: usize, noise: f64, seed: u64) -> Dataset {
    synth_generate(&SynthSpec {
        n,
        m,
        r,
        noise,
        seed,
    })
    .unwrap()
    .dataset
}

fn params(p: f64, eta: f64, v_max: usize) -> LearnerParams {
    LearnerParams {
        p,
        eta,
        v_max,
        ..LearnerParams::default()
    }
}

fn soft_negative_mass(model: &TrainedModel, ds: &Dataset) -> f64 {
    (0..ds.m())
        .filter(|&i| ds.label(i) == 0)
        .map(|i| model.gibbs_example_risk(ds.row(i), 0).unwrap())
        .sum()
}

#[test]
fn training_is_deterministic() {
    let ds = planted(40, 50, 2, 0.1, 1);
    for kind in LearnerKind::ALL {
        let mut p = params(2.0, 0.01, 6);
        p.gamma = kind.uses_gamma().then_some(0.05);
        let a = train(&ds, kind, Target::Conjunction, &p).unwrap();
        let b = train(&ds, kind, Target::Conjunction, &p).unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn greedy_cover_size_on_separable_data() {
    for (r, m) in [(1, 20), (2, 60), (3, 200)] {
        for seed in 0..3 {
            let ds = planted(30, m, r, 0.0, seed);
            let model = train(
                &ds,
                LearnerKind::Sc,
                Target::Conjunction,
                &params(m as f64, 0.0, 500),
            )
            .unwrap();
            assert_eq!(model.count_errors(&ds), 0);
            assert!(model.size() as f64 <= (r as f64 * (m as f64).ln()).ceil());
        }
    }
}

#[test]
fn each_stump_strictly_reduces_negative_mass() {
    let ds = planted(60, 80, 3, 0.1, 5);
    for kind in LearnerKind::ALL {
        let mut p = params(1.5, 0.001, 10);
        p.gamma = kind.uses_gamma().then_some(0.02);
        let model = train(&ds, kind, Target::Conjunction, &p).unwrap();
        let mut last = f64::INFINITY;
        for v in 0..=model.size() {
            let prefix = model.truncated(v);
            let mass = if kind.is_soft() {
                soft_negative_mass(&prefix, &ds)
            } else {
                (0..ds.m())
                    .filter(|&i| ds.label(i) == 0 && prefix.predict(ds.row(i)) == 1)
                    .count() as f64
            };
            assert!(mass < last, "{kind}: step {v} mass {mass} vs {last}");
            last = mass;
        }
    }
}

#[test]
fn prefix_of_a_model_equals_training_with_smaller_cap() {
    let ds = planted(50, 70, 3, 0.1, 2);
    for kind in LearnerKind::ALL {
        let mut p = params(1.0, 0.001, 8);
        p.gamma = kind.uses_gamma().then_some(0.03);
        let full = train(&ds, kind, Target::Conjunction, &p).unwrap();
        for v in 1..full.size() {
            let capped = train(
                &ds,
                kind,
                Target::Conjunction,
                &LearnerParams { v_max: v, ..p },
            )
            .unwrap();
            assert_eq!(full.truncated(v).body, capped.body, "{kind} v={v}");
        }
    }
}

#[test]
fn occam_codes_are_sound() {
    for seed in 0..5 {
        let ds = planted(40, 60, 2, 0.05, seed);
        let model = train(
            &ds,
            LearnerKind::Occam,
            Target::Conjunction,
            &params(2.0, 0.02, 10),
        )
        .unwrap();
        let ModelBody::Occam(o) = &model.body else {
            unreachable!()
        };
        for s in o.steps() {
            let (a, b) = s.interval;
            assert!(a < b);
            assert!(s.bits <= bit_budget(s.range.lo, s.range.hi, a, b));
            assert!((a..=b).contains(&s.stump.threshold));
            assert_eq!(
                s.stump.threshold,
                dyadic_point(s.range.lo, s.range.hi, s.bits, s.code_index)
            );
        }
    }
}

#[test]
fn compression_set_rebuilds_the_classifier() {
    let ds = planted(40, 80, 3, 0.05, 4);
    let model = train(
        &ds,
        LearnerKind::Sc,
        Target::Conjunction,
        &params(3.0, 0.0, 10),
    )
    .unwrap();
    let ModelBody::Compression(c) = &model.body else {
        unreachable!()
    };
    let steps = c.steps();
    let examples: Vec<&[f64]> = steps.iter().map(|s| ds.row(s.anchor)).collect();
    let attrs: Vec<usize> = steps.iter().map(|s| s.stump.attr).collect();
    let dirs: Vec<Direction> = steps.iter().map(|s| s.stump.dir).collect();
    let rebuilt = CompressionModel::reconstruct(&examples, &attrs, &dirs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..ds.n()).map(|_| rng.random_range(-0.2..1.2)).collect();
        assert_eq!(rebuilt.predict(&x), model.predict(&x));
    }
    for i in 0..ds.m() {
        assert_eq!(rebuilt.predict(ds.row(i)), model.predict(ds.row(i)));
    }
}

#[test]
fn disjunction_of_two_stumps_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rows: Vec<Vec<f64>> = (0..80)
        .map(|_| (0..6).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect();
    let labels = rows
        .iter()
        .map(|x| (x[1] > 5.0 || x[2] < 2.0) as u8)
        .collect();
    let ds = Dataset::new(rows, labels).unwrap();
    for kind in [LearnerKind::Sc, LearnerKind::Occam] {
        let model = learn_disjunction(&ds, kind, &params(80.0, 0.0, 10)).unwrap();
        assert_eq!(model.count_errors(&ds), 0, "{kind}");
        assert_eq!(model.attributes(), vec![1, 2], "{kind}");
    }
}

#[test]
fn disjunction_complements_the_swapped_conjunction() {
    let ds = planted(30, 60, 2, 0.1, 9);
    let swapped = ds.with_swapped_labels();
    for kind in LearnerKind::ALL {
        let mut p = params(1.0, 0.001, 5);
        p.gamma = kind.uses_gamma().then_some(0.05);
        let disj = train(&ds, kind, Target::Disjunction, &p).unwrap();
        let conj = train(&swapped, kind, Target::Conjunction, &p).unwrap();
        assert_eq!(disj.body, conj.body);
        assert_eq!(disj.count_errors(&ds), conj.count_errors(&swapped));
        for i in 0..ds.m() {
            assert_eq!(disj.predict(ds.row(i)), 1 - conj.predict(ds.row(i)));
        }
        if kind.is_soft() {
            let (a, b) = (
                disj.gibbs_errors(&ds).unwrap(),
                conj.gibbs_errors(&swapped).unwrap(),
            );
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn all_positive_data_gives_the_empty_conjunction() {
    let rows: Vec<Vec<f64>> = (0..10)
        .map(|i| vec![i as f64, (i * 3 % 7) as f64])
        .collect();
    let ds = Dataset::new(rows, vec![1; 10]).unwrap();
    for kind in LearnerKind::ALL {
        let mut p = params(1.0, 0.0, 5);
        p.gamma = kind.uses_gamma().then_some(0.5);
        let model = train(&ds, kind, Target::Conjunction, &p).unwrap();
        assert_eq!(model.size(), 0, "{kind}");
        assert_eq!(model.count_errors(&ds), 0);
    }
}

#[test]
fn huge_margin_cost_takes_full_range_intervals() {
    let ds = planted(20, 40, 2, 0.0, 3);
    let model = train(
        &ds,
        LearnerKind::PacBayes,
        Target::Conjunction,
        &params(1.0, 1000.0, 5),
    )
    .unwrap();
    let ModelBody::Gibbs(g) = &model.body else {
        unreachable!()
    };
    for s in g.steps() {
        assert_eq!(s.ratio(), 1.0);
    }
}

#[test]
fn narrow_fixed_margin_approaches_hard_thresholds() {
    let ds = planted(20, 60, 2, 0.0, 6);
    let model = train(
        &ds,
        LearnerKind::PacBayesFixed,
        Target::Conjunction,
        &LearnerParams {
            gamma: Some(1e-9),
            ..params(60.0, 0.0, 10)
        },
    )
    .unwrap();
    assert_eq!(model.count_errors(&ds), 0);
    let gibbs = model.gibbs_errors(&ds).unwrap();
    assert!(gibbs < 1e-6, "{gibbs}");
}
