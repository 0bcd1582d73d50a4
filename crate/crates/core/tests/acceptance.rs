use std::io::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stumpsel::bounds::{
    binomial_tail, binomial_tail_inversion, kl_bernoulli, kl_sup_inversion, occam_bound, SizePrior,
};
use stumpsel::cli::{self, Cli};
use stumpsel::data::{synth_generate, Dataset, SynthSpec};
use stumpsel::learners::{dyadic_code, train, LearnerKind, LearnerParams, Target};
use stumpsel::modelsel::{nested_cv, CvPlan};
use stumpsel::stumps::{
    self, DecisionStump, Direction, GibbsConjunction, IntervalStump, StumpConjunction,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_cli(args: &[String]) -> Result<String, String> {
    let cli =
        Cli::try_parse_from(std::iter::once("stumpsel".to_string()).chain(args.iter().cloned()))
            .map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    cli::run(cli, &mut buf).map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

fn args(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Rows of a bound sweep table as (swept value, bound).
fn sweep_rows(table: &str) -> Vec<(f64, f64)> {
    table
        .lines()
        .skip(1)
        .map(|line| {
            let cols: Vec<&str> = line.split('\t').collect();
            (cols[0].parse().unwrap(), cols[1].parse().unwrap())
        })
        .collect()
}

fn extrapolated_bound_sweep() -> Outcome {
    let out = run_cli(&args(&[
        "bound",
        "pacbayes",
        "m=500",
        "n=918",
        "k=1",
        "ratio=0.12",
        "delta=0.05",
        "prior=quadratic",
        "gibbs-risk-sweep=0.02:0.06:0.005",
    ]))?;
    let rows = sweep_rows(&out);
    let at = |q: f64| {
        rows.iter()
            .find(|r| (r.0 - q).abs() < 1e-9)
            .map(|r| r.1)
            .unwrap()
    };
    let b03 = at(0.03);
    let outside: Vec<String> = rows
        .iter()
        .filter(|r| !(0.09..=0.16).contains(&r.1))
        .map(|r| format!("{}->{:.4}", r.0, r.1))
        .collect();
    let near = (b03 - 0.12).abs() <= 0.02;
    check(
        near && outside.is_empty() && rows.len() == 9,
        format!(
            "bound(0.02)={:.4} bound(0.03)={b03:.4} bound(0.06)={:.4}; outside [0.09,0.16]: {:?}",
            at(0.02),
            at(0.06),
            outside
        ),
    )
}

fn small_sample_bracket() -> Outcome {
    let risks: Vec<String> = (0..=20)
        .map(|i| format!("{}", 0.0577 * i as f64 / 20.0))
        .collect();
    let out = run_cli(&args(&[
        "bound",
        "pacbayes",
        "m=52",
        "n=918",
        "k=1",
        "ratio=0.12",
        "delta=0.05",
        &format!("gibbs-risk-sweep={}", risks.join(",")),
    ]))?;
    let scaled: Vec<f64> = sweep_rows(&out).iter().map(|r| r.1 * 52.0).collect();
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    check(
        lo <= 18.0 && 18.0 <= hi,
        format!("bound x 52 spans [{lo:.3}, {hi:.3}]"),
    )
}

fn inversion_correctness() -> Outcome {
    let deltas: Vec<f64> = (0..10)
        .map(|i| 10f64.powf(-6.0 + 5.5 * i as f64 / 9.0))
        .collect();
    let (mut checked, mut boundary) = (0, 0);
    for m in [10u64, 100, 1000] {
        let kappas: Vec<u64> = (0..10).map(|i| i * (m - 1) / 9).collect();
        for &kappa in &kappas {
            for &delta in &deltas {
                let inv = binomial_tail_inversion(kappa, m, delta).map_err(|e| e.to_string())?;
                if inv > 0.0 && inv < 1.0 {
                    let at = binomial_tail(kappa, m, inv).map_err(|e| e.to_string())?;
                    if !(at >= delta - 1e-7 && at <= delta) {
                        return Err(format!("Bin({kappa},{m},{inv}) = {at} vs delta {delta}"));
                    }
                    let past = binomial_tail(kappa, m, (inv + 1e-6).min(1.0))
                        .map_err(|e| e.to_string())?;
                    if !(past < delta) {
                        return Err(format!(
                            "Bin({kappa},{m},{inv}+1e-6) = {past} not below {delta}"
                        ));
                    }
                    checked += 1;
                } else {
                    boundary += 1;
                }
                let q = kappa as f64 / m as f64;
                let psi = (((m + 1) as f64) / delta).ln() / m as f64;
                let sup = kl_sup_inversion(q, psi).map_err(|e| e.to_string())?;
                if sup > q && sup + 1e-6 < 1.0 {
                    let at = kl_bernoulli(q, sup).map_err(|e| e.to_string())?;
                    if !(at >= psi && at <= psi + 1e-7) {
                        return Err(format!("kl({q}||{sup}) = {at} vs psi {psi}"));
                    }
                    let past = kl_bernoulli(q, sup + 1e-6).map_err(|e| e.to_string())?;
                    if !(past > psi) {
                        return Err(format!("kl({q}||{sup}+1e-6) = {past} not above {psi}"));
                    }
                    checked += 1;
                } else {
                    boundary += 1;
                }
            }
        }
    }
    Ok(format!(
        "{checked} interior inversions checked, {boundary} at or near the boundary skipped"
    ))
}

fn random_posterior(rng: &mut ChaCha8Rng, n: usize, degenerate: bool) -> GibbsConjunction {
    let k = rng.random_range(1..=5);
    let attrs = rand::seq::index::sample(rng, n, k).into_vec();
    let stumps = attrs
        .into_iter()
        .map(|attr| {
            let a: f64 = rng.random_range(0.0..0.8);
            let b = if degenerate {
                a
            } else {
                a + rng.random_range(0.05..0.6)
            };
            let dir = if rng.random_bool(0.5) {
                Direction::Positive
            } else {
                Direction::Negative
            };
            IntervalStump::new(attr, a, b, dir).unwrap()
        })
        .collect();
    GibbsConjunction::from_unsorted(stumps).unwrap()
}

fn gibbs_monte_carlo() -> Outcome {
    const DRAWS: usize = 100_000;
    let n = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for c in 0..20 {
        let post = random_posterior(&mut rng, n, false);
        let examples: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..n).map(|_| rng.random_range(-0.1..1.5)).collect())
            .collect();
        let mut ones = vec![0usize; examples.len()];
        for _ in 0..DRAWS {
            let drawn: Vec<DecisionStump> = post
                .stumps()
                .iter()
                .map(|s| DecisionStump::new(s.attr, rng.random_range(s.a..=s.b), s.dir))
                .collect();
            for (x, count) in examples.iter().zip(ones.iter_mut()) {
                if drawn
                    .iter()
                    .all(|s| (x[s.attr] - s.threshold) * s.dir.sign() > 0.0)
                {
                    *count += 1;
                }
            }
        }
        for (e, (x, &count)) in examples.iter().zip(&ones).enumerate() {
            let p = post.sigma_product(x);
            let freq = count as f64 / DRAWS as f64;
            let tol = 3.0 * (p * (1.0 - p) / DRAWS as f64).sqrt();
            let z = if tol > 0.0 {
                (freq - p).abs() / tol * 3.0
            } else if freq == p {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
            if (freq - p).abs() > tol {
                failures.push(format!("conj {c} ex {e}: p={p:.5} freq={freq:.5}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("400 comparisons, largest |z| = {worst:.2}, failures: {failures:?}"),
    )
}

fn greedy_cover() -> Outcome {
    let mut runs = 0;
    let mut largest = 0.0f64;
    for r in 1..=3usize {
        for m in [20usize, 60, 200] {
            let cap = (r as f64 * (m as f64).ln()).ceil() as usize;
            for seed in 0..10u64 {
                let data = synth_generate(&SynthSpec {
                    n: 50,
                    m,
                    r,
                    noise: 0.0,
                    seed,
                })
                .map_err(|e| e.to_string())?;
                let ds = &data.dataset;
                for kind in [LearnerKind::Sc, LearnerKind::Occam] {
                    let params = LearnerParams {
                        p: m as f64,
                        eta: 0.0,
                        v_max: 1000,
                        ..LearnerParams::default()
                    };
                    let model =
                        train(ds, kind, Target::Conjunction, &params).map_err(|e| e.to_string())?;
                    let errors = model.count_errors(ds);
                    if errors != 0 || model.size() > cap {
                        return Err(format!(
                            "{kind} r={r} m={m} seed={seed}: {} stumps (cap {cap}), {errors} errors",
                            model.size()
                        ));
                    }
                    runs += 1;
                    largest = largest.max(model.size() as f64 / cap as f64);
                }
            }
        }
    }
    Ok(format!(
        "{runs} runs, zero training error, largest size/cap {largest:.2}"
    ))
}

fn planted_recovery() -> Outcome {
    let data = synth_generate(&SynthSpec {
        n: 500,
        m: 60,
        r: 2,
        noise: 0.05,
        seed: 7,
    })
    .map_err(|e| e.to_string())?;
    let mut plan = CvPlan::new(LearnerKind::PacBayes, 7);
    plan.permutations = 5;
    let res = nested_cv(&data.dataset, LearnerKind::PacBayes, &plan).map_err(|e| e.to_string())?;
    let rate = res.mean_errors / res.m as f64;
    check(
        res.mean_model_size <= 4.0 && rate <= 0.20 && res.failed_folds == 0,
        format!(
            "mean size {:.2}, mean test error {rate:.3}, modal attributes {:?} (planted {:?})",
            res.mean_model_size,
            res.modal_attributes,
            data.planted.attributes()
        ),
    )
}

fn dyadic_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut max_bits = 0;
    for _ in 0..10_000 {
        let lo: f64 = rng.random_range(-10.0..10.0);
        let hi = lo + 10f64.powf(rng.random_range(-2.0..2.0));
        let w = (hi - lo) * 10f64.powf(rng.random_range(-4.0..0.0));
        let a = rng.random_range(lo..=hi - w);
        let b = (a + w).min(hi);
        let code = dyadic_code(lo, hi, a, b).map_err(|e| e.to_string())?;
        let l = code.bits;
        let point =
            |bits: u32, j: u64| lo + (2 * j - 1) as f64 * (hi - lo) / 2f64.powi(bits as i32 + 1);
        for shorter in 0..l {
            if let Some(j) = (1..=1u64 << shorter).find(|&j| (a..=b).contains(&point(shorter, j))) {
                return Err(format!(
                    "[{a}, {b}] in [{lo}, {hi}] hit at level {shorter} index {j}, coder used {l}"
                ));
            }
        }
        if !(a..=b).contains(&code.threshold) {
            return Err(format!("threshold {} outside [{a}, {b}]", code.threshold));
        }
        let budget = ((hi - lo) / (b - a)).log2().floor() as u32;
        if l > budget {
            return Err(format!(
                "{l} bits exceeds budget {budget} for [{a}, {b}] in [{lo}, {hi}]"
            ));
        }
        max_bits = max_bits.max(l);
    }
    Ok(format!("10000 quadruples, up to {max_bits} bits"))
}

fn occam_validity() -> Outcome {
    const DRAWS: usize = 1000;
    let (m, n, noise) = (100usize, 10usize, 0.1);
    let stump = DecisionStump::new(0, 0.25, Direction::Positive);
    let coded = dyadic_code(0.0, 1.0, 0.25, 0.25 + 1e-9).map_err(|e| e.to_string())?;
    if coded.bits != 1 || coded.threshold != 0.25 {
        return Err(format!("threshold 0.25 coded as {coded:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut violations = 0;
    for _ in 0..DRAWS {
        let mut errors = 0;
        for _ in 0..m {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let clean = stump.predict(&x);
            let y = if rng.random_bool(noise) {
                1 - clean
            } else {
                clean
            };
            errors += (clean != y) as usize;
        }
        let b = occam_bound(m, errors, n, &[coded.bits], 0.05, SizePrior::QuadraticDecay)
            .map_err(|e| e.to_string())?
            .bound;
        violations += (b < noise) as usize;
    }
    let freq = violations as f64 / DRAWS as f64;
    let limit = 0.05 + 3.0 * (0.05f64 / DRAWS as f64).sqrt();
    check(
        freq <= limit,
        format!("violation frequency {freq:.3} (limit {limit:.4})"),
    )
}

fn degenerate_limits() -> Outcome {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for probe in 0..10_000 {
        let post = random_posterior(&mut rng, n, true);
        let det = StumpConjunction::from_unsorted(
            post.stumps()
                .iter()
                .map(|s| DecisionStump::new(s.attr, s.a, s.dir))
                .collect(),
        )
        .unwrap();
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        if probe % 4 == 0 {
            let s = post.stumps()[0];
            x[s.attr] = s.a;
        }
        let y = rng.random_range(0..=1u8);
        let pred = det.predict(&x);
        if post.bayes_predict(&x) != pred {
            return Err(format!(
                "probe {probe}: Bayes and deterministic disagree on {x:?}"
            ));
        }
        if post.example_risk(&x, y) != (pred != y) as u8 as f64 {
            return Err(format!("probe {probe}: Gibbs risk differs from 0/1 loss"));
        }
        if probe % 100 == 0 {
            let rows: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                .collect();
            let labels: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
            let ds = Dataset::new(rows, labels).unwrap();
            if post.empirical_risk(&ds) != stumps::empirical_risk(|x| det.predict(x), &ds) {
                return Err(format!(
                    "probe {probe}: dataset Gibbs risk differs from empirical risk"
                ));
            }
        }
    }
    Ok("10000 probes, exact equality".into())
}

fn cv_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("toy.csv");
    let path = path.to_str().unwrap();
    run_cli(&args(&[
        "synth", "--n", "30", "--m", "40", "--r", "2", "--noise", "0.05", "--seed", "3", "--out",
        path,
    ]))?;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        for learner in ["sc", "pacbayes"] {
            outputs.push(run_cli(&args(&[
                "cv",
                "--data",
                path,
                "--learner",
                learner,
                "--permutations",
                "2",
                "--seed",
                "5",
                "--v",
                "1,2,3",
            ]))?);
        }
    }
    check(
        outputs[0] == outputs[2] && outputs[1] == outputs[3] && !outputs[0].is_empty(),
        format!(
            "{} and {} bytes, identical across runs",
            outputs[0].len(),
            outputs[1].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        (
            "bound calculator, m=500 extrapolation",
            extrapolated_bound_sweep,
            Some(Duration::from_secs(1)),
        ),
        (
            "bound x 52 bracket contains 18",
            small_sample_bracket,
            Some(Duration::from_secs(1)),
        ),
        (
            "binomial and kl inversion correctness",
            inversion_correctness,
            Some(Duration::from_secs(5)),
        ),
        (
            "Gibbs closed form vs Monte Carlo",
            gibbs_monte_carlo,
            Some(Duration::from_secs(30)),
        ),
        ("greedy cover size on planted data", greedy_cover, None),
        (
            "planted recovery under nested CV",
            planted_recovery,
            Some(Duration::from_secs(600)),
        ),
        ("dyadic coder soundness", dyadic_soundness, None),
        (
            "Occam bound validity",
            occam_validity,
            Some(Duration::from_secs(120)),
        ),
        ("degenerate interval identities", degenerate_limits, None),
        ("cv determinism", cv_determinism, None),
    ];
    let mut failed = 0;
    let stdout = std::io::stdout();
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let slow = limit.is_some_and(|l| elapsed > l);
        let (status, detail) = match (&outcome, slow) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; exceeded {:?}", limit.unwrap())),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        let mut out = stdout.lock();
        writeln!(
            out,
            "criterion {} {name}: {status} ({detail}) [{:.2?}]",
            i + 1,
            elapsed
        )
        .unwrap();
        out.flush().unwrap();
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
