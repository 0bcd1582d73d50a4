//! Binomial probabilities in log space.
//!
//! Point probabilities use Loader's saddle-point expansion (the Stirling
//! remainder `stirlerr` plus the deviance term `bd0`), which stays accurate
//! to a few ulps in relative terms for sample sizes in the millions. Log
//! binomial coefficients are derived from the same expansion.

use std::f64::consts::LN_2;

use super::BoundError;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

// stirlerr(n) = ln(n!) - ln(sqrt(2 pi n) (n/e)^n) for n = 0..=15; entry 0 unused.
const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_2,
    0.041_340_695_955_409_294_093_822_1,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_567,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_318,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_152,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_690,
];

fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return STIRLERR_SMALL[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / np) + np - x`, by series when `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// `ln [C(m, k) r^k (1-r)^(m-k)]`, `-inf` where the probability is zero.
pub fn ln_binomial_pmf(k: u64, m: u64, r: f64) -> f64 {
    let q = 1.0 - r;
    if k > m {
        return f64::NEG_INFINITY;
    }
    if r == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == m { 0.0 } else { f64::NEG_INFINITY };
    }
    let (x, n) = (k as f64, m as f64);
    if k == 0 {
        if m == 0 {
            return 0.0;
        }
        return if r < 0.1 {
            -bd0(n, n * q) - n * r
        } else {
            n * q.ln()
        };
    }
    if k == m {
        return if q < 0.1 {
            -bd0(n, n * r) - n * q
        } else {
            n * r.ln()
        };
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * r) - bd0(n - x, n * q);
    let lf = LN_2PI + x.ln() + (-x / n).ln_1p();
    lc - 0.5 * lf
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_binomial_pmf(k, n, 0.5) + n as f64 * LN_2
}

fn check_args(kappa: u64, m: u64) -> Result<(), BoundError> {
    if kappa > m {
        return Err(BoundError::InvalidCount(format!(
            "error count {kappa} exceeds sample size {m}"
        )));
    }
    Ok(())
}

/// `ln Bin(kappa, m, r)`, the log probability of at most `kappa` errors in
/// `m` trials at error rate `r`.
pub fn ln_binomial_tail(kappa: u64, m: u64, r: f64) -> Result<f64, BoundError> {
    check_args(kappa, m)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(BoundError::InvalidProbability(r));
    }
    Ok(ln_tail_unchecked(kappa, m, r))
}

// Terms more than this far (in log units) below the largest one are dropped;
// the discarded mass is below 1e-20 relative for any m up to 1e6.
const LN_TAIL_CUTOFF: f64 = 60.0;

fn ln_tail_unchecked(kappa: u64, m: u64, r: f64) -> f64 {
    if kappa >= m || r == 0.0 {
        return 0.0;
    }
    if r == 1.0 {
        return f64::NEG_INFINITY;
    }
    // pmf is unimodal with its mode at floor((m + 1) r)
    let mode = (((m + 1) as f64) * r).floor() as u64;
    let peak = mode.min(kappa);
    let ln_peak = ln_binomial_pmf(peak, m, r);
    let mut sum = Neumaier::default();
    sum.add(1.0);
    let mut i = peak;
    while i > 0 {
        i -= 1;
        let d = ln_binomial_pmf(i, m, r) - ln_peak;
        if d < -LN_TAIL_CUTOFF {
            break;
        }
        sum.add(d.exp());
    }
    let mut i = peak + 1;
    while i <= kappa {
        let d = ln_binomial_pmf(i, m, r) - ln_peak;
        if d < -LN_TAIL_CUTOFF {
            break;
        }
        sum.add(d.exp());
        i += 1;
    }
    (ln_peak + sum.total().ln()).min(0.0)
}

/// `Bin(kappa, m, r) = sum_{i <= kappa} C(m, i) r^i (1-r)^(m-i)`.
pub fn binomial_tail(kappa: u64, m: u64, r: f64) -> Result<f64, BoundError> {
    ln_binomial_tail(kappa, m, r).map(f64::exp)
}

/// `sup { r : Bin(kappa, m, r) >= delta }`.
///
/// Bisection runs until the bracket collapses to adjacent floats; the upper
/// end of the bracket is returned, so `Bin(kappa, m, result) <= delta`.
pub fn binomial_tail_inversion(kappa: u64, m: u64, delta: f64) -> Result<f64, BoundError> {
    if !(delta > 0.0) {
        return Err(BoundError::InvalidDelta(delta));
    }
    binomial_tail_inversion_ln(kappa, m, delta.min(1.0).ln())
}

/// [`binomial_tail_inversion`] with the confidence given as `ln delta`, so
/// that vanishingly small prior masses never underflow.
pub fn binomial_tail_inversion_ln(kappa: u64, m: u64, ln_delta: f64) -> Result<f64, BoundError> {
    check_args(kappa, m)?;
    if ln_delta.is_nan() || ln_delta == f64::NEG_INFINITY {
        return Err(BoundError::InvalidDelta(ln_delta.exp()));
    }
    if kappa >= m {
        return Ok(1.0);
    }
    if ln_delta >= 0.0 {
        return Ok(0.0);
    }
    Ok(bisect_decreasing(
        |r| ln_tail_unchecked(kappa, m, r),
        ln_delta,
        0.0,
        1.0,
    ))
}

/// For `f` nonincreasing with `f(lo) >= target > f(hi)`, narrows `[lo, hi]`
/// to adjacent floats and returns `hi`.
pub(crate) fn bisect_decreasing(
    f: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Compensated summation.
#[derive(Default, Debug, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Oracle: ln C(n, k) as a plain sum of logs.
    fn ln_binomial_oracle(n: u64, k: u64) -> f64 {
        let k = k.min(n - k);
        (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
    }

    // Oracle: exact binomial tail by direct summation with exact integer
    // coefficients (small m only).
    fn tail_oracle(kappa: u64, m: u64, r: f64) -> f64 {
        let mut c = 1.0f64;
        let mut total = 0.0;
        for i in 0..=kappa {
            if i > 0 {
                c = c * (m - i + 1) as f64 / i as f64;
            }
            total += c * r.powi(i as i32) * (1.0 - r).powi((m - i) as i32);
        }
        total
    }

    #[test]
    fn stirlerr_table_matches_definition() {
        let mut fact = 1.0f64;
        for n in 1..=15u64 {
            fact *= n as f64;
            let nf = n as f64;
            let direct = fact.ln() - (nf + 0.5) * nf.ln() + nf - 0.5 * LN_2PI;
            assert!((STIRLERR_SMALL[n as usize] - direct).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn stirlerr_series_is_continuous_at_15() {
        // just above the table the series branch takes over
        let n = 16.0f64;
        let direct = (1..=16u64).map(|i| (i as f64).ln()).sum::<f64>() - (n + 0.5) * n.ln() + n
            - 0.5 * LN_2PI;
        assert!((stirlerr(16.0) - direct).abs() < 1e-13);
    }

    #[test]
    fn ln_binomial_matches_sum_of_logs() {
        for &n in &[1u64, 2, 5, 17, 100, 918, 2000, 7129, 10_000] {
            for k in [0, 1, 2, 3, n / 3, n / 2, n.saturating_sub(1), n] {
                if k > n {
                    continue;
                }
                let got = ln_binomial(n, k);
                let want = ln_binomial_oracle(n, k);
                let err = if want == 0.0 {
                    got.abs()
                } else {
                    ((got - want) / want).abs()
                };
                assert!(err < 1e-10, "n={n} k={k} got={got} want={want}");
            }
        }
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn tail_closed_forms() {
        for &m in &[1u64, 7, 50, 1000] {
            for &r in &[0.0, 0.01, 0.3, 0.5, 0.99, 1.0] {
                let t0 = binomial_tail(0, m, r).unwrap();
                assert!((t0 - (1.0 - r).powi(m as i32)).abs() < 1e-12);
                assert_eq!(binomial_tail(m, m, r).unwrap(), 1.0);
            }
        }
        assert!((binomial_tail(1, 2, 0.5).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn tail_matches_direct_summation() {
        for &m in &[5u64, 20, 60, 150] {
            for kappa in (0..m).step_by((m as usize / 5).max(1)) {
                for &r in &[0.001, 0.05, 0.2, 0.5, 0.77] {
                    let got = binomial_tail(kappa, m, r).unwrap();
                    let want = tail_oracle(kappa, m, r);
                    assert!(
                        (got - want).abs() < 1e-12,
                        "k={kappa} m={m} r={r}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn tail_large_m_symmetry() {
        // Bin(k, m, 1/2) + Bin(m-k-1, m, 1/2) = 1 for any k < m
        let m = 1_000_000u64;
        for &k in &[499_000u64, 499_800, 500_000, 500_700] {
            let a = binomial_tail(k, m, 0.5).unwrap();
            let b = binomial_tail(m - k - 1, m, 0.5).unwrap();
            assert!((a + b - 1.0).abs() < 1e-12, "k={k}: {a} + {b}");
        }
    }

    #[test]
    fn tail_rejects_bad_arguments() {
        assert!(matches!(
            binomial_tail(1, 4, 1.5),
            Err(BoundError::InvalidProbability(_))
        ));
        assert!(matches!(
            binomial_tail(1, 4, -0.1),
            Err(BoundError::InvalidProbability(_))
        ));
        assert!(binomial_tail(5, 4, 0.5).is_err());
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(binomial_tail_inversion(10, 10, 0.05).unwrap(), 1.0);
        assert_eq!(binomial_tail_inversion(10, 10, 1.0).unwrap(), 1.0);
        let r = binomial_tail_inversion(0, 10, 0.05).unwrap();
        assert!((r - (1.0 - 0.05f64.powf(0.1))).abs() < 1e-12);
        assert!((r - 0.2589).abs() < 1e-4);
        assert_eq!(binomial_tail_inversion(3, 10, 1.0).unwrap(), 0.0);
        assert!(matches!(
            binomial_tail_inversion(3, 10, 0.0),
            Err(BoundError::InvalidDelta(_))
        ));
        assert!(binomial_tail_inversion(3, 10, -1.0).is_err());
    }

    #[test]
    fn inversion_round_trips() {
        for &m in &[10u64, 100, 1000, 20_000] {
            for &kappa in &[0, 1, m / 10, m / 2, m - 1] {
                for &delta in &[1e-9, 0.01, 0.05, 0.5, 0.9] {
                    let r = binomial_tail_inversion(kappa, m, delta).unwrap();
                    assert!(r > 0.0 && r < 1.0);
                    let at = binomial_tail(kappa, m, r).unwrap();
                    assert!(
                        at <= delta && at >= delta - 1e-7,
                        "m={m} k={kappa} d={delta} at={at}"
                    );
                    if r + 1e-6 <= 1.0 {
                        assert!(binomial_tail(kappa, m, r + 1e-6).unwrap() < delta);
                    }
                }
            }
        }
    }

    #[test]
    fn log_inversion_survives_tiny_confidence() {
        let r = binomial_tail_inversion_ln(0, 100, -2000.0).unwrap();
        // closed form: 1 - exp(ln_delta / m)
        assert!((r - (1.0 - (-20.0f64).exp())).abs() < 1e-12);
    }
}
