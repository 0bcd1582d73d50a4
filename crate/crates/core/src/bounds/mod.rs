//! Risk bounds for conjunctions of stumps.
//!
//! All prior masses and message probabilities are handled as logarithms;
//! exponentiation happens only when a bound is assembled.

mod binomial;
mod kl;

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;

use thiserror::Error;

pub use binomial::{
    binomial_tail, binomial_tail_inversion, binomial_tail_inversion_ln, ln_binomial,
    ln_binomial_pmf, ln_binomial_tail,
};
pub use kl::{kl_bernoulli, kl_sup_inversion};

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("{0}")]
    InvalidCount(String),
    #[error("margin ratio {0} outside (0, 1]")]
    InvalidRatio(f64),
    #[error("kl({q} || {p}) is infinite")]
    InfiniteKl { q: f64, p: f64 },
    #[error("report is missing component {0:?}")]
    MissingComponent(String),
}

/// `zeta(a) = (6 / pi^2) (a + 1)^-2`.
pub fn zeta(a: u64) -> f64 {
    ln_zeta(a).exp()
}

pub fn ln_zeta(a: u64) -> f64 {
    (6.0 / (PI * PI)).ln() - 2.0 * ((a + 1) as f64).ln()
}

/// Prior over the number of stumps in a conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizePrior {
    /// `p(d) = 1 / (n + 1)` on `0..=n`.
    Uniform,
    /// `p(d) = (6 / pi^2) (d + 1)^-2`.
    #[default]
    QuadraticDecay,
}

impl SizePrior {
    pub fn ln_prob(self, d: usize, n: usize) -> f64 {
        match self {
            SizePrior::Uniform => -((n + 1) as f64).ln(),
            SizePrior::QuadraticDecay => ln_zeta(d as u64),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizePrior::Uniform => "uniform",
            SizePrior::QuadraticDecay => "quadratic",
        }
    }
}

impl std::str::FromStr for SizePrior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(SizePrior::Uniform),
            "quadratic" | "quadratic-decay" => Ok(SizePrior::QuadraticDecay),
            other => Err(format!("unknown size prior {other:?} (uniform|quadratic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Occam,
    SampleCompression,
    PacBayes,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Occam => "occam",
            Regime::SampleCompression => "sc",
            Regime::PacBayes => "pacbayes",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "occam" => Ok(Regime::Occam),
            "sc" => Ok(Regime::SampleCompression),
            "pacbayes" => Ok(Regime::PacBayes),
            _ => Err(format!(
                "unknown bound regime `{s}` (expected occam, sc or pacbayes)"
            )),
        }
    }
}

/// A bound value with every ingredient needed to recompute it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub regime: Regime,
    pub bound: f64,
    pub delta: f64,
    pub components: BTreeMap<String, f64>,
}

impl BoundReport {
    fn new(regime: Regime, bound: f64, delta: f64) -> Self {
        BoundReport {
            regime,
            bound,
            delta,
            components: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.components.insert(key.to_string(), value);
        self
    }

    pub fn component(&self, key: &str) -> Result<f64, BoundError> {
        self.components
            .get(key)
            .copied()
            .ok_or_else(|| BoundError::MissingComponent(key.to_string()))
    }

    /// Recomputes the bound from the recorded components alone.
    pub fn recompute(&self) -> Result<f64, BoundError> {
        let c = |k: &str| self.component(k);
        match self.regime {
            Regime::Occam => binomial_tail_inversion_ln(
                c("errors")? as u64,
                c("m")? as u64,
                c("ln_prior")? + self.delta.ln(),
            ),
            Regime::SampleCompression => {
                let total = c("ln_binom_compression")? + c("ln_binom_errors")?
                    - c("ln_message_prob")?
                    - c("ln_zeta_compression")?
                    - c("ln_zeta_errors")?
                    - self.delta.ln();
                let free = c("m")? - c("compression_size")? - c("outside_errors")?;
                Ok(-(-total / free).exp_m1())
            }
            Regime::PacBayes => {
                let m = c("m")?;
                let psi =
                    (c("kl_discrete")? + c("kl_margin")? + (m + 1.0).ln() - self.delta.ln()) / m;
                kl_sup_inversion(c("gibbs_risk")?, psi)
            }
        }
    }

    /// `key=value` lines: regime, bound, delta, then components by name.
    pub fn to_key_values(&self) -> String {
        let mut out = format!(
            "regime={}\nbound={}\ndelta={}\n",
            self.regime.name(),
            self.bound,
            self.delta
        );
        for (k, v) in &self.components {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    /// Parses [`Self::to_key_values`] output. Lines without `=` and keys
    /// that do not parse as numbers (other than `regime`) are skipped.
    pub fn from_key_values(text: &str) -> Result<Self, BoundError> {
        let mut regime = None;
        let mut bound = None;
        let mut delta = None;
        let mut components = BTreeMap::new();
        for line in text.lines() {
            let Some((k, v)) = line.trim().split_once('=') else {
                continue;
            };
            if k == "regime" {
                regime = Some(v.parse::<Regime>().map_err(BoundError::InvalidCount)?);
                continue;
            }
            let Ok(x) = v.parse::<f64>() else { continue };
            match k {
                "bound" => bound = Some(x),
                "delta" => delta = Some(x),
                _ => {
                    components.insert(k.to_string(), x);
                }
            }
        }
        Ok(BoundReport {
            regime: regime.ok_or_else(|| BoundError::MissingComponent("regime".into()))?,
            bound: bound.ok_or_else(|| BoundError::MissingComponent("bound".into()))?,
            delta: delta.ok_or_else(|| BoundError::MissingComponent("delta".into()))?,
            components,
        })
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_values())
    }
}

fn check_delta(delta: f64) -> Result<(), BoundError> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(BoundError::InvalidDelta(delta))
    }
}

fn check_size(n: usize, k: usize) -> Result<(), BoundError> {
    if k > n {
        return Err(BoundError::InvalidCount(format!(
            "{k} stumps requested over only {n} attributes"
        )));
    }
    Ok(())
}

/// `ln [ C(n,|k|)^-1 p(|k|) 2^-|k| prod_i zeta(l_i) 2^-l_i ]`.
pub fn occam_log_prior(
    n: usize,
    k_size: usize,
    bit_lengths: &[u32],
    size_prior: SizePrior,
) -> Result<f64, BoundError> {
    check_size(n, k_size)?;
    if bit_lengths.len() != k_size {
        return Err(BoundError::InvalidCount(format!(
            "{} bit lengths given for {k_size} stumps",
            bit_lengths.len()
        )));
    }
    let strings: f64 = bit_lengths
        .iter()
        .map(|&l| ln_zeta(l as u64) - l as f64 * LN_2)
        .sum();
    Ok(
        -ln_binomial(n as u64, k_size as u64) + size_prior.ln_prob(k_size, n)
            - k_size as f64 * LN_2
            + strings,
    )
}

/// Occam's razor bound on a conjunction coded with the dyadic threshold
/// scheme: the binomial tail inversion at confidence `prior * delta`.
pub fn occam_bound(
    m: usize,
    train_errors: usize,
    n: usize,
    bit_lengths: &[u32],
    delta: f64,
    size_prior: SizePrior,
) -> Result<BoundReport, BoundError> {
    check_delta(delta)?;
    if train_errors > m {
        return Err(BoundError::InvalidCount(format!(
            "{train_errors} errors on {m} examples"
        )));
    }
    let k = bit_lengths.len();
    let ln_prior = occam_log_prior(n, k, bit_lengths, size_prior)?;
    let bound = binomial_tail_inversion_ln(train_errors as u64, m as u64, ln_prior + delta.ln())?;
    let mut report = BoundReport::new(Regime::Occam, bound, delta)
        .with("m", m as f64)
        .with("errors", train_errors as f64)
        .with("empirical_risk", train_errors as f64 / m.max(1) as f64)
        .with("n", n as f64)
        .with("k", k as f64)
        .with("ln_prior", ln_prior)
        .with("total_bits", bit_lengths.iter().map(|&l| l as f64).sum());
    for (i, &l) in bit_lengths.iter().enumerate() {
        report = report.with(&format!("bits_{i}"), l as f64);
    }
    Ok(report)
}

/// `ln [ C(n,|k|)^-1 2^-|k| ]`, the message probability for the attributes
/// and directions of a compressed conjunction.
pub fn sc_message_log_prob(n: usize, k_size: usize) -> Result<f64, BoundError> {
    check_size(n, k_size)?;
    Ok(-ln_binomial(n as u64, k_size as u64) - k_size as f64 * LN_2)
}

/// Sample-compression bound for a conjunction with `compress_size` stumps
/// (one compression example each) and `outside_errors` training errors
/// outside the compression set.
pub fn sc_bound(
    m: usize,
    compress_size: usize,
    outside_errors: usize,
    n: usize,
    delta: f64,
) -> Result<BoundReport, BoundError> {
    check_delta(delta)?;
    if compress_size + outside_errors >= m {
        return Err(BoundError::InvalidCount(format!(
            "compression set ({compress_size}) plus outside errors ({outside_errors}) must be fewer than m = {m}"
        )));
    }
    let ln_msg = sc_message_log_prob(n, compress_size)?;
    let ln_bi = ln_binomial(m as u64, compress_size as u64);
    let ln_bj = ln_binomial((m - compress_size) as u64, outside_errors as u64);
    let (lz_i, lz_j) = (
        ln_zeta(compress_size as u64),
        ln_zeta(outside_errors as u64),
    );
    let total = ln_bi + ln_bj - ln_msg - lz_i - lz_j - delta.ln();
    let free = (m - compress_size - outside_errors) as f64;
    let bound = -(-total / free).exp_m1();
    Ok(BoundReport::new(Regime::SampleCompression, bound, delta)
        .with("m", m as f64)
        .with("n", n as f64)
        .with("compression_size", compress_size as f64)
        .with("outside_errors", outside_errors as f64)
        .with("ln_binom_compression", ln_bi)
        .with("ln_binom_errors", ln_bj)
        .with("ln_message_prob", ln_msg)
        .with("ln_zeta_compression", lz_i)
        .with("ln_zeta_errors", lz_j))
}

/// The two parts of `KL(Q || P)` for an interval posterior: the discrete
/// term `ln(C(n,|k|) 2^|k| / p(|k|))` and the margin term
/// `sum ln(1 / ratio_k)`.
pub fn pacbayes_kl(
    n: usize,
    k_size: usize,
    interval_ratios: &[f64],
    size_prior: SizePrior,
) -> Result<(f64, f64), BoundError> {
    check_size(n, k_size)?;
    if interval_ratios.len() != k_size {
        return Err(BoundError::InvalidCount(format!(
            "{} interval ratios given for {k_size} stumps",
            interval_ratios.len()
        )));
    }
    if let Some(&bad) = interval_ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(BoundError::InvalidRatio(bad));
    }
    let discrete =
        ln_binomial(n as u64, k_size as u64) + k_size as f64 * LN_2 - size_prior.ln_prob(k_size, n);
    let margin = interval_ratios.iter().map(|r| -r.ln()).sum();
    Ok((discrete, margin))
}

/// `psi = (1/m) [ KL(Q || P) + ln((m + 1) / delta) ]`.
pub fn pacbayes_psi(
    m: usize,
    n: usize,
    k_size: usize,
    interval_ratios: &[f64],
    delta: f64,
    size_prior: SizePrior,
) -> Result<f64, BoundError> {
    check_delta(delta)?;
    let (discrete, margin) = pacbayes_kl(n, k_size, interval_ratios, size_prior)?;
    Ok(psi_from_kl(m, discrete + margin, delta))
}

fn psi_from_kl(m: usize, kl: f64, delta: f64) -> f64 {
    let m = m as f64;
    (kl + (m + 1.0).ln() - delta.ln()) / m
}

/// Bound on the Gibbs risk, `sup { e : kl(R_S(G) || e) <= psi }`. The
/// `bayes_bound` component records `min(1, 2 * bound)`. The confidence
/// is folded into `psi`, so the report's `delta` is NaN here;
/// [`pacbayes_bound_full`] records it.
pub fn pacbayes_bound(gibbs_train_risk: f64, psi: f64) -> Result<BoundReport, BoundError> {
    let bound = kl_sup_inversion(gibbs_train_risk, psi)?;
    Ok(BoundReport::new(Regime::PacBayes, bound, f64::NAN)
        .with("gibbs_risk", gibbs_train_risk)
        .with("psi", psi)
        .with("bayes_bound", (2.0 * bound).min(1.0)))
}

/// [`pacbayes_bound`] with psi computed from its ingredients, recording
/// everything needed for [`BoundReport::recompute`].
pub fn pacbayes_bound_full(
    m: usize,
    n: usize,
    interval_ratios: &[f64],
    gibbs_train_risk: f64,
    delta: f64,
    size_prior: SizePrior,
) -> Result<BoundReport, BoundError> {
    check_delta(delta)?;
    let k = interval_ratios.len();
    let (discrete, margin) = pacbayes_kl(n, k, interval_ratios, size_prior)?;
    let psi = psi_from_kl(m, discrete + margin, delta);
    let mut report = pacbayes_bound(gibbs_train_risk, psi)?
        .with("m", m as f64)
        .with("n", n as f64)
        .with("k", k as f64)
        .with("kl_discrete", discrete)
        .with("kl_margin", margin);
    for (i, &r) in interval_ratios.iter().enumerate() {
        report = report.with(&format!("ratio_{i}"), r);
    }
    report.delta = delta;
    Ok(report)
}
