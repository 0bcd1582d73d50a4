//! Decision stumps, their conjunctions, interval (soft) stumps, the Gibbs
//! risk of a conjunction with uniformly drawn thresholds, and the Bayes
//! majority vote over that posterior.

use std::fmt;

use thiserror::Error;

use crate::data::Dataset;
use crate::fmt_real;

pub const DETERMINISTIC_TAG: &str = "deterministic";
pub const INTERVAL_TAG: &str = "interval";

#[derive(Debug, Error, PartialEq)]
pub enum StumpError {
    #[error("attribute indices must be strictly increasing ({prev} then {next})")]
    UnsortedAttributes { prev: usize, next: usize },
    #[error("interval [{a}, {b}] on attribute {attr} is reversed")]
    ReversedInterval { attr: usize, a: f64, b: f64 },
    #[error("direction must be -1 or +1, found {0}")]
    BadDirection(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Which side of the threshold is labeled 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Class 1 above the threshold (`d = +1`).
    Positive,
    /// Class 1 below the threshold (`d = -1`).
    Negative,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Positive, Direction::Negative];

    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Direction::Positive => 1,
            Direction::Negative => -1,
        }
    }

    pub fn from_i8(d: i8) -> Option<Direction> {
        match d {
            1 => Some(Direction::Positive),
            -1 => Some(Direction::Negative),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

impl std::str::FromStr for Direction {
    type Err = StumpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" | "+1" => Ok(Direction::Positive),
            "-1" => Ok(Direction::Negative),
            other => Err(StumpError::BadDirection(other.to_string())),
        }
    }
}

/// Outputs 1 iff `(x_k - t) d > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionStump {
    pub attr: usize,
    pub threshold: f64,
    pub dir: Direction,
}

impl DecisionStump {
    pub fn new(attr: usize, threshold: f64, dir: Direction) -> Self {
        DecisionStump {
            attr,
            threshold,
            dir,
        }
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> u8 {
        ((x[self.attr] - self.threshold) * self.dir.sign() > 0.0) as u8
    }
}

fn check_sorted(attrs: impl Iterator<Item = usize>) -> Result<(), StumpError> {
    let mut prev: Option<usize> = None;
    for next in attrs {
        if let Some(p) = prev {
            if next <= p {
                return Err(StumpError::UnsortedAttributes { prev: p, next });
            }
        }
        prev = Some(next);
    }
    Ok(())
}

/// A conjunction of stumps with strictly increasing attribute indices. The
/// empty conjunction outputs 1 everywhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StumpConjunction {
    stumps: Vec<DecisionStump>,
}

impl StumpConjunction {
    pub fn new(stumps: Vec<DecisionStump>) -> Result<Self, StumpError> {
        check_sorted(stumps.iter().map(|s| s.attr))?;
        Ok(StumpConjunction { stumps })
    }

    /// Sorts by attribute first; still rejects two stumps on one attribute.
    pub fn from_unsorted(mut stumps: Vec<DecisionStump>) -> Result<Self, StumpError> {
        stumps.sort_by_key(|s| s.attr);
        Self::new(stumps)
    }

    pub fn stumps(&self) -> &[DecisionStump] {
        &self.stumps
    }

    pub fn len(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stumps.is_empty()
    }

    pub fn attributes(&self) -> Vec<usize> {
        self.stumps.iter().map(|s| s.attr).collect()
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        self.stumps.iter().all(|s| s.predict(x) == 1) as u8
    }

    /// Tag line, then one `k d t` line per stump.
    pub fn to_text(&self) -> String {
        let mut out = format!("{DETERMINISTIC_TAG}\n");
        for s in &self.stumps {
            out.push_str(&format!("{} {} {}\n", s.attr, s.dir, fmt_real(s.threshold)));
        }
        out
    }

    /// Parses the tag line and stump lines, stopping at the first blank line.
    pub fn from_text(text: &str) -> Result<Self, StumpError> {
        let rows = parse_block(text, DETERMINISTIC_TAG, 3)?;
        let stumps = rows
            .into_iter()
            .map(|(attr, dir, vals)| DecisionStump::new(attr, vals[0], dir))
            .collect();
        Self::new(stumps)
    }
}

/// A stump whose threshold is drawn uniformly from `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalStump {
    pub attr: usize,
    pub a: f64,
    pub b: f64,
    pub dir: Direction,
}

impl IntervalStump {
    pub fn new(attr: usize, a: f64, b: f64, dir: Direction) -> Result<Self, StumpError> {
        if !(a <= b) {
            return Err(StumpError::ReversedInterval { attr, a, b });
        }
        Ok(IntervalStump { attr, a, b, dir })
    }

    /// Probability that a threshold drawn uniformly from `[a, b]` makes the
    /// stump output 1 on `x`. Piecewise linear in `x_k`; an indicator when
    /// `a = b`.
    #[inline]
    pub fn sigma(&self, x: &[f64]) -> f64 {
        sigma_value(x[self.attr], self.a, self.b, self.dir)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// The deterministic stump with its threshold at the interval midpoint.
    pub fn midpoint_stump(&self) -> DecisionStump {
        DecisionStump::new(self.attr, self.midpoint(), self.dir)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// `sigma^d_{a,b}(x)` for a single attribute value.
#[inline]
pub fn sigma_value(x: f64, a: f64, b: f64, dir: Direction) -> f64 {
    if a == b {
        return ((x - a) * dir.sign() > 0.0) as u8 as f64;
    }
    match dir {
        Direction::Positive => {
            if x < a {
                0.0
            } else if x > b {
                1.0
            } else {
                (x - a) / (b - a)
            }
        }
        Direction::Negative => {
            if x > b {
                0.0
            } else if x < a {
                1.0
            } else {
                (b - x) / (b - a)
            }
        }
    }
}

/// The Gibbs posterior: fixed attributes and directions, thresholds uniform
/// on their intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GibbsConjunction {
    stumps: Vec<IntervalStump>,
}

impl GibbsConjunction {
    pub fn new(stumps: Vec<IntervalStump>) -> Result<Self, StumpError> {
        check_sorted(stumps.iter().map(|s| s.attr))?;
        Ok(GibbsConjunction { stumps })
    }

    pub fn from_unsorted(mut stumps: Vec<IntervalStump>) -> Result<Self, StumpError> {
        stumps.sort_by_key(|s| s.attr);
        Self::new(stumps)
    }

    pub fn stumps(&self) -> &[IntervalStump] {
        &self.stumps
    }

    pub fn len(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stumps.is_empty()
    }

    /// `prod_k sigma_k(x)`; 1 for the empty conjunction.
    pub fn sigma_product(&self, x: &[f64]) -> f64 {
        self.stumps.iter().map(|s| s.sigma(x)).product()
    }

    /// Probability that a conjunction drawn from the posterior misclassifies
    /// `(x, y)`: `(1 - 2y)(prod sigma - y)`.
    pub fn example_risk(&self, x: &[f64], y: u8) -> f64 {
        example_risk_from_product(self.sigma_product(x), y)
    }

    pub fn empirical_risk(&self, ds: &Dataset) -> f64 {
        if ds.m() == 0 {
            return 0.0;
        }
        let total: f64 = (0..ds.m())
            .map(|i| self.example_risk(ds.row(i), ds.label(i)))
            .sum();
        total / ds.m() as f64
    }

    /// Majority vote: 1 iff `prod sigma > 1/2`.
    pub fn bayes_predict(&self, x: &[f64]) -> u8 {
        (self.sigma_product(x) > 0.5) as u8
    }

    /// The conjunction with every threshold at its interval midpoint.
    pub fn midpoint_conjunction(&self) -> StumpConjunction {
        StumpConjunction {
            stumps: self
                .stumps
                .iter()
                .map(IntervalStump::midpoint_stump)
                .collect(),
        }
    }

    /// Tag line, then one `k d a b` line per stump.
    pub fn to_text(&self) -> String {
        let mut out = format!("{INTERVAL_TAG}\n");
        for s in &self.stumps {
            out.push_str(&format!(
                "{} {} {} {}\n",
                s.attr,
                s.dir,
                fmt_real(s.a),
                fmt_real(s.b)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, StumpError> {
        let rows = parse_block(text, INTERVAL_TAG, 4)?;
        let stumps = rows
            .into_iter()
            .map(|(attr, dir, v)| IntervalStump::new(attr, v[0], v[1], dir))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(stumps)
    }
}

#[inline]
pub fn example_risk_from_product(product: f64, y: u8) -> f64 {
    let y = y as f64;
    (1.0 - 2.0 * y) * (product - y)
}

/// Fraction of examples in `ds` on which `predict` disagrees with the label.
pub fn empirical_risk(predict: impl Fn(&[f64]) -> u8, ds: &Dataset) -> f64 {
    if ds.m() == 0 {
        return 0.0;
    }
    count_errors(predict, ds) as f64 / ds.m() as f64
}

pub fn count_errors(predict: impl Fn(&[f64]) -> u8, ds: &Dataset) -> usize {
    (0..ds.m())
        .filter(|&i| predict(ds.row(i)) != ds.label(i))
        .count()
}

type StumpRow = (usize, Direction, Vec<f64>);

fn parse_block(text: &str, tag: &str, fields: usize) -> Result<Vec<StumpRow>, StumpError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == tag => {}
        Some((_, first)) => {
            return Err(StumpError::Parse {
                line: 1,
                message: format!("expected model tag {tag:?}, found {:?}", first.trim()),
            })
        }
        None => {
            return Err(StumpError::Parse {
                line: 1,
                message: "empty model text".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            break;
        }
        let err = |message: String| StumpError::Parse {
            line: i + 1,
            message,
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != fields {
            return Err(err(format!(
                "expected {fields} fields, found {}",
                parts.len()
            )));
        }
        let attr = parts[0]
            .parse::<usize>()
            .map_err(|_| err(format!("bad attribute index {:?}", parts[0])))?;
        let dir: Direction = parts[1]
            .parse()
            .map_err(|e: StumpError| err(e.to_string()))?;
        let vals = parts[2..]
            .iter()
            .map(|p| {
                p.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("bad number {p:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((attr, dir, vals));
    }
    Ok(rows)
}
