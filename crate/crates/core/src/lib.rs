//! Sparse conjunctions and disjunctions of decision stumps, learned greedily
//! under three regimes (Occam's razor, sample compression, PAC-Bayes), each
//! paired with an exact generalization-risk bound.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] loads, validates and synthesizes labeled datasets.
//! * [`stumps`] evaluates deterministic and interval (soft) stumps, the Gibbs
//!   risk and the Bayes majority vote.
//! * [`bounds`] holds the numeric risk-bound machinery.
//! * [`learners`] implements the greedy learners.
//! * [`modelsel`] runs seeded nested cross-validation.
//! * [`cli`] wires everything into the `stumpsel` command-line tool.

pub mod bounds;
pub mod cli;
pub mod data;
pub mod learners;
pub mod model_io;
pub mod modelsel;
pub mod stumps;

/// Formats a real with 17 significant digits, enough to round-trip every
/// `f64` bit-exactly through its decimal text.
pub fn fmt_real(value: f64) -> String {
    format!("{:.16e}", value)
}
