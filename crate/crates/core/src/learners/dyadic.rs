use super::LearnError;

/// A threshold named by `bits` bits: element `index` (1-based) of the set
/// of `2^bits` evenly spread points in `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicCode {
    pub bits: u32,
    pub index: u64,
    pub threshold: f64,
}

const MAX_BITS: u32 = 62;

/// Element `index` of the level-`bits` grid:
/// `(1 - f) lo + f hi` with `f = (2 index - 1) / 2^(bits + 1)`.
pub fn dyadic_point(lo: f64, hi: f64, bits: u32, index: u64) -> f64 {
    let f = (2 * index - 1) as f64 / (1u64 << (bits + 1)) as f64;
    (1.0 - f) * lo + f * hi
}

/// Shortest code whose grid intersects `[a, b]`, taking the smallest index
/// at that level. Always uses at most `floor(log2((hi - lo) / (b - a)))`
/// bits.
pub fn dyadic_code(lo: f64, hi: f64, a: f64, b: f64) -> Result<DyadicCode, LearnError> {
    if !(a < b) {
        return Err(LearnError::Dyadic(format!("empty interval [{a}, {b}]")));
    }
    if !(lo < hi) || a < lo || b > hi {
        return Err(LearnError::Dyadic(format!(
            "interval [{a}, {b}] not inside range [{lo}, {hi}]"
        )));
    }
    let f = (a - lo) / (hi - lo);
    for bits in 0..=MAX_BITS {
        let count = 1u64 << bits;
        let scale = (1u64 << (bits + 1)) as f64;
        // smallest j with (2j - 1) / scale >= f, then fix float slop
        let guess = ((f * scale + 1.0) / 2.0).ceil();
        let mut j = if guess.is_finite() {
            guess.max(1.0) as u64
        } else {
            1
        };
        if j > count + 1 {
            j = count + 1;
        }
        while j > 1 && dyadic_point(lo, hi, bits, j - 1) >= a {
            j -= 1;
        }
        while j <= count && dyadic_point(lo, hi, bits, j) < a {
            j += 1;
        }
        if j <= count {
            let t = dyadic_point(lo, hi, bits, j);
            if t <= b {
                return Ok(DyadicCode {
                    bits,
                    index: j,
                    threshold: t,
                });
            }
        }
    }
    Err(LearnError::Dyadic(format!(
        "interval [{a}, {b}] too narrow to code within {MAX_BITS} bits"
    )))
}

/// `floor(log2(range_width / interval_width))`.
pub fn bit_budget(lo: f64, hi: f64, a: f64, b: f64) -> u32 {
    ((hi - lo) / (b - a)).log2().floor().max(0.0) as u32
}
