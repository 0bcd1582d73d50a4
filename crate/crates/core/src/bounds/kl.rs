use super::binomial::bisect_decreasing;
use super::BoundError;

/// `kl(q || p) = q ln(q/p) + (1-q) ln((1-q)/(1-p))` with `0 ln 0 = 0`.
pub fn kl_bernoulli(q: f64, p: f64) -> Result<f64, BoundError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(BoundError::InvalidProbability(q));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(BoundError::InvalidProbability(p));
    }
    let v = kl_unchecked(q, p);
    if v.is_infinite() {
        return Err(BoundError::InfiniteKl { q, p });
    }
    Ok(v)
}

pub(crate) fn kl_unchecked(q: f64, p: f64) -> f64 {
    let pos = if q == 0.0 {
        0.0
    } else if p == 0.0 {
        return f64::INFINITY;
    } else {
        q * (q / p).ln()
    };
    let neg = if q == 1.0 {
        0.0
    } else if p == 1.0 {
        return f64::INFINITY;
    } else {
        (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln()
    };
    (pos + neg).max(0.0)
}

/// `sup { e : kl(q || e) <= psi }` over `e in [q, 1]`.
///
/// `kl(q || .)` increases on `[q, 1)`; bisection stops at adjacent floats and
/// returns the upper end, so `kl(q || result) >= psi`.
pub fn kl_sup_inversion(q: f64, psi: f64) -> Result<f64, BoundError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(BoundError::InvalidProbability(q));
    }
    if !(psi >= 0.0) {
        return Err(BoundError::InvalidCount(format!(
            "psi must be nonnegative, got {psi}"
        )));
    }
    if psi == 0.0 || q == 1.0 {
        return Ok(q);
    }
    if psi.is_infinite() {
        return Ok(1.0);
    }
    // bisect_decreasing wants a nonincreasing function
    Ok(bisect_decreasing(|e| -kl_unchecked(q, e), -psi, q, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl_examples() {
        for q in [0.0, 0.2, 0.5, 0.9] {
            if q > 0.0 {
                assert_eq!(kl_bernoulli(q, q).unwrap(), 0.0);
            }
        }
        assert!((kl_bernoulli(0.0, 0.3).unwrap() - (1.0f64 / 0.7).ln()).abs() < 1e-15);
        // direct evaluation: 0.1 ln 0.2 + 0.9 ln 1.8
        let oracle = 0.1 * (0.1f64 / 0.5).ln() + 0.9 * (0.9f64 / 0.5).ln();
        assert!((kl_bernoulli(0.1, 0.5).unwrap() - oracle).abs() < 1e-15);
        assert!((kl_bernoulli(0.1, 0.5).unwrap() - 0.368064).abs() < 1e-6);
    }

    #[test]
    fn kl_endpoint_conventions() {
        assert_eq!(kl_bernoulli(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(kl_bernoulli(1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            kl_bernoulli(0.5, 0.0),
            Err(BoundError::InfiniteKl { .. })
        ));
        assert!(matches!(
            kl_bernoulli(0.5, 1.0),
            Err(BoundError::InfiniteKl { .. })
        ));
        assert!(kl_bernoulli(1.2, 0.5).is_err());
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(kl_sup_inversion(0.3, 0.0).unwrap(), 0.3);
        let e = kl_sup_inversion(0.0, 0.1).unwrap();
        assert!((e - (1.0 - (-0.1f64).exp())).abs() < 1e-12);
        assert!((e - 0.09516).abs() < 1e-5);
        for &(q, psi) in &[(0.05, 0.3555), (0.3, 0.01), (0.0, 2.0), (0.7, 0.2)] {
            let e = kl_sup_inversion(q, psi).unwrap();
            assert!(e < 1.0);
            assert!((kl_bernoulli(q, e).unwrap() - psi).abs() < 1e-8);
        }
        assert_eq!(kl_sup_inversion(1.0, 0.5).unwrap(), 1.0);
    }
}
