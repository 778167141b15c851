//! Log-domain helpers shared by every module.

use serde::{Deserialize, Serialize};

/// A real value that may be `+∞`, carried explicitly rather than as a large
/// float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }

    /// Lossy view as an `f64` (`+∞` maps to `f64::INFINITY`).
    pub fn as_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => write!(f, "+inf"),
        }
    }
}

/// `log Σ exp(x_i)` with a max shift. Empty input gives `-∞`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(1 - exp(x))` for `x <= 0`.
#[inline]
pub fn log1mexp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Running log-sum-exp. The accumulated sum is kept relative to the largest
/// term seen so far, so no intermediate ever overflows.
#[derive(Debug, Clone, Copy)]
pub struct StreamingLogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for StreamingLogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl StreamingLogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    /// Current `log Σ exp`; `-∞` before the first finite push.
    #[inline]
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }

    /// Largest term pushed so far.
    #[inline]
    pub fn max(&self) -> f64 {
        self.max
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Ordinary least squares `y = a + b t`. Returns `(intercept, slope)`.
pub fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(t.len(), y.len());
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|ti| (ti - tm) * (ti - tm)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(ti, yi)| (ti - tm) * (yi - ym)).sum();
    let slope = sxy / sxx;
    (ym - slope * tm, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_naive() {
        let xs = [0.1, -2.0, 3.5, 1.0];
        let naive: f64 = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((logsumexp(&xs) - naive).abs() < 1e-14);
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn streaming_survives_huge_exponents() {
        let mut acc = StreamingLogSumExp::new();
        for k in 0..1000 {
            acc.push(1e5 - k as f64);
        }
        let expected = 1e5 + (1.0 / (1.0 - (-1.0f64).exp())).ln();
        assert!((acc.value() - expected).abs() < 1e-9);
    }

    #[test]
    fn log1mexp_branches() {
        for &x in &[-1e-10, -0.1, -0.69, -0.7, -5.0, -50.0] {
            let direct = if x < -30.0 { -f64::exp(x) } else { (1.0 - f64::exp(x)).ln() };
            let rel = ((log1mexp(x) - direct) / direct).abs();
            assert!(rel < 1e-6, "x={x}");
        }
    }

    #[test]
    fn linear_fit_recovers_line() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = t.iter().map(|v| 0.5 + 2.0 * v).collect();
        let (a, b) = linear_fit(&t, &y);
        assert!((a - 0.5).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }
}
