//! Log-space probability arithmetic.
//!
//! Everything downstream carries probabilities as natural-log values so that
//! quantities like `(1/n!)^k e^{-x^2/2}` stay representable far below the
//! double-precision underflow threshold.

/// log(e^a + e^b) without overflow.
#[inline]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log(1 - e^x) for x <= 0.
///
/// Uses the expm1/ln_1p split at ln(1/2) to keep full precision at both ends.
#[inline]
pub fn log1m_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-(x.exp())).ln_1p()
    }
}

/// log(e^a - e^b) for a >= b.
#[inline]
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b, "log_diff_exp requires a >= b, got {a} < {b}");
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == b {
        return f64::NEG_INFINITY;
    }
    a + log1m_exp(b - a)
}

/// Streaming compensated log-sum-exp accumulator.
///
/// Keeps a running maximum and a Kahan-compensated sum of rescaled terms, so
/// long series (thousands of convolution masses) accumulate with ~1 ulp error
/// instead of O(n) ulps.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAcc {
    max: f64,
    sum: f64,
    comp: f64,
}

impl LogSumAcc {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            if self.max != f64::NEG_INFINITY {
                let scale = (self.max - log_term).exp();
                self.sum = self.sum * scale + 1.0;
                self.comp *= scale;
            } else {
                self.sum = 1.0;
                self.comp = 0.0;
            }
            self.max = log_term;
        } else {
            // Kahan step on exp(log_term - max).
            let y = (log_term - self.max).exp() - self.comp;
            let t = self.sum + y;
            self.comp = (t - self.sum) - y;
            self.sum = t;
        }
    }

    /// log of the accumulated sum.
    pub fn log_value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.max == f64::NEG_INFINITY
    }
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}
