//! Log-domain accumulation.

/// Streaming `ln(sum(exp(x)))` that rescales whenever a new maximum arrives.
///
/// Terms are folded in the order they are pushed, so a fixed push order gives
/// bit-identical results.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x.is_nan() {
            self.max = f64::NAN;
            return;
        }
        if x == f64::NEG_INFINITY || self.max.is_nan() {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max.is_nan() {
            return f64::NAN;
        }
        if self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.max + self.scaled.ln()
    }
}

/// `ln(sum(exp(values)))`; `-inf` for empty input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = LogSum::new();
    for &v in values {
        acc.push(v);
    }
    acc.value()
}

/// Turn log weights into normalized probabilities using a max shift.
/// Returns `None` when every weight is `-inf` or any is NaN.
pub fn normalize_log_weights(log_w: &[f64]) -> Option<Vec<f64>> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() || log_w.iter().any(|w| w.is_nan()) {
        return None;
    }
    let raw: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    Some(raw.into_iter().map(|w| w / total).collect())
}
