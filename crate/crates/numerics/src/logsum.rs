//! Log-space accumulation of sums whose terms overflow `f64`.
//!
//! The hitting-time clock of the log-time diffusion backend grows like
//! `exp(7.26 n)`, which leaves the representable range of `f64` after a few
//! dozen events. [`LogAccumulator`] therefore stores `log(Σ term_i)` and adds
//! terms given as logarithms, using the usual `log1p(exp(…))` rearrangement
//! around the running maximum.

/// Running sum of positive terms, stored as a natural logarithm.
///
/// The empty sum is `log 0 = -∞`. Adding a term never decreases the stored
/// value, and values up to `e^1000` and beyond are handled without overflow
/// because only logarithms are ever materialized.
#[derive(Clone, Copy, Debug)]
pub struct LogAccumulator {
    log_value: f64,
}

impl LogAccumulator {
    /// Creates an accumulator holding the empty sum (log value `-∞`).
    pub fn new() -> Self {
        LogAccumulator {
            log_value: f64::NEG_INFINITY,
        }
    }

    /// Creates an accumulator holding a value given by its logarithm.
    pub fn from_log(log_value: f64) -> Self {
        LogAccumulator { log_value }
    }

    /// Adds the positive term `exp(log_term)` to the sum.
    pub fn add_log(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if self.log_value == f64::NEG_INFINITY {
            self.log_value = log_term;
            return;
        }
        // log(e^a + e^b) = max + log1p(exp(-|a - b|))
        let (hi, lo) = if self.log_value >= log_term {
            (self.log_value, log_term)
        } else {
            (log_term, self.log_value)
        };
        self.log_value = hi + (lo - hi).exp().ln_1p();
    }

    /// Natural logarithm of the accumulated sum.
    pub fn log_value(&self) -> f64 {
        self.log_value
    }
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn agrees_with_direct_sum_in_range() {
        let mut acc = LogAccumulator::new();
        let terms: [f64; 5] = [0.5, 1.75, 3.0, 0.001, 42.0];
        for &t in &terms {
            acc.add_log(t.ln());
        }
        let direct: f64 = terms.iter().sum();
        assert_relative_eq!(acc.log_value(), direct.ln(), epsilon = 1e-14);
    }

    #[test]
    fn handles_enormous_terms() {
        // e^1000 + e^999: the exact log is 1000 + log1p(e^{-1}).
        let mut acc = LogAccumulator::new();
        acc.add_log(1000.0);
        acc.add_log(999.0);
        assert_relative_eq!(
            acc.log_value(),
            1000.0 + (-1.0f64).exp().ln_1p(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn wide_magnitude_gap_is_stable() {
        // |a - b| = 700 is representable: exp(-700) > 0 in f64, so the sum
        // must differ from the larger term by exactly log1p(exp(-700)).
        let mut acc = LogAccumulator::new();
        acc.add_log(0.0);
        acc.add_log(700.0);
        assert_relative_eq!(
            acc.log_value(),
            700.0 + (-700.0f64).exp().ln_1p(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn adding_never_decreases() {
        let mut acc = LogAccumulator::new();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..200 {
            acc.add_log(-(i as f64) * 3.5);
            assert!(acc.log_value() >= prev);
            prev = acc.log_value();
        }
    }

    #[test]
    fn empty_sum_is_log_zero() {
        assert_eq!(LogAccumulator::new().log_value(), f64::NEG_INFINITY);
    }
}
