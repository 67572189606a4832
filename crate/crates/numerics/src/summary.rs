//! Small sample-summary helpers shared by the estimator crates.

/// Mean and standard error of a sample, reduced in the order given
/// (callers that need bit-reproducible parallel runs sort or index their
/// replica outputs before calling).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanStderr {
    pub fn from_samples(samples: &[f64]) -> MeanStderr {
        let n = samples.len();
        assert!(n > 0, "empty sample");
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return MeanStderr {
                mean,
                stderr: f64::INFINITY,
                n,
            };
        }
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        MeanStderr {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }

    /// Standard error for autocorrelated series: batch means over `batches`
    /// equal chunks (the remainder is dropped).
    pub fn from_correlated_series(series: &[f64], batches: usize) -> MeanStderr {
        assert!(batches >= 2 && series.len() >= 2 * batches);
        let chunk = series.len() / batches;
        let means: Vec<f64> = (0..batches)
            .map(|b| series[b * chunk..(b + 1) * chunk].iter().sum::<f64>() / chunk as f64)
            .collect();
        let mut s = MeanStderr::from_samples(&means);
        s.n = series.len();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_hand_computation() {
        let s = MeanStderr::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        // var = (2.25+0.25+0.25+2.25)/3 = 5/3; se = sqrt(5/12)
        assert!((s.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.n, 4);
    }

    #[test]
    fn batch_means_widen_errors_for_correlated_series() {
        // A slowly varying series: consecutive values nearly identical, so
        // the naive iid stderr is far too small. Batch means must exceed it.
        let series: Vec<f64> = (0..10_000)
            .map(|i| ((i / 500) % 2) as f64) // long blocks of 0s and 1s
            .collect();
        let naive = MeanStderr::from_samples(&series);
        let batched = MeanStderr::from_correlated_series(&series, 20);
        assert!(batched.stderr > 5.0 * naive.stderr);
        assert_eq!(batched.mean, naive.mean);
    }
}
