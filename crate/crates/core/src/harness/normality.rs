//! Kolmogorov–Smirnov distance to the standard normal law.

use statrs::function::erf::erfc;

use super::stats::moments;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 30;

pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Supremum distance between the empirical CDF of the standardized sample
/// (sample mean and standard deviation) and `Φ`.
///
/// A sample with zero spread is standardized to all zeros, which puts the
/// distance at exactly `1/2`.
pub fn normality_statistic(samples: &[f64]) -> Result<f64> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: MIN_SAMPLES,
        });
    }
    let m = moments(samples);
    let sd = m.variance.sqrt();
    let mut z: Vec<f64> = if sd > 0.0 {
        samples.iter().map(|x| (x - m.mean) / sd).collect()
    } else {
        vec![0.0; samples.len()]
    };
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let mut d = 0.0f64;
    for (i, &zi) in z.iter().enumerate() {
        let cdf = standard_normal_cdf(zi);
        d = d.max((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n);
    }
    Ok(d)
}
