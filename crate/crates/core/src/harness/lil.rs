//! Trajectories along the doubly exponential sequences `s_n`.
//!
//! The normalization is the truncated analogue of the LIL scale,
//! `(2 g_P(s_n) log log log(1/s_n))^{-1/2}`, so that the normalized value has
//! variance exactly `1 / (2 log log log(1/s_n))` at any cutoff.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::moments;
use crate::dirichlet::{lil_sequence_range, truncated_variance, Branch, SequencePoint, SequenceStatus, ShiftWeights};
use crate::error::{invalid, Result};
use crate::noise::{NoiseModel, SeedSpec, SeededNoise};
use crate::primes::PrimeTable;

type Points = Vec<SequencePoint<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilConfig {
    pub cutoff: u64,
    pub noise: NoiseModel,
    pub seed: SeedSpec,
    pub gamma: f64,
    pub branch: Branch,
    pub n_first: u64,
    pub n_last: u64,
}

impl LilConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(invalid(format!("cutoff must be >= 2, got {}", self.cutoff)));
        }
        self.noise.validate()?;
        lil_sequence_range::<f64>(self.gamma, self.branch, self.n_first, self.n_first).map(|_| ())?;
        if self.n_last < self.n_first {
            return Err(invalid("n range is empty"));
        }
        Ok(())
    }

    /// Usable points and excluded points, in index order.
    fn usable_points(&self) -> Result<(Points, Points)> {
        self.validate()?;
        let points = lil_sequence_range(self.gamma, self.branch, self.n_first, self.n_last)?;
        Ok(points.into_iter().partition(SequencePoint::usable))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LilEntry {
    pub n: u64,
    pub s: f64,
    pub log_inv_s: f64,
    pub triple_log: f64,
    pub truncated_variance: f64,
    /// `(2 g_P(s_n) log log log(1/s_n))^{-1/2}`.
    pub normalizer: f64,
    pub raw: f64,
    pub normalized: f64,
    pub running_max: f64,
    pub running_min: f64,
    /// Standard deviation of `normalized`, `(2 log log log(1/s_n))^{-1/2}`.
    pub predicted_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPoint {
    pub n: u64,
    pub status: SequenceStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilReport {
    pub gamma: f64,
    pub branch: Branch,
    pub n_first: u64,
    pub n_last: u64,
    pub entries: Vec<LilEntry>,
    pub excluded: Vec<ExcludedPoint>,
    /// Reference line for the normalized values; their limit points fill `[-1, 1]`.
    pub envelope: f64,
    /// Share of normalized values inside `[-envelope, envelope]`. Descriptive only.
    pub fraction_within_envelope: f64,
    /// Largest `|normalizer² · g_P · 2 log log log(1/s_n) - 1|`.
    pub normalization_defect: f64,
    pub extremes_monotone: bool,
}

struct Prepared<'a> {
    points: Vec<SequencePoint<f64>>,
    excluded: Vec<SequencePoint<f64>>,
    variances: Vec<f64>,
    weights: ShiftWeights<'a, f64>,
}

fn prepare<'a>(table: &'a PrimeTable, config: &LilConfig) -> Result<Prepared<'a>> {
    let (points, excluded) = config.usable_points()?;
    let primes = table.up_to(config.cutoff)?;
    let shifts: Vec<f64> = points.iter().map(|p| p.s).collect();
    let variances = shifts
        .iter()
        .map(|&s| truncated_variance(table, s, config.cutoff, config.noise.sigma2))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        points,
        excluded,
        variances,
        weights: ShiftWeights::new(primes, &shifts),
    })
}

fn normalizer(variance: f64, triple_log: f64) -> f64 {
    (2.0 * variance * triple_log).sqrt().recip()
}

/// One realization (the config's seed) evaluated at every usable `s_n`.
pub fn run_lil_trace(table: &PrimeTable, config: &LilConfig) -> Result<LilReport> {
    let prep = prepare(table, config)?;
    let noise = SeededNoise::new(config.seed, config.noise);
    let raws = prep.weights.sums(&noise);

    let mut entries = Vec::with_capacity(prep.points.len());
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut defect = 0.0f64;
    for ((point, &variance), raw) in prep.points.iter().zip(&prep.variances).zip(raws) {
        let triple_log = point.log_inv_s.ln().ln();
        let norm = normalizer(variance, triple_log);
        defect = defect.max((norm * norm * variance * 2.0 * triple_log - 1.0).abs());
        let normalized = norm * raw;
        hi = hi.max(normalized);
        lo = lo.min(normalized);
        entries.push(LilEntry {
            n: point.n,
            s: point.s,
            log_inv_s: point.log_inv_s,
            triple_log,
            truncated_variance: variance,
            normalizer: norm,
            raw,
            normalized,
            running_max: hi,
            running_min: lo,
            predicted_sd: (2.0 * triple_log).sqrt().recip(),
        });
    }
    let envelope = 1.0;
    let within = entries.iter().filter(|e| e.normalized.abs() <= envelope).count();
    let extremes_monotone = entries
        .windows(2)
        .all(|w| w[1].running_max >= w[0].running_max && w[1].running_min <= w[0].running_min);
    Ok(LilReport {
        gamma: config.gamma,
        branch: config.branch,
        n_first: config.n_first,
        n_last: config.n_last,
        fraction_within_envelope: if entries.is_empty() {
            0.0
        } else {
            within as f64 / entries.len() as f64
        },
        entries,
        excluded: prep
            .excluded
            .iter()
            .map(|p| ExcludedPoint { n: p.n, status: p.status })
            .collect(),
        envelope,
        normalization_defect: defect,
        extremes_monotone,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LilVarianceRow {
    pub n: u64,
    pub s: f64,
    pub sample_variance: f64,
    /// `1 / (2 log log log(1/s_n))`.
    pub expected: f64,
    pub standard_error: f64,
    pub deviation_se: f64,
}

/// Sample variance of the normalized value at each `s_n` over `replicas`
/// independent streams (labels `0..replicas` under the config's master seed).
pub fn run_lil_variance(table: &PrimeTable, config: &LilConfig, replicas: usize) -> Result<Vec<LilVarianceRow>> {
    if replicas < 2 {
        return Err(invalid(format!("replicas must be >= 2, got {replicas}")));
    }
    let prep = prepare(table, config)?;
    let scales: Vec<f64> = prep
        .points
        .iter()
        .zip(&prep.variances)
        .map(|(p, &v)| normalizer(v, p.log_inv_s.ln().ln()))
        .collect();
    let samples: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let noise = SeededNoise::new(config.seed.with_label(r), config.noise);
            prep.weights
                .sums(&noise)
                .into_iter()
                .zip(&scales)
                .map(|(x, c)| x * c)
                .collect()
        })
        .collect();
    Ok(prep
        .points
        .iter()
        .enumerate()
        .map(|(j, point)| {
            let column: Vec<f64> = samples.iter().map(|row| row[j]).collect();
            let m = moments(&column);
            let expected = 1.0 / (2.0 * point.log_inv_s.ln().ln());
            LilVarianceRow {
                n: point.n,
                s: point.s,
                sample_variance: m.variance,
                expected,
                standard_error: m.variance_se,
                deviation_se: (m.variance - expected).abs() / m.variance_se,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve_primes;

    fn config() -> LilConfig {
        LilConfig {
            cutoff: 50_000,
            noise: NoiseModel::rademacher(),
            seed: SeedSpec::new(11, 0),
            gamma: 0.5,
            branch: Branch::Minus,
            n_first: 1,
            n_last: 40,
        }
    }

    #[test]
    fn trace_properties() {
        let t = sieve_primes(50_000).unwrap();
        let r = run_lil_trace(&t, &config()).unwrap();
        assert_eq!(r.excluded.len(), 1);
        assert_eq!(r.excluded[0].status, SequenceStatus::OutOfDomain);
        assert_eq!(r.entries.len(), 39);
        assert!(r.extremes_monotone);
        assert!(r.normalization_defect <= 1e-12);
        for e in &r.entries {
            assert!((e.normalizer.powi(2) * e.truncated_variance * 2.0 * e.triple_log - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn underflowed_terms_are_flagged_not_fatal() {
        let t = sieve_primes(50_000).unwrap();
        let cfg = LilConfig {
            branch: Branch::Plus,
            n_first: 2,
            n_last: 12,
            ..config()
        };
        let r = run_lil_trace(&t, &cfg).unwrap();
        assert!(r.excluded.iter().any(|e| e.status == SequenceStatus::Underflow));
        assert!(!r.entries.is_empty());
        assert!(r.entries.iter().all(|e| e.s > 0.0));
    }

    #[test]
    fn replica_variance_is_close_to_prediction() {
        let t = sieve_primes(50_000).unwrap();
        let cfg = LilConfig {
            n_first: 2,
            n_last: 6,
            ..config()
        };
        let rows = run_lil_variance(&t, &cfg, 400).unwrap();
        assert_eq!(rows.len(), 5);
        for row in rows {
            assert!(row.deviation_se <= 4.0, "{row:?}");
        }
    }
}
