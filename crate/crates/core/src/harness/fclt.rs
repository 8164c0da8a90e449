//! Covariance and marginals of the truncated path across replicas.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::normality::{normality_statistic, MIN_SAMPLES};
use super::stats::{covariance_with_se, is_psd, moments};
use super::ExperimentConfig;
use crate::dirichlet::{truncated_covariance, truncated_variance, ShiftWeights};
use crate::error::Result;
use crate::noise::{SeedSpec, SeededNoise};
use crate::primes::PrimeTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub t: f64,
    pub shift: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub oracle_variance: f64,
    /// Absent when there are fewer samples than the statistic needs.
    pub ks_statistic: Option<f64>,
    pub ks_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcltReport {
    pub grid: Vec<f64>,
    pub shifts: Vec<f64>,
    /// Truncated variance at `t = 1`; `normalized = raw / sqrt(normalizer)`.
    pub normalizer: f64,
    pub marginals: Vec<MarginalSummary>,
    pub empirical_covariance: Vec<Vec<f64>>,
    pub oracle_covariance: Vec<Vec<f64>>,
    pub standard_errors: Vec<Vec<f64>>,
    /// `|empirical - oracle| / SE` per entry.
    pub deviation_se: Vec<Vec<f64>>,
    pub oracle_psd: bool,
    pub ks_threshold: f64,
    pub covariance_pass: bool,
    pub normality_pass: bool,
    pub pass: bool,
}

/// Raw replica values: `samples[r][j]` is replica `r` at grid point `j`.
pub fn sample_replicas(table: &PrimeTable, config: &ExperimentConfig) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    config.validate()?;
    let primes = table.up_to(config.cutoff)?;
    let shifts: Vec<f64> = config.grid.iter().map(|&t| config.time_change.shift(t)).collect();
    let weights = ShiftWeights::new(primes, &shifts);
    let samples = (0..config.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let noise = SeededNoise::new(SeedSpec::new(config.master_seed, r), config.noise);
            weights.sums(&noise)
        })
        .collect();
    Ok((shifts, samples))
}

pub fn run_fclt_experiment(table: &PrimeTable, config: &ExperimentConfig) -> Result<FcltReport> {
    let (shifts, samples) = sample_replicas(table, config)?;
    let m = config.grid.len();
    let columns: Vec<Vec<f64>> = (0..m).map(|j| samples.iter().map(|row| row[j]).collect()).collect();
    let sigma2 = config.noise.sigma2;

    let mut oracle = vec![vec![0.0; m]; m];
    let mut empirical = vec![vec![0.0; m]; m];
    let mut se = vec![vec![0.0; m]; m];
    let mut deviation = vec![vec![0.0; m]; m];
    let mut covariance_pass = true;
    for i in 0..m {
        for j in i..m {
            let exact = sigma2 * truncated_covariance(table, config.time_change, config.grid[i], config.grid[j], config.cutoff)?;
            let (cov, err) = covariance_with_se(&columns[i], &columns[j]);
            let dev = if err > 0.0 {
                (cov - exact).abs() / err
            } else if cov == exact {
                0.0
            } else {
                f64::INFINITY
            };
            if !(dev <= config.tolerance_se) {
                covariance_pass = false;
            }
            for (a, b) in [(i, j), (j, i)] {
                oracle[a][b] = exact;
                empirical[a][b] = cov;
                se[a][b] = err;
                deviation[a][b] = dev;
            }
        }
    }

    let ks_threshold = config.ks_threshold();
    let mut normality_pass = true;
    let mut marginals = Vec::with_capacity(m);
    for j in 0..m {
        let mo = moments(&columns[j]);
        let ks = if columns[j].len() >= MIN_SAMPLES {
            Some(normality_statistic(&columns[j])?)
        } else {
            None
        };
        let ks_pass = ks.is_none_or(|d| d <= ks_threshold);
        normality_pass &= ks_pass;
        marginals.push(MarginalSummary {
            t: config.grid[j],
            shift: shifts[j],
            mean: mo.mean,
            variance: mo.variance,
            skewness: mo.skewness,
            excess_kurtosis: mo.excess_kurtosis,
            oracle_variance: oracle[j][j],
            ks_statistic: ks,
            ks_pass,
        });
    }

    let normalizer = truncated_variance(table, config.time_change.shift(1.0), config.cutoff, sigma2)?;
    let oracle_psd = is_psd(&oracle, 1e-12);
    Ok(FcltReport {
        grid: config.grid.clone(),
        shifts,
        normalizer,
        marginals,
        empirical_covariance: empirical,
        oracle_covariance: oracle,
        standard_errors: se,
        deviation_se: deviation,
        oracle_psd,
        ks_threshold,
        covariance_pass,
        normality_pass,
        pass: covariance_pass && normality_pass && oracle_psd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::TimeChange;
    use crate::noise::NoiseModel;
    use crate::primes::sieve_primes;

    fn small_config(noise: NoiseModel) -> ExperimentConfig {
        ExperimentConfig {
            replicas: 600,
            cutoff: 20_000,
            time_change: TimeChange::Power { base: 1e-3 },
            grid: vec![0.0, 0.5, 1.0],
            noise,
            master_seed: 99,
            tolerance_se: 4.0,
            ks_coefficient: 1.95,
        }
    }

    #[test]
    fn small_experiment_passes_and_is_deterministic() {
        let table = sieve_primes(20_000).unwrap();
        let cfg = small_config(NoiseModel::gaussian(2.0).unwrap());
        let a = run_fclt_experiment(&table, &cfg).unwrap();
        assert!(a.covariance_pass, "{:?}", a.deviation_se);
        assert!(a.normality_pass, "{:?}", a.marginals);
        assert!(a.oracle_psd);
        for j in 0..3 {
            let v = truncated_variance(&table, a.shifts[j], 20_000, 2.0).unwrap();
            assert!((a.oracle_covariance[j][j] / v - 1.0).abs() < 1e-14);
            for i in 0..3 {
                assert_eq!(a.oracle_covariance[i][j], a.oracle_covariance[j][i]);
                assert_eq!(a.empirical_covariance[i][j], a.empirical_covariance[j][i]);
            }
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_fclt_experiment(&table, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn duplicated_grid_point_gives_rank_one_block() {
        let table = sieve_primes(5_000).unwrap();
        let mut cfg = small_config(NoiseModel::rademacher());
        cfg.cutoff = 5_000;
        cfg.grid = vec![0.7, 0.7];
        let r = run_fclt_experiment(&table, &cfg).unwrap();
        let c = &r.empirical_covariance;
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        assert!(det.abs() <= 1e-12 * c[0][0] * c[1][1]);
    }

    #[test]
    fn rejects_bad_config() {
        let table = sieve_primes(5_000).unwrap();
        let mut cfg = small_config(NoiseModel::rademacher());
        cfg.replicas = 1;
        assert!(run_fclt_experiment(&table, &cfg).is_err());
        let mut cfg = small_config(NoiseModel::rademacher());
        cfg.grid = vec![1.0, 0.5];
        assert!(run_fclt_experiment(&table, &cfg).is_err());
        let mut cfg = small_config(NoiseModel::rademacher());
        cfg.cutoff = 6_000;
        assert!(run_fclt_experiment(&table, &cfg).is_err());
    }
}
