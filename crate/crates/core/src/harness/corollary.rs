//! Log of the Euler product corrected by `±½ log ζ(1+2s)`, against the prime
//! sum plus remainder.
//!
//! For each `s` and seed the experiment reports
//!
//! * the closure defect of the bookkeeping identity
//!   `log Π + σ½ log ζ = Σ x_p + R + σ½(log ζ − Σ_{p<=P} p^{-1-2s})`, which
//!   holds to rounding at any cutoff, and
//! * the bounded discrepancy track
//!   `log Π + σ½ log ζ − Σ x_p − R − σ½·tail(P, s)`, where the tail is the
//!   density estimate `E1(2 s log P)` of `Σ_{p>P} p^{-1-2s}`. What remains
//!   is `σ½` times the prime-power part of `log ζ` plus the error of the tail
//!   estimate, which stays bounded as `s → 0`.
//!
//! `σ = +1` for square-free (`k = 2`) and `σ = −1` for `k >= 3`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::multiplicative::{log_decomposition, zeta_sign, DecompositionReport};
use crate::noise::SeedSpec;
use crate::primes::PrimeTable;
use crate::special::{exp_integral_e1, zeta_one_plus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRow {
    pub stream_label: u64,
    pub decomposition: DecompositionReport<f64>,
    pub log_zeta: f64,
    pub tail_estimate: f64,
    pub bookkeeping: f64,
    pub closure_defect: f64,
    pub discrepancy: f64,
    /// Same track with the sign of the ζ correction flipped.
    pub opposite_sign_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub k: u32,
    pub sign: i8,
    pub cutoff: u64,
    pub rows: Vec<CorollaryRow>,
    pub max_closure_defect: f64,
    pub max_abs_discrepancy: f64,
    pub discrepancy_bound: f64,
    pub closure_pass: bool,
    pub bounded_pass: bool,
    pub pass: bool,
}

pub const CLOSURE_TOLERANCE: f64 = 1e-10;

/// Runs streams `0..seeds` of `seed.master_seed` over every `s` in the grid.
pub fn run_corollary_experiment(
    table: &PrimeTable,
    seed: SeedSpec,
    seeds: u64,
    s_grid: &[f64],
    cutoff: u64,
    k: u32,
    discrepancy_bound: f64,
) -> Result<CorollaryReport> {
    if s_grid.is_empty() || seeds == 0 {
        return Err(invalid("need at least one shift and one seed"));
    }
    if s_grid.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(invalid("shifts must be finite and > 0"));
    }
    let sign = f64::from(zeta_sign(k));
    let ln_cutoff = (cutoff as f64).ln();
    let mut rows = Vec::with_capacity(s_grid.len() * seeds as usize);
    for &s in s_grid {
        let log_zeta = zeta_one_plus(2.0 * s)?.ln();
        let tail_estimate = exp_integral_e1(2.0 * s * ln_cutoff)?;
        for label in 0..seeds {
            let d = log_decomposition(table, seed.with_label(label), s, cutoff, k)?;
            let lhs = d.log_product + sign * 0.5 * log_zeta;
            let rhs = d.prime_sum + d.remainder;
            let bookkeeping = sign * 0.5 * (log_zeta - 2.0 * d.half_variance_sum);
            let opposite = d.log_product - sign * 0.5 * log_zeta - rhs + sign * 0.5 * tail_estimate;
            rows.push(CorollaryRow {
                stream_label: label,
                log_zeta,
                tail_estimate,
                bookkeeping,
                closure_defect: (lhs - rhs - bookkeeping).abs(),
                discrepancy: lhs - rhs - sign * 0.5 * tail_estimate,
                opposite_sign_discrepancy: opposite,
                decomposition: d,
            });
        }
    }
    let max_closure_defect = rows.iter().map(|r| r.closure_defect).fold(0.0, f64::max);
    let max_abs_discrepancy = rows.iter().map(|r| r.discrepancy.abs()).fold(0.0, f64::max);
    let closure_pass = max_closure_defect <= CLOSURE_TOLERANCE;
    let bounded_pass = max_abs_discrepancy <= discrepancy_bound;
    Ok(CorollaryReport {
        k,
        sign: zeta_sign(k),
        cutoff,
        rows,
        max_closure_defect,
        max_abs_discrepancy,
        discrepancy_bound,
        closure_pass,
        bounded_pass,
        pass: closure_pass && bounded_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve_primes;
    use crate::special::zeta_series;

    #[test]
    fn bookkeeping_closes_at_half() {
        let t = sieve_primes(10_000).unwrap();
        let r = run_corollary_experiment(&t, SeedSpec::new(5, 0), 3, &[0.5], 10_000, 2, 1.0).unwrap();
        assert!(r.closure_pass);
        let half_log_zeta2 = 0.5 * zeta_series(2.0f64).unwrap().ln();
        for row in &r.rows {
            let d = &row.decomposition;
            let lhs = d.log_product + half_log_zeta2 - d.prime_sum - d.remainder;
            assert!((lhs - (half_log_zeta2 - d.half_variance_sum)).abs() <= 1e-10);
        }
    }

    #[test]
    fn discrepancy_bounded_over_grid_and_sign_matters() {
        let t = sieve_primes(100_000).unwrap();
        let grid = [1e-3, 3e-3, 1e-2, 0.03, 0.1, 0.3, 0.5];
        for k in [2u32, 3] {
            let r = run_corollary_experiment(&t, SeedSpec::new(8, 0), 10, &grid, 100_000, k, 1.0).unwrap();
            assert!(r.pass, "k={k}: {} {}", r.max_closure_defect, r.max_abs_discrepancy);
            let worst_opposite = r
                .rows
                .iter()
                .map(|row| row.opposite_sign_discrepancy.abs())
                .fold(0.0, f64::max);
            assert!(worst_opposite > 2.0, "k={k}: {worst_opposite}");
        }
    }

    #[test]
    fn rejects_empty_inputs() {
        let t = sieve_primes(1000).unwrap();
        assert!(run_corollary_experiment(&t, SeedSpec::new(1, 0), 0, &[0.5], 1000, 2, 1.0).is_err());
        assert!(run_corollary_experiment(&t, SeedSpec::new(1, 0), 1, &[], 1000, 2, 1.0).is_err());
        assert!(run_corollary_experiment(&t, SeedSpec::new(1, 0), 1, &[0.0], 1000, 2, 1.0).is_err());
    }
}
