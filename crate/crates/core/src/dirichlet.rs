//! Random Dirichlet series over primes, `X(s) = Σ_p η_p p^{-1/2-s}`.
//!
//! Everything here works at a finite cutoff `P`: the random series is the
//! truncated sum over `p <= P`, and its variance and covariances are the
//! exact truncated sums. The analytic variance evaluator [`g_hybrid`] adds a
//! density-based estimate of the tail beyond `P`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::noise::{NoiseModel, Realization, SeedSpec, SeededNoise};
use crate::primes::PrimeTable;
use crate::scalar::Scalar;
use crate::special::exp_integral_e1;
use crate::summation::Compensated;

/// Primes per chunk in parallel sums. Chunk partials are merged in ascending
/// order, so results do not depend on the number of threads.
const CHUNK: usize = 1 << 16;

/// Compensated `Σ term(p)` over the given primes, ascending.
pub fn sum_over_primes<T, F>(primes: &[u32], term: F) -> T
where
    T: Scalar,
    F: Fn(u32) -> T + Sync,
{
    if primes.len() <= CHUNK {
        let mut acc = Compensated::new();
        for &p in primes {
            acc.add(term(p));
        }
        return acc.value();
    }
    let partials: Vec<Compensated<T>> = primes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Compensated::new();
            for &p in chunk {
                acc.add(term(p));
            }
            acc
        })
        .collect();
    let mut total = Compensated::new();
    for part in &partials {
        total.merge(part);
    }
    total.value()
}

/// `p^{-exponent}`.
#[inline]
pub fn prime_power<T: Scalar>(p: u32, exponent: T) -> T {
    (-exponent * T::from_u32(p).unwrap().ln()).exp()
}

/// Evaluation request for one realization of the truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesQuery<T> {
    pub s: T,
    pub cutoff: u64,
    pub seed: SeedSpec,
    pub model: NoiseModel,
}

impl<T: Scalar> SeriesQuery<T> {
    pub fn validate(&self) -> Result<()> {
        check_positive_shift(self.s)?;
        check_cutoff(self.cutoff)?;
        self.model.validate()
    }
}

fn check_positive_shift<T: Scalar>(s: T) -> Result<()> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(invalid(format!("shift s must be finite and > 0, got {s}")));
    }
    Ok(())
}

fn check_cutoff(cutoff: u64) -> Result<()> {
    if cutoff < 2 {
        return Err(invalid(format!("cutoff must be >= 2, got {cutoff}")));
    }
    Ok(())
}

/// Time change mapping a grid time `t >= 0` to a Dirichlet shift.
///
/// `Power { base }` is `t -> base^t`; `Exponential { scale }` is
/// `t -> exp(-t * scale)`. Both are evaluated as `exp(-t * scale)`, with
/// `scale = ln(1/base)` in power mode, so the two modes agree exactly when
/// `scale = ln(1/base)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TimeChange<T> {
    Power { base: T },
    Exponential { scale: T },
}

impl<T: Scalar> TimeChange<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeChange::Power { base } => {
                if !(base > T::zero() && base < T::one()) {
                    return Err(invalid(format!("power-mode base must lie in (0,1), got {base}")));
                }
            }
            TimeChange::Exponential { scale } => {
                if !(scale > T::zero()) || !scale.is_finite() {
                    return Err(invalid(format!("exponential-mode scale must be > 0, got {scale}")));
                }
            }
        }
        Ok(())
    }

    /// The rate `S` in `shift(t) = exp(-t S)`.
    pub fn rate(&self) -> T {
        match *self {
            TimeChange::Power { base } => -base.ln(),
            TimeChange::Exponential { scale } => scale,
        }
    }

    #[inline]
    pub fn shift(&self, t: T) -> T {
        (-t * self.rate()).exp()
    }
}

/// Validates a time grid: nonempty, finite, `>= 0`, non-decreasing.
pub fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if grid.iter().any(|&t| !(t >= T::zero()) || !t.is_finite()) {
        return Err(invalid("time grid values must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("time grid must be ascending"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathQuery<T> {
    pub mode: TimeChange<T>,
    pub grid: Vec<T>,
    pub cutoff: u64,
    pub seed: SeedSpec,
    pub model: NoiseModel,
}

/// One grid point of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint<T> {
    pub t: T,
    pub shift: T,
    pub raw: T,
    pub normalized: T,
}

/// Variance of the series at one shift: exact truncated part, tail estimate
/// beyond the cutoff, and the `σ² log(1/s)` asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBreakdown<T> {
    pub partial: T,
    pub tail_estimate: T,
    pub total: T,
    pub asymptote: T,
    pub ratio: T,
}

/// `Σ_{p<=P} η_p p^{-1/2-s}` for an arbitrary coefficient source.
pub fn partial_series_with<T, R>(table: &PrimeTable, s: T, cutoff: u64, eta: &R) -> Result<T>
where
    T: Scalar,
    R: Realization + Sync,
{
    check_positive_shift(s)?;
    check_cutoff(cutoff)?;
    let primes = table.up_to(cutoff)?;
    let exponent = T::lit(0.5) + s;
    Ok(sum_over_primes(primes, |p| {
        T::lit(eta.eta(u64::from(p))) * prime_power(p, exponent)
    }))
}

/// Truncated realization `X_P(s)` for the query's seed and noise law.
pub fn partial_series<T: Scalar>(table: &PrimeTable, q: &SeriesQuery<T>) -> Result<T> {
    q.validate()?;
    let noise = SeededNoise::new(q.seed, q.model);
    partial_series_with(table, q.s, q.cutoff, &noise)
}

/// `σ² Σ_{p<=P} p^{-1-2s}`; `s = 0` is accepted.
pub fn truncated_variance<T: Scalar>(table: &PrimeTable, s: T, cutoff: u64, sigma2: T) -> Result<T> {
    check_cutoff(cutoff)?;
    if !(s >= T::zero()) || !s.is_finite() {
        return Err(invalid(format!("shift s must be finite and >= 0, got {s}")));
    }
    if !(sigma2 >= T::zero()) {
        return Err(invalid(format!("sigma2 must be >= 0, got {sigma2}")));
    }
    let primes = table.up_to(cutoff)?;
    let exponent = T::one() + s + s;
    let sum: T = sum_over_primes(primes, |p| prime_power(p, exponent));
    Ok(sigma2 * sum)
}

/// Truncated variance plus the tail `σ² E1(2 s log P)`, compared with the
/// asymptote `σ² log(1/s)`.
pub fn g_hybrid<T: Scalar>(table: &PrimeTable, s: T, cutoff: u64, sigma2: T) -> Result<VarianceBreakdown<T>> {
    if !(s > T::zero() && s < (-T::one()).exp()) {
        return Err(invalid(format!("g_hybrid requires 0 < s < 1/e, got {s}")));
    }
    if cutoff < 100 {
        return Err(invalid(format!("g_hybrid requires cutoff >= 100, got {cutoff}")));
    }
    if !(sigma2 > T::zero()) {
        return Err(invalid(format!("sigma2 must be > 0, got {sigma2}")));
    }
    let partial = truncated_variance(table, s, cutoff, sigma2)?;
    let tail_estimate = sigma2 * exp_integral_e1(T::lit(2.0) * s * T::from_index(cutoff).ln())?;
    let total = partial + tail_estimate;
    let asymptote = sigma2 * (T::one() / s).ln();
    Ok(VarianceBreakdown {
        partial,
        tail_estimate,
        total,
        asymptote,
        ratio: total / asymptote,
    })
}

/// `Σ_{p<=P} p^{-1-shift(t1)-shift(t2)}`, the covariance of the truncated
/// path at two grid times under any unit-variance law.
pub fn truncated_covariance<T: Scalar>(
    table: &PrimeTable,
    mode: TimeChange<T>,
    t1: T,
    t2: T,
    cutoff: u64,
) -> Result<T> {
    mode.validate()?;
    check_grid(&[t1])?;
    check_grid(&[t2])?;
    check_cutoff(cutoff)?;
    let primes = table.up_to(cutoff)?;
    let exponent = T::one() + mode.shift(t1) + mode.shift(t2);
    Ok(sum_over_primes(primes, |p| prime_power(p, exponent)))
}

/// Precomputed weights `p^{-1/2-a_j}` for a fixed set of shifts, shared by
/// every realization evaluated at those shifts.
#[derive(Debug, Clone)]
pub struct ShiftWeights<'a, T> {
    primes: &'a [u32],
    weights: Vec<Vec<T>>,
}

impl<'a, T: Scalar> ShiftWeights<'a, T> {
    pub fn new(primes: &'a [u32], shifts: &[T]) -> Self {
        let weights = shifts
            .iter()
            .map(|&a| {
                let exponent = T::lit(0.5) + a;
                primes.par_iter().map(|&p| prime_power(p, exponent)).collect()
            })
            .collect();
        Self { primes, weights }
    }

    pub fn primes(&self) -> &[u32] {
        self.primes
    }

    /// `Σ_p η_p w_j(p)` for every shift `j`, sequentially in ascending `p`.
    pub fn sums<R: Realization>(&self, eta: &R) -> Vec<T> {
        let mut acc = vec![Compensated::<T>::new(); self.weights.len()];
        for (i, &p) in self.primes.iter().enumerate() {
            let e = T::lit(eta.eta(u64::from(p)));
            for (a, w) in acc.iter_mut().zip(&self.weights) {
                a.add(e * w[i]);
            }
        }
        acc.iter().map(Compensated::value).collect()
    }
}

/// One realization along the time grid, normalized by the square root of
/// the truncated variance at `t = 1`. All grid points share the same `η_p`.
pub fn path_sample<T: Scalar>(table: &PrimeTable, pq: &PathQuery<T>) -> Result<Vec<PathPoint<T>>> {
    pq.mode.validate()?;
    check_grid(&pq.grid)?;
    check_cutoff(pq.cutoff)?;
    pq.model.validate()?;
    let shifts: Vec<T> = pq.grid.iter().map(|&t| pq.mode.shift(t)).collect();
    if let Some(&a) = shifts.iter().find(|&&a| !(a > T::zero())) {
        return Err(invalid(format!("grid produces a non-positive shift {a}")));
    }
    let primes = table.up_to(pq.cutoff)?;
    let sigma2 = T::lit(pq.model.sigma2);
    let normalizer = truncated_variance(table, pq.mode.shift(T::one()), pq.cutoff, sigma2)?;
    let scale = normalizer.sqrt();
    let noise = SeededNoise::new(pq.seed, pq.model);
    let raw = ShiftWeights::new(primes, &shifts).sums(&noise);
    Ok(pq
        .grid
        .iter()
        .zip(&shifts)
        .zip(raw)
        .map(|((&t, &shift), raw)| PathPoint {
            t,
            shift,
            raw,
            normalized: raw / scale,
        })
        .collect())
}

/// `(2 σ² log(1/s) log log log(1/s))^{-1/2}` for `0 < s < e^{-e}`.
pub fn lil_normalizer<T: Scalar>(s: T, sigma2: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(domain(format!("LIL normalizer requires s > 0, got {s}")));
    }
    lil_normalizer_from_log((T::one() / s).ln(), sigma2)
}

/// Same as [`lil_normalizer`], taking `log(1/s)` directly.
pub fn lil_normalizer_from_log<T: Scalar>(log_inv_s: T, sigma2: T) -> Result<T> {
    let triple = log_inv_s.ln().ln();
    if !(triple > T::zero()) || !triple.is_finite() {
        return Err(domain(format!(
            "LIL normalizer requires 0 < s < e^(-e); log(1/s) = {log_inv_s}"
        )));
    }
    if !(sigma2 > T::zero()) {
        return Err(invalid(format!("sigma2 must be > 0, got {sigma2}")));
    }
    Ok((T::lit(2.0) * sigma2 * log_inv_s * triple).sqrt().recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `s_n = exp(-exp(n^{1-γ}))`
    Minus,
    /// `s_n = exp(-exp(n^{1+γ}))`
    Plus,
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(Branch::Minus),
            "plus" => Ok(Branch::Plus),
            other => Err(invalid(format!("branch must be 'minus' or 'plus', got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceStatus {
    Ok,
    /// `s_n` is zero or subnormal in the working precision.
    Underflow,
    /// `s_n >= e^{-e}`, outside the range where the LIL normalizer exists.
    OutOfDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequencePoint<T> {
    pub n: u64,
    pub s: T,
    /// `log(1/s_n) = exp(n^{1±γ})`, exact even when `s_n` underflows.
    pub log_inv_s: T,
    pub status: SequenceStatus,
}

impl<T> SequencePoint<T> {
    pub fn usable(&self) -> bool {
        self.status == SequenceStatus::Ok
    }
}

/// First `n_max` terms of `s_n = exp(-exp(n^{1∓γ}))`.
pub fn lil_sequence<T: Scalar>(gamma: T, branch: Branch, n_max: u64) -> Result<Vec<SequencePoint<T>>> {
    lil_sequence_range(gamma, branch, 1, n_max)
}

/// Terms `n_first..=n_last` of the sequence.
pub fn lil_sequence_range<T: Scalar>(
    gamma: T,
    branch: Branch,
    n_first: u64,
    n_last: u64,
) -> Result<Vec<SequencePoint<T>>> {
    match branch {
        Branch::Minus if !(gamma > T::zero() && gamma < T::one()) => {
            return Err(invalid(format!("minus branch requires 0 < γ < 1, got {gamma}")))
        }
        Branch::Plus if !(gamma > T::zero()) || !gamma.is_finite() => {
            return Err(invalid(format!("plus branch requires γ > 0, got {gamma}")))
        }
        _ => {}
    }
    if n_first < 1 || n_last < n_first {
        return Err(invalid(format!("sequence range must satisfy 1 <= first <= last, got {n_first}..{n_last}")));
    }
    let power = match branch {
        Branch::Minus => T::one() - gamma,
        Branch::Plus => T::one() + gamma,
    };
    let e = T::one().exp();
    Ok((n_first..=n_last)
        .map(|n| {
            let log_inv_s = T::from_index(n).powf(power).exp();
            let s = (-log_inv_s).exp();
            let status = if s < T::min_positive_value() {
                SequenceStatus::Underflow
            } else if log_inv_s <= e {
                SequenceStatus::OutOfDomain
            } else {
                SequenceStatus::Ok
            };
            SequencePoint {
                n,
                s,
                log_inv_s,
                status,
            }
        })
        .collect())
}

/// `T*(x) = Σ_{p<=x} η_p`.
pub fn prime_walk<T: Scalar>(table: &PrimeTable, seed: SeedSpec, model: &NoiseModel, x: f64) -> Result<T> {
    let count = table.prime_count(x)?;
    let noise = SeededNoise::new(seed, *model);
    Ok(sum_over_primes(&table.primes()[..count], |p| T::lit(noise.eta(u64::from(p)))))
}
