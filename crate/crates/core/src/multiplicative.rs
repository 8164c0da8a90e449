//! Rademacher and k-free random multiplicative functions.
//!
//! `f(p)` is a Rademacher sign per prime; `f(n) = Π f(p)^{e_p}` when every
//! exponent `e_p < k` and `f(n) = 0` otherwise. `k = 2` is the square-free
//! case.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{prime_power, sum_over_primes};
use crate::error::{invalid, Error, Result};
use crate::noise::{Realization, SeedSpec, SeededSigns};
use crate::primes::{enumerate_smooth_kfree, PrimeTable};
use crate::scalar::Scalar;
use crate::summation::Compensated;

/// Largest `n` written by [`MultTable::write_csv`].
pub const CSV_EXPORT_LIMIT: u64 = 10_000;

/// `√2 / (√2 − 1)`, the constant in the bound on the cubic-and-higher remainder.
pub const REMAINDER_BOUND_CONSTANT: f64 = std::f64::consts::SQRT_2 / (std::f64::consts::SQRT_2 - 1.0);

/// `f(n)` for `n <= bound`, with the smallest-prime-factor table used to build it.
#[derive(Debug, Clone)]
pub struct MultTable {
    bound: u64,
    k: u32,
    seed: SeedSpec,
    values: Vec<i8>,
    spf: Vec<u32>,
}

impl MultTable {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> SeedSpec {
        self.seed
    }

    /// `f(n)`; `n` must lie in `1..=bound`.
    pub fn value(&self, n: u64) -> Result<i8> {
        if n == 0 || n > self.bound {
            return Err(Error::OutOfRange {
                what: "n",
                value: n as f64,
                limit: self.bound,
            });
        }
        Ok(self.values[n as usize])
    }

    /// Values indexed by `n`; index 0 is unused.
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Smallest prime factor of `n >= 2`.
    pub fn smallest_prime_factor(&self, n: u64) -> Option<u32> {
        (n >= 2 && n <= self.bound).then(|| self.spf[n as usize])
    }

    /// Writes `n,f` rows for `n <= min(bound, CSV_EXPORT_LIMIT)`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,f")?;
        for n in 1..=self.bound.min(CSV_EXPORT_LIMIT) {
            writeln!(out, "{n},{}", self.values[n as usize])?;
        }
        Ok(())
    }
}

/// Builds `f(n)` for `n <= bound` by factoring through a linear
/// smallest-prime-factor sieve.
pub fn sieve_multiplicative(seed: SeedSpec, bound: u64, k: u32) -> Result<MultTable> {
    if bound == 0 {
        return Err(invalid("table bound must be >= 1"));
    }
    if k < 2 {
        return Err(invalid(format!("freeness order k must be >= 2, got {k}")));
    }
    if bound > u64::from(u32::MAX) {
        return Err(invalid(format!("table bound {bound} exceeds {}", u32::MAX)));
    }
    let n_max = bound as usize;
    let mut spf = vec![0u32; n_max + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n_max {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let limit = spf[i];
        for &p in &primes {
            if p > limit {
                break;
            }
            let m = i * p as usize;
            if m > n_max {
                break;
            }
            spf[m] = p;
        }
    }

    let signs = SeededSigns::new(seed);
    let mut values = vec![0i8; n_max + 1];
    values[1] = 1;
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut m = n / p;
        let mut e = 1;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        values[n] = if e >= k {
            0
        } else {
            let fp = signs.sign(p as u64);
            let power = if e % 2 == 0 { 1 } else { fp };
            power * values[m]
        };
    }
    Ok(MultTable {
        bound,
        k,
        seed,
        values,
        spf,
    })
}

/// `Σ_{n<=N} f(n) n^{-1/2-s}`.
pub fn f_partial_sum<T: Scalar>(table: &MultTable, s: T) -> Result<T> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(invalid(format!("shift s must be finite and > 0, got {s}")));
    }
    let exponent = T::lit(0.5) + s;
    const CHUNK: usize = 1 << 16;
    let partials: Vec<Compensated<T>> = table.values[1..]
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut acc = Compensated::new();
            for (i, &f) in chunk.iter().enumerate() {
                if f != 0 {
                    let n = (c * CHUNK + i + 1) as u64;
                    let w = (-exponent * T::from_index(n).ln()).exp();
                    acc.add(if f > 0 { w } else { -w });
                }
            }
            acc
        })
        .collect();
    let mut total = Compensated::new();
    for part in &partials {
        total.merge(part);
    }
    Ok(total.value())
}

/// Finite Euler product, with the first prime whose factor is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerProduct<T> {
    pub value: T,
    pub nonpositive_at: Option<u64>,
}

fn check_args<T: Scalar>(s: T, cutoff: u64, k: u32) -> Result<()> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(invalid(format!("shift s must be finite and > 0, got {s}")));
    }
    if cutoff < 2 {
        return Err(invalid(format!("cutoff must be >= 2, got {cutoff}")));
    }
    if k < 2 {
        return Err(invalid(format!("freeness order k must be >= 2, got {k}")));
    }
    Ok(())
}

/// `Σ_{ℓ<k} x^ℓ` by Horner.
#[inline]
fn euler_factor<T: Scalar>(x: T, k: u32) -> T {
    let mut acc = T::one();
    for _ in 1..k {
        acc = T::one() + x * acc;
    }
    acc
}

/// `x_p = f(p) p^{-1/2-s}`.
#[inline]
fn local_coefficient<T: Scalar, R: Realization>(signs: &R, p: u32, s: T) -> T {
    T::lit(signs.eta(u64::from(p))) * prime_power(p, T::lit(0.5) + s)
}

pub fn euler_product_with<T, R>(table: &PrimeTable, s: T, cutoff: u64, k: u32, signs: &R) -> Result<EulerProduct<T>>
where
    T: Scalar,
    R: Realization,
{
    check_args(s, cutoff, k)?;
    let mut value = T::one();
    let mut nonpositive_at = None;
    for &p in table.up_to(cutoff)? {
        let factor = euler_factor(local_coefficient(signs, p, s), k);
        if !(factor > T::zero()) && nonpositive_at.is_none() {
            nonpositive_at = Some(u64::from(p));
        }
        value = value * factor;
    }
    Ok(EulerProduct { value, nonpositive_at })
}

/// `Π_{p<=P} Σ_{ℓ<k} (f(p) p^{-1/2-s})^ℓ`.
pub fn euler_product<T: Scalar>(table: &PrimeTable, seed: SeedSpec, s: T, cutoff: u64, k: u32) -> Result<EulerProduct<T>> {
    euler_product_with(table, s, cutoff, k, &SeededSigns::new(seed))
}

/// `Σ f(n) n^{-1/2-s}` over every P-smooth k-free `n`, the term-by-term
/// expansion of the finite Euler product.
pub fn smooth_expansion_sum_with<T, R>(table: &PrimeTable, s: T, cutoff: u64, k: u32, signs: &R) -> Result<T>
where
    T: Scalar,
    R: Realization,
{
    check_args(s, cutoff, k)?;
    let set = enumerate_smooth_kfree(table, cutoff, k)?;
    let local: Vec<f64> = set.primes.iter().map(|&p| signs.eta(u64::from(p))).collect();
    let exponent = T::lit(0.5) + s;
    let mut acc = Compensated::new();
    for entry in &set.entries {
        let mut sign = 1.0;
        for (&f, &e) in local.iter().zip(&entry.exponents) {
            sign *= f.powi(i32::from(e));
        }
        let weight = (-exponent * T::from_index(entry.n).ln()).exp();
        acc.add(T::lit(sign) * weight);
    }
    Ok(acc.value())
}

pub fn smooth_expansion_sum<T: Scalar>(table: &PrimeTable, seed: SeedSpec, s: T, cutoff: u64, k: u32) -> Result<T> {
    smooth_expansion_sum_with(table, s, cutoff, k, &SeededSigns::new(seed))
}

/// Below this `|x|` the per-prime remainders are summed as power series.
const SERIES_SWITCH: f64 = 0.125;

/// `Σ_{j>=3} x^j / j` (sign pattern applied by the caller through `x`).
#[inline]
fn cubic_tail<T: Scalar>(x: T) -> T {
    let mut power = x * x * x;
    let mut sum = T::zero();
    let eps = T::epsilon() * T::lit(0.25);
    let mut j = 3u32;
    loop {
        let term = power / T::from_u32(j).unwrap();
        sum = sum + term;
        if term.abs() <= eps * sum.abs() || j > 400 {
            return sum;
        }
        power = power * x;
        j += 1;
    }
}

/// `log(1+x) - x + x²/2 = Σ_{j>=3} (-1)^{j+1} x^j / j`.
pub fn remainder_term_squarefree<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(SERIES_SWITCH) {
        // Σ (-1)^{j+1} x^j/j = -Σ (-x)^j/j
        -cubic_tail(-x)
    } else {
        x.ln_1p() - x + x * x / T::lit(2.0)
    }
}

/// `log(Σ_{ℓ<k} x^ℓ) - x - x²/2`, using `Σ_{ℓ<k} x^ℓ = (1 - x^k)/(1 - x)`.
pub fn remainder_term_kfree<T: Scalar>(x: T, k: u32) -> T {
    if k == 2 {
        return remainder_term_squarefree(x);
    }
    let x_k = x.powi(k as i32);
    if x.abs() < T::lit(SERIES_SWITCH) {
        // -log(1-x) - x - x²/2 = Σ_{j>=3} x^j/j
        cubic_tail(x) + (-x_k).ln_1p()
    } else {
        euler_factor(x, k).ln() - x - x * x / T::lit(2.0)
    }
}

/// `R_P(s) = Σ_{p<=P} Σ_{j>=3} (-1)^{j+1} f(p)^j / (j p^{j(1/2+s)})`, per prime in closed form.
pub fn remainder_r_with<T, R>(table: &PrimeTable, s: T, cutoff: u64, signs: &R) -> Result<T>
where
    T: Scalar,
    R: Realization + Sync,
{
    check_args(s, cutoff, 2)?;
    let primes = table.up_to(cutoff)?;
    Ok(sum_over_primes(primes, |p| remainder_term_squarefree(local_coefficient(signs, p, s))))
}

pub fn remainder_r<T: Scalar>(table: &PrimeTable, seed: SeedSpec, s: T, cutoff: u64) -> Result<T> {
    remainder_r_with(table, s, cutoff, &SeededSigns::new(seed))
}

/// The k-free remainder: `Σ_{p<=P} [log(Σ_{ℓ<k} x_p^ℓ) - x_p - p^{-1-2s}/2]`.
pub fn remainder_r_star_with<T, R>(table: &PrimeTable, s: T, cutoff: u64, k: u32, signs: &R) -> Result<T>
where
    T: Scalar,
    R: Realization,
{
    check_args(s, cutoff, k)?;
    if k < 3 {
        return Err(invalid(format!("the k-free remainder needs k >= 3, got {k}")));
    }
    let mut acc = Compensated::new();
    for &p in table.up_to(cutoff)? {
        let x = local_coefficient(signs, p, s);
        let factor = euler_factor(x, k);
        if !(factor > T::zero()) {
            return Err(Error::NonPositiveFactor {
                prime: u64::from(p),
                factor: factor.to_f64().unwrap_or(f64::NAN),
            });
        }
        acc.add(remainder_term_kfree(x, k));
    }
    Ok(acc.value())
}

pub fn remainder_r_star<T: Scalar>(table: &PrimeTable, seed: SeedSpec, s: T, cutoff: u64, k: u32) -> Result<T> {
    remainder_r_star_with(table, s, cutoff, k, &SeededSigns::new(seed))
}

/// Components of `log Π_p(factor) + sign·½Σ p^{-1-2s} = Σ x_p + remainder`
/// with `sign = +1` for `k = 2` and `-1` for `k >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport<T> {
    pub s: T,
    pub cutoff: u64,
    pub k: u32,
    pub sign: i8,
    pub log_product: T,
    pub prime_sum: T,
    pub half_variance_sum: T,
    pub remainder: T,
    pub residual: T,
    /// Set for `k = 2` only.
    pub remainder_bound: Option<T>,
}

/// Sign in front of the half-variance term: `+1` for `k = 2`, `-1` otherwise.
pub fn zeta_sign(k: u32) -> i8 {
    if k == 2 {
        1
    } else {
        -1
    }
}

/// `√2/(√2−1) · (Σ_{p<=P} p^{-3/2} + 2 P^{-1/2} / log P)`.
pub fn remainder_bound<T: Scalar>(table: &PrimeTable, cutoff: u64) -> Result<T> {
    let primes = table.up_to(cutoff)?;
    let head: T = sum_over_primes(primes, |p| prime_power(p, T::lit(1.5)));
    let big_p = T::from_index(cutoff);
    let tail = T::lit(2.0) / (big_p.sqrt() * big_p.ln());
    Ok(T::lit(REMAINDER_BOUND_CONSTANT) * (head + tail))
}

pub fn log_decomposition_with<T, R>(table: &PrimeTable, s: T, cutoff: u64, k: u32, signs: &R) -> Result<DecompositionReport<T>>
where
    T: Scalar,
    R: Realization,
{
    check_args(s, cutoff, k)?;
    let primes = table.up_to(cutoff)?;
    let mut log_product = Compensated::new();
    let mut prime_sum = Compensated::new();
    let mut variance = Compensated::new();
    let mut remainder = Compensated::new();
    let variance_exponent = T::one() + s + s;
    for &p in primes {
        let x = local_coefficient(signs, p, s);
        let factor = euler_factor(x, k);
        if !(factor > T::zero()) {
            return Err(Error::NonPositiveFactor {
                prime: u64::from(p),
                factor: factor.to_f64().unwrap_or(f64::NAN),
            });
        }
        log_product.add(factor.ln());
        prime_sum.add(x);
        variance.add(prime_power(p, variance_exponent));
        remainder.add(remainder_term_kfree(x, k));
    }
    let half = T::lit(0.5);
    let sign = zeta_sign(k);
    let (log_product, prime_sum) = (log_product.value(), prime_sum.value());
    let half_variance_sum = half * variance.value();
    let remainder = remainder.value();
    let mut defect = Compensated::new();
    defect.add(log_product);
    defect.add(T::lit(f64::from(sign)) * half_variance_sum);
    defect.add(-prime_sum);
    defect.add(-remainder);
    let remainder_bound = if k == 2 {
        Some(remainder_bound(table, cutoff)?)
    } else {
        None
    };
    Ok(DecompositionReport {
        s,
        cutoff,
        k,
        sign,
        log_product,
        prime_sum,
        half_variance_sum,
        remainder,
        residual: defect.value().abs(),
        remainder_bound,
    })
}

pub fn log_decomposition<T: Scalar>(table: &PrimeTable, seed: SeedSpec, s: T, cutoff: u64, k: u32) -> Result<DecompositionReport<T>> {
    log_decomposition_with(table, s, cutoff, k, &SeededSigns::new(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sign_at;
    use crate::primes::sieve_primes;
    use std::sync::OnceLock;

    fn table() -> &'static PrimeTable {
        static T: OnceLock<PrimeTable> = OnceLock::new();
        T.get_or_init(|| sieve_primes(1_000_000).unwrap())
    }

    fn plus_minus(p: u64) -> f64 {
        match p {
            2 => 1.0,
            3 => -1.0,
            _ => 1.0,
        }
    }

    const SEED: SeedSpec = SeedSpec::new(2024, 3);

    #[test]
    fn worked_values_squarefree_and_cubefree() {
        let t2 = sieve_multiplicative(SEED, 100, 2).unwrap();
        let f = |n| i32::from(t2.value(n).unwrap());
        assert_eq!(f(1), 1);
        assert_eq!(f(12), 0);
        assert_eq!(f(6), f(2) * f(3));
        assert_eq!(f(30), f(2) * f(3) * f(5));
        for p in [2u64, 3, 5, 7, 97] {
            assert_eq!(t2.value(p).unwrap(), sign_at(SEED, p));
        }

        let t3 = sieve_multiplicative(SEED, 100, 3).unwrap();
        let g = |n| i32::from(t3.value(n).unwrap());
        assert_eq!(g(12), g(3));
        assert_eq!(g(24), 0);
        assert_eq!(g(4), 1);
        assert_eq!(g(8), 0);
        assert_eq!(g(36), 1);

        assert!(sieve_multiplicative(SEED, 0, 2).is_err());
        assert!(sieve_multiplicative(SEED, 10, 1).is_err());
        assert!(t2.value(0).is_err());
        assert!(t2.value(101).is_err());
        assert_eq!(t2.smallest_prime_factor(91), Some(7));
    }

    #[test]
    fn complete_multiplicativity_on_kfree_support() {
        for k in [2u32, 3, 4] {
            let t = sieve_multiplicative(SEED, 20_000, k).unwrap();
            for n in 1..=20_000u64 {
                let mut m = n;
                let mut expect = 1i32;
                let mut d = 2;
                while d * d <= m {
                    let mut e = 0;
                    while m % d == 0 {
                        m /= d;
                        e += 1;
                    }
                    if e >= k {
                        expect = 0;
                    } else if e % 2 == 1 {
                        expect *= i32::from(sign_at(SEED, d));
                    }
                    d += 1;
                }
                if m > 1 {
                    expect *= i32::from(sign_at(SEED, m));
                }
                assert_eq!(i32::from(t.value(n).unwrap()), expect, "n={n}, k={k}");
            }
        }
    }

    #[test]
    fn squarefree_support_matches_mobius_sieve() {
        let n_max = 100_000usize;
        let mut squarefree = vec![true; n_max + 1];
        let mut d = 2;
        while d * d <= n_max {
            for m in (d * d..=n_max).step_by(d * d) {
                squarefree[m] = false;
            }
            d += 1;
        }
        let t = sieve_multiplicative(SEED, n_max as u64, 2).unwrap();
        for (n, (&v, &sf)) in t.values().iter().zip(&squarefree).enumerate().skip(1) {
            assert_eq!(v != 0, sf, "n={n}");
        }
    }

    #[test]
    fn f_partial_sum_small_and_naive() {
        let t1 = sieve_multiplicative(SEED, 1, 2).unwrap();
        assert_eq!(f_partial_sum(&t1, 0.3f64).unwrap(), 1.0);
        let t3 = sieve_multiplicative(SEED, 3, 2).unwrap();
        let f2 = f64::from(sign_at(SEED, 2));
        let f3 = f64::from(sign_at(SEED, 3));
        let v: f64 = f_partial_sum(&t3, 0.5).unwrap();
        assert!((v - (1.0 + f2 / 2.0 + f3 / 3.0)).abs() < 1e-15);
        assert!(f_partial_sum(&t3, 0.0f64).is_err());

        let big = sieve_multiplicative(SEED, 1_000_000, 2).unwrap();
        let fast: f64 = f_partial_sum(&big, 0.1).unwrap();
        let mut naive = 0.0;
        for n in 1..=1_000_000u64 {
            naive += f64::from(big.value(n).unwrap()) * (n as f64).powf(-0.6);
        }
        assert!((fast - naive).abs() < 1e-10, "{fast} vs {naive}");
    }

    #[test]
    fn euler_product_hand_values() {
        let v: EulerProduct<f64> = euler_product_with(table(), 0.5, 3, 2, &plus_minus).unwrap();
        assert!((v.value - 1.0).abs() < 1e-15);
        assert_eq!(v.nonpositive_at, None);
        let f2 = f64::from(sign_at(SEED, 2));
        let single: f64 = euler_product(table(), SEED, 0.5, 2, 3).unwrap().value;
        assert!((single - (1.0 + f2 / 2.0 + 0.25)).abs() < 1e-15);
        for label in 0..100 {
            let e: EulerProduct<f64> = euler_product(table(), SEED.with_label(label), 0.01, 10_000, 2).unwrap();
            assert!(e.value > 0.0);
        }
        assert!(euler_product(table(), SEED, 0.0f64, 3, 2).is_err());
        assert!(euler_product(table(), SEED, 0.5f64, 3, 1).is_err());
    }

    #[test]
    fn smooth_expansion_hand_values() {
        let v: f64 = smooth_expansion_sum_with(table(), 0.5, 3, 2, &plus_minus).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let s = 0.2;
        let f2 = f64::from(sign_at(SEED, 2));
        let w: f64 = smooth_expansion_sum(table(), SEED, s, 2, 2).unwrap();
        assert!((w - (1.0 + f2 * 2f64.powf(-0.5 - s))).abs() < 1e-15);
        assert!(matches!(
            smooth_expansion_sum::<f64>(table(), SEED, 0.5, 97, 2),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn euler_identity_over_seeds() {
        for label in 0..25 {
            let seed = SEED.with_label(label);
            for &p in &[3u64, 7, 13] {
                for k in [2u32, 3, 4] {
                    for s in [0.01f64, 0.5, 2.0] {
                        let prod = euler_product(table(), seed, s, p, k).unwrap().value;
                        let sum = smooth_expansion_sum(table(), seed, s, p, k).unwrap();
                        assert!((prod / sum - 1.0).abs() < 1e-12, "P={p} k={k} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn sieve_table_agrees_with_smooth_expansion() {
        let bound = 13;
        let n0 = 30_000u64;
        for k in [2u32, 3] {
            let mt = sieve_multiplicative(SEED, n0, k).unwrap();
            let set = enumerate_smooth_kfree(table(), bound, k).unwrap();
            let mut from_table = Compensated::<f64>::new();
            let mut from_set = Compensated::<f64>::new();
            for e in set.entries.iter().filter(|e| e.n <= n0) {
                let mut sign = 1i32;
                for (&p, &x) in set.primes.iter().zip(&e.exponents) {
                    sign *= i32::from(sign_at(SEED, u64::from(p))).pow(u32::from(x));
                }
                assert_eq!(i32::from(mt.value(e.n).unwrap()), sign);
                from_set.add(f64::from(sign) * (e.n as f64).powf(-0.6));
            }
            // filtered summation over the sieved table
            for n in 1..=n0 {
                let mut m = n;
                while let Some(p) = mt.smallest_prime_factor(m) {
                    if u64::from(p) > bound {
                        break;
                    }
                    m /= u64::from(p);
                }
                if m == 1 {
                    from_table.add(f64::from(mt.value(n).unwrap()) * (n as f64).powf(-0.6));
                }
            }
            assert!((from_table.value() - from_set.value()).abs() < 1e-12);
        }
    }

    #[test]
    fn remainder_closed_forms() {
        let up = |_p: u64| 1.0;
        let down = |_p: u64| -1.0;
        let r_up: f64 = remainder_r_with(table(), 0.5, 2, &up).unwrap();
        let r_down: f64 = remainder_r_with(table(), 0.5, 2, &down).unwrap();
        assert!((r_up - ((1.5f64).ln() - 0.5 + 0.125)).abs() < 1e-15);
        assert!((r_up - 0.030_465_1).abs() < 1e-7);
        assert!((r_down - ((0.5f64).ln() + 0.5 + 0.125)).abs() < 1e-15);
        assert!((r_down + 0.068_147_2).abs() < 1e-7);
        assert!(remainder_r::<f64>(table(), SEED, 0.0, 100).is_err());

        let star: f64 = remainder_r_star_with(table(), 0.5, 2, 3, &up).unwrap();
        assert!((star - ((1.75f64).ln() - 0.5 - 0.125)).abs() < 1e-15);
        // large k approaches the geometric limit -log(1-x) - x - x²/2
        let x: f64 = 0.5;
        let geo = -(1.0 - x).ln() - x - x * x / 2.0;
        let star50: f64 = remainder_r_star_with(table(), 0.5, 2, 50, &up).unwrap();
        assert!((star50 - geo).abs() < 1e-14);
        assert!(remainder_r_star::<f64>(table(), SEED, 0.5, 100, 2).is_err());
    }

    #[test]
    fn remainder_series_branch_matches_closed_form() {
        for x in [0.124f64, -0.124, 0.05, -0.05, 0.01] {
            let series = remainder_term_squarefree(x);
            let closed = x.ln_1p() - x + x * x / 2.0;
            assert!((series - closed).abs() < 1e-15, "x={x}");
            for k in [3u32, 4, 7] {
                let series = remainder_term_kfree(x, k);
                let closed = euler_factor(x, k).ln() - x - x * x / 2.0;
                assert!((series - closed).abs() < 1e-15, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn remainder_bound_holds_and_limit() {
        for label in 0..20 {
            for s in [0.5f64, 0.01, 1e-4] {
                let r: f64 = remainder_r(table(), SEED.with_label(label), s, 100_000).unwrap();
                assert!(r.abs() <= remainder_bound::<f64>(table(), 100_000).unwrap());
            }
        }
        // Σ_p p^{-3/2}: partial sum plus the integral tail ∫_P^∞ x^{-3/2}/ln x dx
        let head: f64 = table().primes().iter().map(|&p| f64::from(p).powf(-1.5)).sum();
        let tail = {
            let (a, b, n) = (1e6f64.ln(), 80.0f64, 200_000);
            // substitute x = e^u: ∫ e^{-u/2}/u du
            let h = (b - a) / n as f64;
            let f = |u: f64| (-u / 2.0).exp() / u;
            let mut s = f(a) + f(b);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
            }
            s * h / 3.0
        };
        let prime_zeta = head + tail;
        assert!((prime_zeta - 0.8495).abs() < 2e-3, "{prime_zeta}");
        let limit = REMAINDER_BOUND_CONSTANT * prime_zeta;
        let bound: f64 = remainder_bound(table(), 1_000_000).unwrap();
        assert!((bound - limit).abs() < 5e-3, "{bound} vs {limit}");
        assert!((bound - 2.899).abs() < 5e-3);
    }

    #[test]
    fn decomposition_identity() {
        for label in 0..5 {
            let seed = SEED.with_label(label);
            let d: DecompositionReport<f64> = log_decomposition(table(), seed, 0.5, 3, 2).unwrap();
            assert!(d.residual <= 1e-12);
            assert_eq!(d.sign, 1);
            assert!(d.remainder_bound.is_some());
            let d3: DecompositionReport<f64> = log_decomposition(table(), seed, 0.5, 3, 3).unwrap();
            assert!(d3.residual <= 1e-12);
            assert_eq!(d3.sign, -1);
            assert!(d3.remainder_bound.is_none());
            for s in [0.5, 0.1, 0.01, 0.001] {
                for k in [2, 3] {
                    let d: DecompositionReport<f64> = log_decomposition(table(), seed, s, 100_000, k).unwrap();
                    assert!(d.residual <= 1e-10, "s={s} k={k}: {}", d.residual);
                    if k == 2 {
                        let r = remainder_r(table(), seed, s, 100_000).unwrap();
                        assert!((r - d.remainder).abs() < 1e-13);
                    } else {
                        let r = remainder_r_star(table(), seed, s, 100_000, 3).unwrap();
                        assert!((r - d.remainder).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn remainder_r_star_bounded_over_shift_grid() {
        for label in 0..5 {
            let seed = SEED.with_label(label);
            let at_small: f64 = remainder_r_star(table(), seed, 1e-6, 100_000, 3).unwrap();
            let mut max = 0.0f64;
            let mut s = 1e-6f64;
            while s <= 0.5 {
                max = max.max(remainder_r_star(table(), seed, s, 100_000, 3).unwrap().abs());
                s *= 1.5;
            }
            assert!(max <= 2.0 * at_small.abs() + 1.0, "max={max}, at 1e-6 = {at_small}");
        }
    }

    #[test]
    fn remainder_is_small_relative_to_log_scale_along_power_grid() {
        for label in 0..10 {
            let seed = SEED.with_label(label);
            for (s, threshold) in [(1e-4f64, None), (1e-200, Some(0.01))] {
                let scale = (1.0 / s).ln();
                let bound: f64 = remainder_bound(table(), 1_000_000).unwrap();
                let mut sup = 0.0f64;
                for i in 0..=60 {
                    let shift = (i as f64 * 0.05 * s.ln()).exp();
                    let shift = shift.max(f64::MIN_POSITIVE);
                    sup = sup.max(remainder_r(table(), seed, shift, 1_000_000).unwrap().abs());
                }
                assert!(sup / scale <= bound / scale);
                if let Some(th) = threshold {
                    assert!(sup / scale <= th, "s={s}: {}", sup / scale);
                }
            }
        }
    }

    #[test]
    fn csv_export() {
        let t = sieve_multiplicative(SEED, 20_000, 2).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,f");
        assert_eq!(lines.len(), 10_001);
        assert_eq!(lines[12], "12,0");
    }
}
