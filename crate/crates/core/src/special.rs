//! Special functions: the exponential integral `E1` and the Riemann zeta
//! function on the real axis right of 1.

use crate::error::{domain, Result};
use crate::scalar::Scalar;
use crate::summation::Compensated;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Direct terms used by [`zeta_series`] before the Euler–Maclaurin tail.
pub const ZETA_DIRECT_TERMS: u64 = 1_000_000;

/// `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series for `x <= 1`, continued fraction (modified Lentz) above.
pub fn exp_integral_e1<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("E1 requires a finite x > 0, got {x}")));
    }
    let eps = T::epsilon();
    if x <= T::one() {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        let mut sum = T::zero();
        let mut power = T::one(); // (-x)^k / k!
        let mut k = T::zero();
        for _ in 0..200 {
            k = k + T::one();
            power = -power * x / k;
            let term = power / k;
            sum = sum + term;
            if term.abs() < eps * sum.abs() {
                break;
            }
        }
        Ok(-T::lit(EULER_GAMMA) - x.ln() - sum)
    } else {
        let tiny = T::min_positive_value() / eps;
        let mut b = x + T::one();
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        let two = T::lit(2.0);
        for i in 1..10_000u32 {
            let i = T::from_u32(i).unwrap();
            let an = -i * i;
            b = b + two;
            d = T::one() / (an * d + b);
            c = b + an / c;
            let delta = c * d;
            h = h * delta;
            if (delta - T::one()).abs() <= eps {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

/// `zeta(r)` for `r > 1`.
pub fn zeta_series<T: Scalar>(r: T) -> Result<T> {
    if !(r > T::one()) {
        return Err(domain(format!("zeta(r) requires r > 1, got {r}")));
    }
    zeta_one_plus(r - T::one())
}

/// `zeta(1 + eps)` for `eps > 0`. Takes the offset itself rather than
/// `1 + eps`, which keeps full precision for tiny offsets.
pub fn zeta_one_plus<T: Scalar>(eps: T) -> Result<T> {
    zeta_one_plus_with_terms(eps, ZETA_DIRECT_TERMS)
}

/// Direct sum over `n < terms` plus Euler–Maclaurin corrections through the
/// `B4` term.
pub fn zeta_one_plus_with_terms<T: Scalar>(eps: T, terms: u64) -> Result<T> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(domain(format!("zeta(1 + eps) requires eps > 0, got {eps}")));
    }
    if terms < 2 {
        return Err(domain("zeta needs at least two direct terms"));
    }
    let r = T::one() + eps;
    let mut acc = Compensated::new();
    // smallest terms first
    for n in (1..terms).rev() {
        acc.add((-r * T::from_index(n).ln()).exp());
    }
    let big_n = T::from_index(terms);
    let ln_n = big_n.ln();
    let n_pow = (-r * ln_n).exp(); // N^{-r}
    let tail_integral = (-eps * ln_n).exp() / eps; // N^{1-r}/(r-1)
    let half = n_pow / T::lit(2.0);
    let b2 = r * n_pow / big_n / T::lit(12.0);
    let b4 = r * (r + T::one()) * (r + T::lit(2.0)) * n_pow / (big_n * big_n * big_n) / T::lit(720.0);
    acc.add(half);
    acc.add(b2);
    acc.add(-b4);
    acc.add(tail_integral);
    Ok(acc.value())
}
