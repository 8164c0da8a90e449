//! Compensated accumulation.
//!
//! Every sum over primes in this crate is taken in ascending order through
//! [`Compensated`], a Neumaier-style two-term accumulator. Chunked parallel
//! reductions merge partial accumulators in chunk order so the result does
//! not depend on the thread count.

use std::iter::Sum;
use std::ops::AddAssign;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> Compensated<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    /// Folds another accumulator into this one, keeping both error terms.
    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Scalar> AddAssign<T> for Compensated<T> {
    #[inline]
    fn add_assign(&mut self, rhs: T) {
        self.add(rhs);
    }
}

impl<T: Scalar> Sum<T> for Compensated<T> {
    fn sum<I: Iterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().sum::<Compensated<T>>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let terms = [1.0e16, 1.0, -1.0e16, 1.0];
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 1.0);
        assert_eq!(compensated_sum(terms), 2.0);
    }

    #[test]
    fn harmonic_sum_f32_beats_naive() {
        let n = 1_000_000u32;
        let exact: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        let naive: f32 = (1..=n).map(|k| 1.0 / k as f32).sum();
        let comp = compensated_sum((1..=n).map(|k| 1.0 / k as f32));
        assert!((comp as f64 - exact).abs() < 1e-5);
        assert!((comp as f64 - exact).abs() < (naive as f64 - exact).abs());
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..10_000).map(|k| (k as f64).sin() / k as f64).collect();
        let seq = compensated_sum(xs.iter().copied());
        let mut left: Compensated<f64> = xs[..5000].iter().copied().sum();
        let right: Compensated<f64> = xs[5000..].iter().copied().sum();
        left.merge(&right);
        assert!((left.value() - seq).abs() <= 1e-16);
    }
}
