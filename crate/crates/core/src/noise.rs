//! Counter-based per-prime noise.
//!
//! The value attached to a prime is a pure function of
//! `(master_seed, stream_label, p)`: the three words are pushed through a
//! 64-bit avalanche mixer and the resulting bits are mapped to the requested
//! law. Nothing depends on the order in which primes are visited or on the
//! truncation cutoff of the series being evaluated.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{invalid, Result};

/// Seed plus a discriminator for independent streams (replicas, experiments).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_label: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_label: u64) -> Self {
        Self {
            master_seed,
            stream_label,
        }
    }

    pub const fn with_label(self, stream_label: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_label,
        }
    }

    /// Stream key; the per-prime bits are `mix64(key ^ p)`.
    #[inline]
    pub fn stream_key(&self) -> u64 {
        mix64(mix64(self.master_seed ^ 0x243f_6a88_85a3_08d3) ^ mix64(self.stream_label ^ 0x1319_8a2e_0370_7344))
    }

    #[inline]
    pub fn bits(&self, p: u64) -> u64 {
        bits_for(self.stream_key(), p)
    }
}

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
pub(crate) fn bits_for(key: u64, p: u64) -> u64 {
    mix64(key ^ p)
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
#[inline]
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    Rademacher,
    Gaussian,
    CenteredUniform,
    /// `a` with probability `q`, `b` otherwise.
    TwoPoint { a: f64, b: f64, q: f64 },
}

/// Law of the per-prime variables: mean zero, variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma2: f64,
}

impl NoiseModel {
    pub fn rademacher() -> Self {
        Self {
            kind: NoiseKind::Rademacher,
            sigma2: 1.0,
        }
    }

    pub fn gaussian(sigma2: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, sigma2)
    }

    pub fn centered_uniform(sigma2: f64) -> Result<Self> {
        Self::new(NoiseKind::CenteredUniform, sigma2)
    }

    /// `±sqrt(sigma2)` with equal probability.
    pub fn scaled_rademacher(sigma2: f64) -> Result<Self> {
        Self::new(NoiseKind::Rademacher, sigma2)
    }

    /// Two-point law from its atoms and weight; `sigma2` is derived.
    pub fn two_point(a: f64, b: f64, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid(format!("two_point weight q must lie in (0,1), got {q}")));
        }
        let mean = q * a + (1.0 - q) * b;
        let sigma2 = q * a * a + (1.0 - q) * b * b;
        if mean.abs() > 1e-12 * sigma2.sqrt().max(1.0) {
            return Err(invalid(format!(
                "two_point atoms a={a}, b={b}, q={q} have mean {mean}, expected 0"
            )));
        }
        Self::new(NoiseKind::TwoPoint { a, b, q }, sigma2)
    }

    /// Two-point law with weight `q` and variance `sigma2`.
    pub fn two_point_from_variance(q: f64, sigma2: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid(format!("two_point weight q must lie in (0,1), got {q}")));
        }
        let sigma = sigma2.sqrt();
        let a = sigma * ((1.0 - q) / q).sqrt();
        let b = -sigma * (q / (1.0 - q)).sqrt();
        Self::new(NoiseKind::TwoPoint { a, b, q }, sigma2)
    }

    pub fn new(kind: NoiseKind, sigma2: f64) -> Result<Self> {
        let model = Self { kind, sigma2 };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid(format!("sigma2 must be positive and finite, got {}", self.sigma2)));
        }
        if let NoiseKind::TwoPoint { a, b, q } = self.kind {
            if !(q > 0.0 && q < 1.0) {
                return Err(invalid(format!("two_point weight q must lie in (0,1), got {q}")));
            }
            let mean = q * a + (1.0 - q) * b;
            let var = q * a * a + (1.0 - q) * b * b;
            let scale = self.sigma2.max(1.0);
            if mean.abs() > 1e-9 * scale.sqrt() || (var - self.sigma2).abs() > 1e-9 * scale {
                return Err(invalid(format!(
                    "two_point(a={a}, b={b}, q={q}) has mean {mean} and variance {var}, \
                     expected 0 and {}",
                    self.sigma2
                )));
            }
        }
        Ok(())
    }

    /// Same law multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let kind = match self.kind {
            NoiseKind::TwoPoint { a, b, q } => NoiseKind::TwoPoint {
                a: c * a,
                b: c * b,
                q,
            },
            other => other,
        };
        Self::new(kind, c * c * self.sigma2)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            NoiseKind::Rademacher => "rademacher",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::CenteredUniform => "centered_uniform",
            NoiseKind::TwoPoint { .. } => "two_point",
        }
    }

    /// Maps 64 random bits to one draw from the law.
    #[inline]
    pub fn sample(&self, bits: u64) -> f64 {
        match self.kind {
            NoiseKind::Rademacher => {
                let sigma = self.sigma2.sqrt();
                if bits >> 63 == 0 {
                    sigma
                } else {
                    -sigma
                }
            }
            NoiseKind::Gaussian => self.sigma2.sqrt() * standard_normal_quantile(open_unit(bits)),
            NoiseKind::CenteredUniform => {
                let half_width = (3.0 * self.sigma2).sqrt();
                half_width * (2.0 * open_unit(bits) - 1.0)
            }
            NoiseKind::TwoPoint { a, b, q } => {
                if open_unit(bits) < q {
                    a
                } else {
                    b
                }
            }
        }
    }

    /// `E[eta^2 ; |eta| > c]` in closed form.
    pub fn truncated_second_moment(&self, c: f64) -> f64 {
        match self.kind {
            NoiseKind::Rademacher => {
                if self.sigma2.sqrt() > c {
                    self.sigma2
                } else {
                    0.0
                }
            }
            NoiseKind::Gaussian => {
                let sigma = self.sigma2.sqrt();
                let z = (c / sigma).max(0.0);
                let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                self.sigma2 * (statrs::function::erf::erfc(z / std::f64::consts::SQRT_2) + 2.0 * z * density)
            }
            NoiseKind::CenteredUniform => {
                let w = (3.0 * self.sigma2).sqrt();
                let c = c.max(0.0);
                if c >= w {
                    0.0
                } else {
                    (w * w * w - c * c * c) / (3.0 * w)
                }
            }
            NoiseKind::TwoPoint { a, b, q } => {
                let mut m = 0.0;
                if a.abs() > c {
                    m += q * a * a;
                }
                if b.abs() > c {
                    m += (1.0 - q) * b * b;
                }
                m
            }
        }
    }
}

/// `Phi^{-1}(u)` for `u` in (0, 1).
#[inline]
pub fn standard_normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Realization of the per-prime noise for one stream.
#[derive(Debug, Clone, Copy)]
pub struct SeededNoise {
    key: u64,
    pub seed: SeedSpec,
    pub model: NoiseModel,
}

impl SeededNoise {
    pub fn new(seed: SeedSpec, model: NoiseModel) -> Self {
        Self {
            key: seed.stream_key(),
            seed,
            model,
        }
    }

    #[inline]
    pub fn eta(&self, p: u64) -> f64 {
        self.model.sample(bits_for(self.key, p))
    }
}

/// Source of per-prime coefficients consumed by the series evaluators.
pub trait Realization {
    fn eta(&self, p: u64) -> f64;
}

impl Realization for SeededNoise {
    #[inline]
    fn eta(&self, p: u64) -> f64 {
        SeededNoise::eta(self, p)
    }
}

impl<F: Fn(u64) -> f64> Realization for F {
    #[inline]
    fn eta(&self, p: u64) -> f64 {
        self(p)
    }
}

/// `eta_p` for one prime.
pub fn eta_at(seed: SeedSpec, model: &NoiseModel, p: u64) -> f64 {
    model.sample(seed.bits(p))
}

/// Rademacher sign `f(p)`; identical to `eta_at` with the unit Rademacher model.
pub fn sign_at(seed: SeedSpec, p: u64) -> i8 {
    if seed.bits(p) >> 63 == 0 {
        1
    } else {
        -1
    }
}

/// Realization of the Rademacher signs `f(p)` for one stream.
#[derive(Debug, Clone, Copy)]
pub struct SeededSigns {
    key: u64,
}

impl SeededSigns {
    pub fn new(seed: SeedSpec) -> Self {
        Self {
            key: seed.stream_key(),
        }
    }

    #[inline]
    pub fn sign(&self, p: u64) -> i8 {
        if bits_for(self.key, p) >> 63 == 0 {
            1
        } else {
            -1
        }
    }
}

impl Realization for SeededSigns {
    #[inline]
    fn eta(&self, p: u64) -> f64 {
        f64::from(self.sign(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve_primes;
    use std::collections::HashSet;

    const SEED: SeedSpec = SeedSpec::new(0xfeed_beef, 7);

    fn models() -> Vec<NoiseModel> {
        vec![
            NoiseModel::rademacher(),
            NoiseModel::scaled_rademacher(2.5).unwrap(),
            NoiseModel::gaussian(1.0).unwrap(),
            NoiseModel::gaussian(0.3).unwrap(),
            NoiseModel::centered_uniform(2.0).unwrap(),
            NoiseModel::two_point(3.0, -1.0, 0.25).unwrap(),
            NoiseModel::two_point_from_variance(0.1, 4.0).unwrap(),
        ]
    }

    #[test]
    fn rademacher_support_and_determinism() {
        let m = NoiseModel::rademacher();
        for p in [2u64, 3, 5, 7, 11, 1_000_003] {
            let v = eta_at(SEED, &m, p);
            assert!(v == 1.0 || v == -1.0);
            assert_eq!(v.to_bits(), eta_at(SEED, &m, p).to_bits());
        }
    }

    #[test]
    fn sign_aliases_unit_rademacher() {
        let t = sieve_primes(200_000).unwrap();
        let m = NoiseModel::rademacher();
        let signs = SeededSigns::new(SEED);
        for &p in t.primes().iter().take(10_000) {
            let s = sign_at(SEED, u64::from(p));
            assert_eq!(s * s, 1);
            assert_eq!(f64::from(s), eta_at(SEED, &m, u64::from(p)));
            assert_eq!(s, signs.sign(u64::from(p)));
        }
    }

    #[test]
    fn gaussian_mean_and_sign_frequency_over_first_1e5_primes() {
        let t = sieve_primes(1_400_000).unwrap();
        let first: Vec<u64> = t.primes()[..100_000].iter().map(|&p| u64::from(p)).collect();
        let g = NoiseModel::gaussian(1.0).unwrap();
        let mean = first.iter().map(|&p| eta_at(SEED, &g, p)).sum::<f64>() / first.len() as f64;
        assert!(mean.abs() <= 4.0 / (1e5f64).sqrt(), "mean = {mean}");

        let plus = first.iter().filter(|&&p| sign_at(SEED, p) == 1).count() as f64 / 1e5;
        assert!((0.494..=0.506).contains(&plus), "freq = {plus}");
    }

    #[test]
    fn sample_variance_within_two_percent() {
        let t = sieve_primes(16_000_000).unwrap();
        let first = &t.primes()[..1_000_000];
        for m in models() {
            let noise = SeededNoise::new(SEED, m);
            let n = first.len() as f64;
            let (mut s1, mut s2) = (0.0, 0.0);
            for &p in first {
                let v = noise.eta(u64::from(p));
                s1 += v;
                s2 += v * v;
            }
            let var = (s2 - s1 * s1 / n) / (n - 1.0);
            assert!((var / m.sigma2 - 1.0).abs() < 0.02, "{m:?}: var = {var}");
        }
    }

    #[test]
    fn no_collisions_among_a_million_keys() {
        let key = SEED.stream_key();
        let mut seen = HashSet::with_capacity(1_000_000);
        for p in 0..1_000_000u64 {
            assert!(seen.insert(bits_for(key, p)));
        }
    }

    #[test]
    fn streams_are_distinct() {
        let a = SeedSpec::new(1, 0);
        let b = SeedSpec::new(1, 1);
        let c = SeedSpec::new(2, 0);
        let same_ab = (2..2000u64).filter(|&p| sign_at(a, p) == sign_at(b, p)).count();
        let same_ac = (2..2000u64).filter(|&p| sign_at(a, p) == sign_at(c, p)).count();
        assert!((900..1100).contains(&same_ab));
        assert!((900..1100).contains(&same_ac));
    }

    #[test]
    fn model_validation() {
        assert!(NoiseModel::gaussian(0.0).is_err());
        assert!(NoiseModel::gaussian(-1.0).is_err());
        assert!(NoiseModel::two_point(1.0, 1.0, 0.5).is_err());
        assert!(NoiseModel::two_point(1.0, -1.0, 1.0).is_err());
        let bad = NoiseModel {
            kind: NoiseKind::TwoPoint { a: 1.0, b: -1.0, q: 0.5 },
            sigma2: 2.0,
        };
        assert!(bad.validate().is_err());
        let tp = NoiseModel::two_point(3.0, -1.0, 0.25).unwrap();
        assert!((tp.sigma2 - 3.0).abs() < 1e-15);
        let scaled = tp.scaled(2.0).unwrap();
        assert!((scaled.sigma2 - 12.0).abs() < 1e-12);
    }

    #[test]
    fn serde_keys() {
        let m = NoiseModel::two_point(3.0, -1.0, 0.25).unwrap();
        let js = serde_json::to_value(m).unwrap();
        assert_eq!(js["kind"]["kind"], "two_point");
        assert_eq!(js["kind"]["q"], 0.25);
        let back: NoiseModel = serde_json::from_value(js).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_moments_at_zero_threshold_equal_variance() {
        for m in models() {
            let full = m.truncated_second_moment(0.0);
            assert!((full - m.sigma2).abs() < 1e-12 * m.sigma2.max(1.0), "{m:?}: {full}");
        }
        let u = NoiseModel::centered_uniform(1.0).unwrap();
        assert_eq!(u.truncated_second_moment(3f64.sqrt()), 0.0);
        assert_eq!(NoiseModel::rademacher().truncated_second_moment(1.0), 0.0);
    }

    #[test]
    fn quantile_symmetry() {
        for u in [1e-12, 1e-6, 0.01, 0.2, 0.4] {
            let a = standard_normal_quantile(u);
            let b = standard_normal_quantile(1.0 - u);
            assert!((a + b).abs() < 1e-6 * a.abs().max(1.0), "u={u}: {a} vs {b}");
        }
        assert!((standard_normal_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
    }
}
