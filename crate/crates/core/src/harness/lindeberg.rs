use crate::dirichlet::{prime_power, sum_over_primes};
use crate::error::{invalid, Result};
use crate::noise::NoiseModel;
use crate::primes::PrimeTable;

/// For each shift `a`:
/// `(1/norm) Σ_{p<=P} p^{-1-2a} E[η² ; |η| > eps p^{1/2+a} sqrt(norm)]`,
/// with the truncated second moment taken in closed form for the model.
pub fn lindeberg_profile(
    table: &PrimeTable,
    model: &NoiseModel,
    shifts: &[f64],
    eps: f64,
    cutoff: u64,
    norm: f64,
) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be > 0, got {eps}")));
    }
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid(format!("norm must be finite and > 0, got {norm}")));
    }
    if shifts.iter().any(|&a| !(a >= 0.0)) {
        return Err(invalid("shifts must be >= 0"));
    }
    model.validate()?;
    let primes = table.up_to(cutoff)?;
    let root = norm.sqrt();
    Ok(shifts
        .iter()
        .map(|&a| {
            let sum: f64 = sum_over_primes(primes, |p| {
                let threshold = eps * prime_power(p, -(0.5 + a)) * root;
                let m = model.truncated_second_moment(threshold);
                if m == 0.0 {
                    0.0
                } else {
                    prime_power(p, 1.0 + 2.0 * a) * m
                }
            });
            sum / norm
        })
        .collect())
}
