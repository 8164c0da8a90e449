//! Sample moments and covariance standard errors.

use crate::summation::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Standard error of `variance`, from the sample fourth central moment.
    pub variance_se: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let m2 = compensated_sum(xs.iter().map(|x| (x - mean).powi(2))) / n;
    let m3 = compensated_sum(xs.iter().map(|x| (x - mean).powi(3))) / n;
    let m4 = compensated_sum(xs.iter().map(|x| (x - mean).powi(4))) / n;
    let variance = m2 * n / (n - 1.0);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Moments {
        mean,
        variance,
        skewness,
        excess_kurtosis,
        variance_se: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
    }
}

/// Sample covariance of two columns and its standard error, the latter
/// estimated from the spread of the centred products.
pub fn covariance_with_se(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let products: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let mean_product = compensated_sum(products.iter().copied()) / n;
    let spread = compensated_sum(products.iter().map(|z| (z - mean_product).powi(2))) / (n - 1.0);
    (mean_product * n / (n - 1.0), (spread / n).sqrt())
}

/// Pivoted Cholesky (LDLᵀ with diagonal pivoting). Returns the pivots in
/// elimination order; a symmetric matrix is positive semidefinite up to
/// rounding when every pivot is `>= -tol`.
pub fn pivoted_cholesky_pivots(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (pos, &j) = remaining
            .iter()
            .enumerate()
            .max_by(|x, y| a[*x.1][*x.1].total_cmp(&a[*y.1][*y.1]))
            .unwrap();
        let d = a[j][j];
        pivots.push(d);
        remaining.swap_remove(pos);
        if d <= 0.0 {
            // nothing left to eliminate against
            for &r in &remaining {
                pivots.push(a[r][r]);
            }
            break;
        }
        for &r in &remaining {
            for &c in &remaining {
                a[r][c] -= a[r][j] * a[j][c] / d;
            }
        }
    }
    pivots
}

pub fn is_psd(matrix: &[Vec<f64>], tol: f64) -> bool {
    pivoted_cholesky_pivots(matrix).iter().all(|&p| p >= -tol)
}
