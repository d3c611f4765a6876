//! Least-squares fits used by the studies and the counting-law check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, StarkError};

/// Slope, intercept and RMS residual of `y ≈ a x + b`.
pub fn linear(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let rows: Vec<Vec<f64>> = points.iter().map(|&(x, _)| vec![x, 1.0]).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    match least_squares(&rows, &ys) {
        Ok((c, r)) => (c[0], c[1], r),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    }
}

/// Solves `min ‖A c − y‖₂` by SVD; returns the coefficients and the RMS residual.
pub fn least_squares(rows: &[Vec<f64>], ys: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m < n || n == 0 || ys.len() != m {
        return Err(StarkError::MalformedInput(format!("least squares with {m} rows and {n} unknowns")));
    }
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(ys);
    let c = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| StarkError::NonConvergence(format!("least squares: {e}")))?;
    let r = (&a * &c - &y).norm() / (m as f64).sqrt();
    Ok((c.iter().copied().collect(), r))
}

#[cfg(test)]
mod tests {
    #[test]
    fn recovers_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 2.5 * k as f64 - 1.0)).collect();
        let (a, b, r) = super::linear(&pts);
        assert!((a - 2.5).abs() < 1e-13 && (b + 1.0).abs() < 1e-13 && r < 1e-13);
    }
}
