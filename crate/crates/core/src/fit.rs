//! Least-squares rate estimation on log-log data.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("rate fit needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("rate fit needs strictly positive data (x[{i}] = {x}, y[{i}] = {y})")]
    NonPositive { i: usize, x: f64, y: f64 },
    #[error("rate fit needs distinct abscissae")]
    DegenerateAbscissae,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RateFit {
    /// Exponent p in y ~ C x^p.
    pub slope: f64,
    /// ln C.
    pub intercept: f64,
    /// Coefficient of determination of the log-log fit.
    pub r_squared: f64,
}

/// Fits `y ~ C x^p` by least squares on `(ln x, ln y)` and returns `p`,
/// `ln C`, and `R^2`.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit, FitError> {
    assert_eq!(xs.len(), ys.len(), "fit_rate length mismatch");
    let n = xs.len();
    if n < 2 {
        return Err(FitError::TooFewPoints(n));
    }
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if !(x > 0.0 && y > 0.0) {
            return Err(FitError::NonPositive { i, x, y });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(FitError::DegenerateAbscissae);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exact_power_law() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|&x: &f64| 3.7 * x.powf(1.5)).collect();
        let fit = fit_rate(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, 1.5, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 3.7_f64.ln(), epsilon = 1e-10);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonpositive_values() {
        assert!(matches!(
            fit_rate(&[0.1, 0.2], &[1.0, 0.0]),
            Err(FitError::NonPositive { .. })
        ));
    }

    #[test]
    fn rejects_repeated_abscissae() {
        assert!(matches!(
            fit_rate(&[0.1, 0.1], &[1.0, 2.0]),
            Err(FitError::DegenerateAbscissae)
        ));
    }
}
