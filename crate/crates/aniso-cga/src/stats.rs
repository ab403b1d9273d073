//! Summary statistics and ordinary least-squares fitting.

use thiserror::Error;

/// Sample summary: mean, sample standard deviation, extremes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// `None` on an empty sample. The standard deviation uses the n-1
    /// denominator and is 0 for a single observation.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { n, mean, std: var.sqrt(), min, max })
    }

    /// Half-width of the normal-approximation 95% confidence interval for
    /// the mean.
    pub fn ci95_half_width(&self) -> f64 {
        1.96 * self.std / (self.n as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation coefficient, in [-1, 1].
    pub correlation: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("all x values coincide; slope is undefined")]
    DegenerateX,
}

/// Ordinary least-squares line through `(x, y)` points.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<RegressionFit, FitError> {
    let n = points.len();
    if n < 2 {
        return Err(FitError::TooFewPoints(n));
    }
    let nf = n as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let den_x = nf * sxx - sx * sx;
    if den_x <= 0.0 {
        return Err(FitError::DegenerateX);
    }
    let cov = nf * sxy - sx * sy;
    let slope = cov / den_x;
    let intercept = (sy - slope * sx) / nf;
    let den_y = nf * syy - sy * sy;
    let correlation = if den_y <= 0.0 { 0.0 } else { cov / (den_x * den_y).sqrt() };
    Ok(RegressionFit { slope, intercept, correlation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn summary_basics() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_abs_diff_eq!(s.mean, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.std, 2.138089935299395, epsilon = 1e-12);
        assert_eq!((s.min, s.max, s.n), (2.0, 9.0, 8));
        assert!(Summary::of(&[]).is_none());
        assert_eq!(Summary::of(&[3.0]).unwrap().std, 0.0);
    }

    #[test]
    fn two_point_fit() {
        let fit = linear_fit(&[(0.0, 1.0), (1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(fit.slope, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.correlation, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_line_has_unit_correlation() {
        let pts: Vec<(f64, f64)> =
            (0..20).map(|i| (i as f64 / 19.0, 1.0 - i as f64 / 19.0)).collect();
        let fit = linear_fit(&pts).unwrap();
        assert_abs_diff_eq!(fit.correlation, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.slope, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert_eq!(linear_fit(&[(1.0, 2.0)]), Err(FitError::TooFewPoints(1)));
        assert_eq!(
            linear_fit(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)]),
            Err(FitError::DegenerateX)
        );
    }
}
