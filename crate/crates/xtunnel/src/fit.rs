//! Ordinary least squares on transformed axes.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when the ordinates have zero variance.
    pub r2: f64,
    pub axes: String,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    fit_with_axes(xs, ys, "y vs x")
}

fn fit_with_axes(xs: &[f64], ys: &[f64], axes: &str) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::FitShape { xs: xs.len(), ys: ys.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * xs.iter().map(|x| x * x).sum::<f64>() {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sres: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sres / syy).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r2, axes: axes.to_string() })
}

/// Fit of `ln|y|` against `1/x`.
pub fn semilog_inverse_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let (u, v) = transformed(xs, ys, |x| 1.0 / x)?;
    fit_with_axes(&u, &v, "ln|y| vs 1/x")
}

/// Fit of `ln|y|` against `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let (u, v) = transformed(xs, ys, f64::ln)?;
    fit_with_axes(&u, &v, "ln|y| vs ln x")
}

fn transformed(xs: &[f64], ys: &[f64], fx: impl Fn(f64) -> f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if xs.len() != ys.len() {
        return Err(Error::FitShape { xs: xs.len(), ys: ys.len() });
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "fit abscissa",
            reason: format!("must be > 0 for a log or inverse axis, got {x}"),
        });
    }
    if let Some(y) = ys.iter().find(|y| !(y.abs() > 0.0) || !y.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "fit ordinate",
            reason: format!("must be nonzero and finite for a log axis, got {y}"),
        });
    }
    Ok((xs.iter().map(|&x| fx(x)).collect(), ys.iter().map(|y| y.abs().ln()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_ordinates_have_unit_r2() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn equal_abscissae_are_degenerate() {
        assert!(matches!(linear_fit(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]), Err(Error::DegenerateFit)));
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(linear_fit(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::FitShape { .. })));
    }
}
