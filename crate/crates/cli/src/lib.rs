//! Experiment engine behind the `helmfov` command line tool: solver setup,
//! the four studies (Laplace FOV sweep, GMRES iteration sweep, perturbation
//! decay, two-level stagnation), the scalar stability-bound check, and the
//! CSV/SVG writers they share.

pub mod config;
pub mod experiments;
pub mod setup;
pub mod svg;

/// Least-squares line fit with the coefficient of determination.
#[derive(Debug, Clone, Copy)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "fit needs at least two points");
    let n = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xbar).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xbar) * (b - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (slope * a + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinFit { slope, intercept, r2 }
}
