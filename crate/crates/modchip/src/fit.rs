//! Weighted least-squares fitting: linear models in closed form and a small
//! Levenberg-Marquardt driver for the nonlinear fits (Ramsey fringes, Rabi
//! transfer curves, RB decays, relaxation probes).
//!
//! Parameter covariance is `(J^T W J)^{-1}`. With per-point sigmas given it
//! is reported as-is (absolute-sigma convention, so pull distributions
//! against known sigmas come out standard normal); without sigmas it is
//! scaled by the reduced chi-square to set the scale from the residuals.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("singular fit: {0}")]
    Singular(String),
    #[error("not enough data points: have {have}, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("fit diverged: {0}")]
    Diverged(String),
}

pub type Result<T> = std::result::Result<T, FitError>;

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct Fit {
    pub params: Vec<f64>,
    /// Parameter covariance matrix (already chi-square scaled).
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub dof: usize,
}

impl Fit {
    pub fn param_err(&self, i: usize) -> f64 {
        self.covariance[(i, i)].max(0.0).sqrt()
    }
}

/// Weighted linear least squares, `y ~ sum_k params[k] * basis[k](x_i)`.
///
/// `design[i]` is the row of basis-function values at point `i`. When
/// `sigma` is `None` all points carry unit weight.
pub fn linear_least_squares(
    design: &[Vec<f64>],
    y: &[f64],
    sigma: Option<&[f64]>,
) -> Result<Fit> {
    let n = design.len();
    if n == 0 || n != y.len() {
        return Err(FitError::InsufficientData { have: n.min(y.len()), need: 1 });
    }
    let p = design[0].len();
    if n < p {
        return Err(FitError::InsufficientData { have: n, need: p });
    }
    let j = DMatrix::from_fn(n, p, |i, k| design[i][k]);
    let w = weights(sigma, n)?;
    let jtw = j.transpose() * DMatrix::from_diagonal(&w);
    let jtwj = &jtw * &j;
    let rhs = &jtw * DVector::from_column_slice(y);
    let inv = jtwj
        .try_inverse()
        .ok_or_else(|| FitError::Singular("normal equations are singular".into()))?;
    let params = &inv * rhs;
    let resid = DVector::from_column_slice(y) - &j * &params;
    let chi2: f64 = resid.iter().zip(w.iter()).map(|(r, wi)| r * r * wi).sum();
    let dof = n - p;
    let scale = if sigma.is_none() && dof > 0 {
        (chi2 / dof as f64).max(f64::MIN_POSITIVE)
    } else {
        1.0
    };
    Ok(Fit { params: params.iter().copied().collect(), covariance: inv * scale, chi2, dof })
}

fn weights(sigma: Option<&[f64]>, n: usize) -> Result<DVector<f64>> {
    match sigma {
        None => Ok(DVector::from_element(n, 1.0)),
        Some(s) => {
            if s.len() != n {
                return Err(FitError::Singular("sigma length mismatch".into()));
            }
            if s.iter().any(|&x| x <= 0.0) {
                return Err(FitError::Singular("non-positive sigma".into()));
            }
            Ok(DVector::from_iterator(n, s.iter().map(|&x| 1.0 / (x * x))))
        }
    }
}

/// Options for [`levenberg_marquardt`].
#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative chi-square improvement falls below this.
    pub tolerance: f64,
    /// Optional per-parameter (lower, upper) clamps applied after each step.
    pub bounds: Vec<(f64, f64)>,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, tolerance: 1e-12, bounds: Vec::new() }
    }
}

/// Levenberg-Marquardt for `y ~ model(params, x)` with numeric Jacobian.
pub fn levenberg_marquardt(
    model: impl Fn(&[f64], f64) -> f64,
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    initial: &[f64],
    opts: &LmOptions,
) -> Result<Fit> {
    let n = x.len();
    let p = initial.len();
    if n != y.len() || n < p {
        return Err(FitError::InsufficientData { have: n, need: p });
    }
    let w = weights(sigma, n)?;
    let clamp = |params: &mut [f64]| {
        for (k, &(lo, hi)) in opts.bounds.iter().enumerate() {
            if k < params.len() {
                params[k] = params[k].clamp(lo, hi);
            }
        }
    };

    let chi2_of = |params: &[f64]| -> f64 {
        x.iter()
            .zip(y.iter())
            .zip(w.iter())
            .map(|((&xi, &yi), &wi)| {
                let r = yi - model(params, xi);
                r * r * wi
            })
            .sum()
    };

    let jacobian = |params: &[f64]| -> DMatrix<f64> {
        let mut j = DMatrix::zeros(n, p);
        for k in 0..p {
            let h = 1e-7 * params[k].abs().max(1e-7);
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            plus[k] += h;
            minus[k] -= h;
            for i in 0..n {
                j[(i, k)] = (model(&plus, x[i]) - model(&minus, x[i])) / (2.0 * h);
            }
        }
        j
    };

    let mut params = initial.to_vec();
    clamp(&mut params);
    let mut chi2 = chi2_of(&params);
    if !chi2.is_finite() {
        return Err(FitError::Diverged("initial model evaluation not finite".into()));
    }
    let mut lambda = 1e-3;

    for _ in 0..opts.max_iterations {
        let j = jacobian(&params);
        let wd = DMatrix::from_diagonal(&w);
        let jtw = j.transpose() * &wd;
        let jtwj = &jtw * &j;
        let resid = DVector::from_iterator(
            n,
            x.iter().zip(y.iter()).map(|(&xi, &yi)| yi - model(&params, xi)),
        );
        let grad = &jtw * &resid;

        let mut improved = false;
        for _ in 0..24 {
            let mut damped = jtwj.clone();
            for k in 0..p {
                damped[(k, k)] += lambda * jtwj[(k, k)].max(1e-30);
            }
            let Some(step) = damped.clone().lu().solve(&grad) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = params.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
            clamp(&mut trial);
            let trial_chi2 = chi2_of(&trial);
            if trial_chi2.is_finite() && trial_chi2 <= chi2 {
                let rel = (chi2 - trial_chi2) / chi2.max(1e-300);
                params = trial;
                chi2 = trial_chi2;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < opts.tolerance {
                    let dof = n - p;
                    return finish(jacobian(&params), &w, params, chi2, dof, sigma.is_none());
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    let dof = n - p;
    finish(jacobian(&params), &w, params, chi2, dof, sigma.is_none())
}

fn finish(
    j: DMatrix<f64>,
    w: &DVector<f64>,
    params: Vec<f64>,
    chi2: f64,
    dof: usize,
    scale_by_chi2: bool,
) -> Result<Fit> {
    let jtwj = j.transpose() * DMatrix::from_diagonal(w) * &j;
    let inv = jtwj
        .try_inverse()
        .ok_or_else(|| FitError::Singular("curvature matrix is singular at the optimum".into()))?;
    let scale = if scale_by_chi2 && dof > 0 { (chi2 / dof as f64).max(f64::MIN_POSITIVE) } else { 1.0 };
    Ok(Fit { params, covariance: inv * scale, chi2, dof })
}
