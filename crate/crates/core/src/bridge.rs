//! Small-dispersion limit of classical averages.
//!
//! With `B = α ρ`, `Tr ρ = 1`, `f(0) = 0`, the classical mean `E f(x)`
//! divided by `α` tends to `Tr(ρ A)` with `A = ½ f''(0)` as `α → 0`, and the
//! gap closes linearly in `α`. [`convergence_scan`] measures that gap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg::{cholesky_psd, Matrix};
use crate::model::{Family, StochasticModel};
use crate::oracle::{self, McOptions};
use crate::rng::derive_seed;
use crate::taylor::{self, Observable};

/// Tolerance for symmetry and unit trace of a density analog.
pub const DENSITY_TOL: f64 = 1e-12;

/// Default dispersion scales, halving from 0.2.
pub const DEFAULT_ALPHAS: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

/// Upper bound on the Monte Carlo count of a single row.
pub const DEFAULT_ROW_CAP: u64 = 100_000_000;

/// A unit-trace symmetric PSD matrix `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityAnalog {
    rho: Matrix,
}

impl DensityAnalog {
    /// Rejects matrices that are not symmetric, PSD, and of unit trace; the
    /// matrix is never rescaled.
    pub fn new(rho: Matrix) -> Result<DensityAnalog> {
        let asym = rho.max_asymmetry();
        if asym > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("not symmetric (max asymmetry {asym})")));
        }
        let rho = rho.symmetrized();
        let trace = rho.trace();
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace is {trace}, expected 1")));
        }
        cholesky_psd(&rho).map_err(|e| Error::InvalidDensity(e.to_string()))?;
        Ok(DensityAnalog { rho })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

/// `Tr(ρ A)`.
pub fn quantum_average(rho: &DensityAnalog, a: &Observable) -> Result<f64> {
    taylor::trace_form(rho.matrix(), a)
}

/// Zero-mean model with covariance `α ρ`.
pub fn make_alpha_model(rho: &DensityAnalog, alpha: f64, family: Family) -> Result<StochasticModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be positive")));
    }
    StochasticModel::validate(vec![0.0; rho.dim()], rho.matrix().scaled(alpha), family)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub alpha: f64,
    /// Monte Carlo estimate of `E f(x)` under `B = α ρ`.
    pub classical_mean: f64,
    /// `classical_mean / alpha`.
    pub rescaled: f64,
    /// `Tr(ρ A)`.
    pub quantum_value: f64,
    /// `|rescaled - quantum_value|`.
    pub gap: f64,
    /// Standard error of `classical_mean` (not rescaled).
    pub mc_std_error: f64,
    pub mc_count: u64,
    pub seed: u64,
}

impl ConvergenceRow {
    /// True when the gap exceeds four standard errors of `rescaled`.
    pub fn gap_resolved(&self) -> bool {
        self.gap > 4.0 * self.mc_std_error / self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub family: Family,
    /// Per-row count is `ceil(base_count / α²)`, capped at `row_cap`.
    pub row_cap: u64,
    pub mc: McOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            family: Family::Gaussian,
            row_cap: DEFAULT_ROW_CAP,
            mc: McOptions::default(),
        }
    }
}

pub fn row_count(base_count: u64, alpha: f64, cap: u64) -> u64 {
    let scaled = (base_count as f64 / (alpha * alpha)).ceil();
    if scaled >= cap as f64 {
        cap
    } else {
        (scaled as u64).max(1)
    }
}

/// Gaussian scan with the default row cap.
pub fn convergence_scan(
    f: &Expression,
    rho: &DensityAnalog,
    alphas: &[f64],
    count: u64,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    convergence_scan_with(f, rho, alphas, count, seed, ScanOptions::default())
}

/// One row per `α`: the classical mean under `α ρ` next to `Tr(ρ A)`.
/// Row `r` uses seed `derive_seed(seed, r)`.
pub fn convergence_scan_with(
    f: &Expression,
    rho: &DensityAnalog,
    alphas: &[f64],
    count: u64,
    seed: u64,
    options: ScanOptions,
) -> Result<Vec<ConvergenceRow>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("alphas must be nonempty".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let n = rho.dim();
    if f.arity() > n {
        return Err(Error::DimensionMismatch {
            expected: f.arity(),
            actual: n,
        });
    }
    let f0 = f.evaluate(&vec![0.0; n])?;
    if f0.abs() > taylor::ZERO_VALUE_TOL {
        return Err(Error::Precondition(format!("scan needs f(0) = 0, found f(0) = {f0}")));
    }
    let quantum_value = quantum_average(rho, &taylor::hessian_to_observable(f, n)?)?;
    alphas
        .iter()
        .enumerate()
        .map(|(r, &alpha)| {
            let model = make_alpha_model(rho, alpha, options.family)?;
            let mc_count = row_count(count, alpha, options.row_cap);
            let row_seed = derive_seed(seed, r as u64);
            let est = oracle::estimate_mean_with(f, &model, mc_count, row_seed, options.mc)?;
            let rescaled = est.mean / alpha;
            Ok(ConvergenceRow {
                alpha,
                classical_mean: est.mean,
                rescaled,
                quantum_value,
                gap: (rescaled - quantum_value).abs(),
                mc_std_error: est.std_error,
                mc_count,
                seed: row_seed,
            })
        })
        .collect()
}

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` if any value is not positive.
pub fn fit_log_log(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.iter().chain(ys).any(|&v| v.is_nan() || v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}
