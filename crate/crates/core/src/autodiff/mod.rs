//! Exact gradients and Hessians by forward-mode propagation.
//!
//! Gradients use one dual-number pass per coordinate. Each Hessian entry
//! `(i, j)` with `i <= j` comes from one hyper-dual pass seeded on `x_i` and
//! `x_j`, and is written to both `(i, j)` and `(j, i)`, so the result is
//! symmetric bit for bit.

mod dual;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg::Matrix;
use dual::{Dual, HyperDual};

/// Value, gradient and Hessian of an expression at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

pub fn gradient(f: &Expression, point: &[f64]) -> Result<Vec<f64>> {
    f.check_len(point.len())?;
    let mut seeds: Vec<Dual> = point.iter().map(|&v| Dual { v, d: 0.0 }).collect();
    let mut slots = Vec::new();
    let mut out = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        seeds[i].d = 1.0;
        out.push(f.run(&seeds, &mut slots)?.d);
        seeds[i].d = 0.0;
    }
    Ok(out)
}

pub fn hessian(f: &Expression, point: &[f64]) -> Result<Matrix> {
    Ok(derivatives(f, point)?.hessian)
}

/// Value, gradient and Hessian from `n(n+1)/2` hyper-dual passes.
///
/// Points with `n == 0` still evaluate `f` once for the value.
pub fn derivatives(f: &Expression, point: &[f64]) -> Result<Derivatives> {
    f.check_len(point.len())?;
    let n = point.len();
    let mut seeds: Vec<HyperDual> = point
        .iter()
        .map(|&v| HyperDual { v, a: 0.0, b: 0.0, ab: 0.0 })
        .collect();
    let mut slots = Vec::new();
    let mut gradient = vec![0.0; n];
    let mut hessian = Matrix::zeros(n);
    let mut value = if n == 0 { Some(f.run(&seeds, &mut slots)?.v) } else { None };
    for i in 0..n {
        for j in i..n {
            seeds[i].a = 1.0;
            seeds[j].b = 1.0;
            let r = f.run(&seeds, &mut slots)?;
            seeds[i].a = 0.0;
            seeds[j].b = 0.0;
            if i == j {
                gradient[i] = r.a;
            }
            value.get_or_insert(r.v);
            hessian[(i, j)] = r.ab;
            hessian[(j, i)] = r.ab;
        }
    }
    Ok(Derivatives {
        value: value.expect("set on first pass"),
        gradient,
        hessian,
    })
}

/// Discrepancies between forward-mode derivatives and central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub max_gradient_abs: f64,
    pub max_hessian_abs: f64,
    /// Largest `|ad - fd| / (1 + |ad|)` over gradient entries.
    pub max_gradient_scaled: f64,
    /// Largest `|ad - fd| / (1 + |ad|)` over Hessian entries.
    pub max_hessian_scaled: f64,
}

/// Compares [`derivatives`] against central finite differences with step `h`.
///
/// Gradient: `(f(x+h e_i) - f(x-h e_i)) / 2h`. Hessian: the four-point cross
/// stencil `(f(++) - f(+-) - f(-+) + f(--)) / 4h²`, which for `i == j`
/// reduces to a second difference with step `2h`.
pub fn fd_check(f: &Expression, point: &[f64], h: f64) -> Result<FdReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step h = {h} must be positive")));
    }
    let exact = derivatives(f, point)?;
    let n = point.len();
    let mut x = point.to_vec();
    let eval_shifted = |x: &mut Vec<f64>, moves: &[(usize, f64)]| -> Result<f64> {
        for &(k, s) in moves {
            x[k] += s;
        }
        let v = f.evaluate(x);
        x.copy_from_slice(point);
        v
    };

    let mut report = FdReport {
        max_gradient_abs: 0.0,
        max_hessian_abs: 0.0,
        max_gradient_scaled: 0.0,
        max_hessian_scaled: 0.0,
    };
    for i in 0..n {
        let fd = (eval_shifted(&mut x, &[(i, h)])? - eval_shifted(&mut x, &[(i, -h)])?) / (2.0 * h);
        let d = (fd - exact.gradient[i]).abs();
        report.max_gradient_abs = report.max_gradient_abs.max(d);
        report.max_gradient_scaled = report.max_gradient_scaled.max(d / (1.0 + exact.gradient[i].abs()));
    }
    for i in 0..n {
        for j in i..n {
            let pp = eval_shifted(&mut x, &[(i, h), (j, h)])?;
            let pm = eval_shifted(&mut x, &[(i, h), (j, -h)])?;
            let mp = eval_shifted(&mut x, &[(i, -h), (j, h)])?;
            let mm = eval_shifted(&mut x, &[(i, -h), (j, -h)])?;
            let fd = (pp - pm - mp + mm) / (4.0 * h * h);
            let ad = exact.hessian[(i, j)];
            let d = (fd - ad).abs();
            report.max_hessian_abs = report.max_hessian_abs.max(d);
            report.max_hessian_scaled = report.max_hessian_scaled.max(d / (1.0 + ad.abs()));
        }
    }
    Ok(report)
}
