//! Taylor approximations of `m_y = E f(x)`.
//!
//! * first order: `m_y ≈ f(m_x)`; the linear term averages to zero.
//! * second order: `m_y ≈ f(m_x) + ½ Σ_ij ∂²f/∂x_i∂x_j(m_x) B_ij`.
//! * trace rule: for `m_x = 0` and `f(0) = 0`, `m_y ≈ Tr(B A)` with the
//!   observable `A = ½ f''(0)`.
//!
//! The one-dimensional formulas are the `n = 1` case of the same code.

use crate::autodiff;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg::Matrix;
use crate::model::StochasticModel;

/// Tolerance on `|f(0)|` for the trace rule preconditions.
pub const ZERO_VALUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorEstimate {
    order: u8,
    constant_term: f64,
    correction_term: f64,
    value: f64,
}

impl TaylorEstimate {
    fn new(order: u8, constant_term: f64, correction_term: f64) -> TaylorEstimate {
        TaylorEstimate {
            order,
            constant_term,
            correction_term,
            value: constant_term + correction_term,
        }
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// `f(m_x)`.
    pub fn constant_term(&self) -> f64 {
        self.constant_term
    }

    /// `½ Tr(B f''(m_x))` for order 2, zero for order 1.
    pub fn correction_term(&self) -> f64 {
        self.correction_term
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// The symmetric matrix `A = ½ f''(0)` standing in for `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: Matrix,
}

impl Observable {
    /// Wraps an exactly symmetric matrix.
    pub fn new(matrix: Matrix) -> Result<Observable> {
        if !matrix.is_symmetric() {
            return Err(Error::InvalidArgument(format!(
                "observable must be symmetric (max asymmetry {})",
                matrix.max_asymmetry()
            )));
        }
        Ok(Observable { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

fn check_dims(f: &Expression, model: &StochasticModel) -> Result<()> {
    if f.arity() > model.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.arity(),
            actual: model.dim(),
        });
    }
    Ok(())
}

pub fn first_order_mean(f: &Expression, model: &StochasticModel) -> Result<TaylorEstimate> {
    check_dims(f, model)?;
    Ok(TaylorEstimate::new(1, f.evaluate(model.mean())?, 0.0))
}

pub fn second_order_mean(f: &Expression, model: &StochasticModel) -> Result<TaylorEstimate> {
    check_dims(f, model)?;
    let constant = f.evaluate(model.mean())?;
    let hessian = autodiff::hessian(f, model.mean())?;
    let b = model.covariance();
    let n = model.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += hessian[(i, j)] * b[(i, j)];
        }
    }
    Ok(TaylorEstimate::new(2, constant, 0.5 * sum))
}

/// `A = ½ f''(0)` in dimension `n`.
pub fn hessian_to_observable(f: &Expression, n: usize) -> Result<Observable> {
    let hessian = autodiff::hessian(f, &vec![0.0; n])?;
    Ok(Observable {
        matrix: hessian.scaled(0.5),
    })
}

/// `Tr(B A) = Σ_ij B_ij A_ji`, without forming the product.
pub fn trace_form(b: &Matrix, a: &Observable) -> Result<f64> {
    let n = b.dim();
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.dim(),
        });
    }
    let a = a.matrix();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += b[(i, j)] * a[(j, i)];
        }
    }
    Ok(sum)
}

/// Checks `m_x = 0` exactly and `|f(0)| <= ZERO_VALUE_TOL`.
pub fn check_trace_preconditions(f: &Expression, model: &StochasticModel) -> Result<()> {
    check_dims(f, model)?;
    if let Some(m) = model.mean().iter().find(|&&m| m != 0.0) {
        return Err(Error::Precondition(format!("trace rule needs m_x = 0, found mean entry {m}")));
    }
    let f0 = f.evaluate(model.mean())?;
    if f0.abs() > ZERO_VALUE_TOL {
        return Err(Error::Precondition(format!("trace rule needs f(0) = 0, found f(0) = {f0}")));
    }
    Ok(())
}

/// `m_y ≈ Tr(B_x A)` under `m_x = 0`, `f(0) = 0`.
pub fn symmetric_trace_mean(f: &Expression, model: &StochasticModel) -> Result<f64> {
    check_trace_preconditions(f, model)?;
    trace_form(model.covariance(), &hessian_to_observable(f, model.dim())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::model::Family;
    use approx::assert_abs_diff_eq;

    fn model(mean: &[f64], cov: &[&[f64]]) -> StochasticModel {
        StochasticModel::validate(mean.to_vec(), Matrix::from_rows(cov).unwrap(), Family::Gaussian).unwrap()
    }

    fn p(s: &str) -> Expression {
        parse(s).unwrap()
    }

    #[test]
    fn first_order_examples() {
        let e = first_order_mean(&p("exp(x1)"), &model(&[0.0], &[&[3.0]])).unwrap();
        assert_eq!((e.order(), e.value(), e.correction_term()), (1, 1.0, 0.0));
        assert_eq!(first_order_mean(&p("3*x1 + 2"), &model(&[5.0], &[&[2.0]])).unwrap().value(), 17.0);
        assert_eq!(first_order_mean(&p("x1^2"), &model(&[0.0], &[&[1.0]])).unwrap().value(), 0.0);
        assert!(matches!(first_order_mean(&p("log(x1)"), &model(&[0.0], &[&[1.0]])), Err(Error::Domain(_))));
    }

    #[test]
    fn second_order_examples() {
        let e = second_order_mean(&p("exp(x1)"), &model(&[0.0], &[&[0.1]])).unwrap();
        assert_eq!(e.order(), 2);
        assert_eq!(e.constant_term(), 1.0);
        assert_eq!(e.correction_term(), 0.05);
        assert_eq!(e.value(), 1.05);

        let e = second_order_mean(&p("x1^2 + x1*x2 + 2*x2^2"), &model(&[0.0, 0.0], &[&[1.0, 0.5], &[0.5, 2.0]]))
            .unwrap();
        assert_eq!(e.value(), 5.5);

        let e = second_order_mean(&p("cos(x1) - 1"), &model(&[0.0], &[&[0.1]])).unwrap();
        assert_abs_diff_eq!(e.value(), -0.05, epsilon = 1e-17);
    }

    #[test]
    fn one_dimensional_path_matches_scalar_formula() {
        // m_y ≈ f(m) + σ²/2 f''(m), evaluated bit for bit
        for (src, m, var) in [("exp(x1)", 0.3, 0.7), ("sin(x1)*x1", -1.1, 0.01), ("log(x1)", 2.0, 0.5)] {
            let f = p(src);
            let d2 = autodiff::hessian(&f, &[m]).unwrap()[(0, 0)];
            let want = f.evaluate(&[m]).unwrap() + var / 2.0 * d2;
            let got = second_order_mean(&f, &model(&[m], &[&[var]])).unwrap().value();
            assert_eq!(got.to_bits(), want.to_bits(), "{src}");
        }
    }

    #[test]
    fn observable_examples() {
        assert_eq!(hessian_to_observable(&p("x1^2"), 1).unwrap().matrix().rows(), vec![vec![1.0]]);
        assert_eq!(
            hessian_to_observable(&p("x1*x2"), 2).unwrap().matrix().rows(),
            vec![vec![0.0, 0.5], vec![0.5, 0.0]]
        );
        assert_eq!(hessian_to_observable(&p("sin(x1)"), 1).unwrap().matrix().rows(), vec![vec![0.0]]);
        assert!(hessian_to_observable(&p("log(x1)"), 1).is_err());
    }

    #[test]
    fn trace_form_examples() {
        let i2 = Observable::new(Matrix::identity(2)).unwrap();
        assert_eq!(trace_form(&Matrix::identity(2), &i2).unwrap(), 2.0);
        let b = Matrix::from_rows(&[[1.0, 0.5], [0.5, 2.0]]).unwrap();
        assert_eq!(trace_form(&b, &Observable::new(b.clone()).unwrap()).unwrap(), 5.5);
        assert_eq!(trace_form(&b, &Observable::new(Matrix::zeros(2)).unwrap()).unwrap(), 0.0);
        assert!(matches!(trace_form(&b, &Observable::new(Matrix::identity(3)).unwrap()), Err(Error::DimensionMismatch { .. })));
        assert!(Observable::new(Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()).is_err());
    }

    #[test]
    fn symmetric_trace_examples() {
        for alpha in [0.0, 0.3, 2.0] {
            assert_eq!(symmetric_trace_mean(&p("x1^2"), &model(&[0.0], &[&[alpha]])).unwrap(), alpha);
        }
        assert_eq!(symmetric_trace_mean(&p("sin(x1)"), &model(&[0.0], &[&[0.25]])).unwrap(), 0.0);
        let err = symmetric_trace_mean(&p("exp(x1)"), &model(&[0.0], &[&[0.25]])).unwrap_err();
        assert!(matches!(&err, Error::Precondition(msg) if msg.contains("f(0)")));
        let err = symmetric_trace_mean(&p("x1^2"), &model(&[0.5], &[&[0.25]])).unwrap_err();
        assert!(matches!(&err, Error::Precondition(msg) if msg.contains("m_x")));
    }

    #[test]
    fn trace_rule_equals_second_order_exactly() {
        let f = p("x1*x2 + sin(x1)^2 - tanh(x2)*x1 + x2^4");
        let m = model(&[0.0, 0.0], &[&[0.3, -0.1], &[-0.1, 0.7]]);
        let t = symmetric_trace_mean(&f, &m).unwrap();
        let s = second_order_mean(&f, &m).unwrap();
        assert_eq!(t.to_bits(), s.value().to_bits());
    }

    #[test]
    fn covariance_scaling_is_linear() {
        let f = p("exp(x1)*cos(x2)");
        let b = Matrix::from_rows(&[[0.3, 0.1], [0.1, 0.2]]).unwrap();
        let base = second_order_mean(&f, &StochasticModel::validate(vec![0.2, 0.4], b.clone(), Family::Gaussian).unwrap())
            .unwrap();
        for s in [0.5, 2.0, 4.0] {
            let m = StochasticModel::validate(vec![0.2, 0.4], b.scaled(s), Family::Gaussian).unwrap();
            let e = second_order_mean(&f, &m).unwrap();
            assert_eq!(e.constant_term(), base.constant_term());
            assert_eq!(e.correction_term(), s * base.correction_term());
        }
    }

    #[test]
    fn arity_must_fit_model() {
        let err = second_order_mean(&p("x1 + x3"), &model(&[0.0, 0.0], &[&[1.0, 0.0], &[0.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, actual: 2 }));
    }
}
