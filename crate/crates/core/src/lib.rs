//! Moment propagation through smooth functions of random vectors.
//!
//! An [`Expression`] `f` over `x1..xn` is pushed through a
//! [`StochasticModel`] (mean `m`, covariance `B`, sampling family) three ways:
//! the first and second order Taylor means, the trace rule `Tr(B A)` with
//! `A = ½ f''(0)`, and a seeded Monte Carlo oracle. [`bridge`] scans the
//! small-dispersion limit `B = α ρ`.
//!
//! ```
//! use taylor_moments::{expr, linalg::Matrix, model::{Family, StochasticModel}, taylor};
//!
//! let f = expr::parse("exp(x1)").unwrap();
//! let model = StochasticModel::validate(vec![0.0], Matrix::diagonal(&[0.1]), Family::Gaussian).unwrap();
//! assert_eq!(taylor::second_order_mean(&f, &model).unwrap().value(), 1.05);
//! ```

pub mod autodiff;
pub mod bridge;
pub mod error;
pub mod expr;
pub mod job;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod taylor;

pub use error::{Category, Error, Result};
pub use expr::Expression;
pub use linalg::Matrix;
pub use model::{Family, StochasticModel};
