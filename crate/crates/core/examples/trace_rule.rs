//! m_y ≈ Tr(B A) with A = ½ f''(0), for zero-mean x and f(0) = 0.
use taylor_moments::{expr, oracle, taylor, Family, Matrix, StochasticModel};

fn main() -> taylor_moments::Result<()> {
    let f = expr::parse("x1*x2 + cos(x1) - 1 + tanh(x2)^2")?;
    let b = Matrix::from_rows(&[[0.04, 0.01], [0.01, 0.09]])?;
    let model = StochasticModel::validate(vec![0.0, 0.0], b.clone(), Family::Gaussian)?;

    let a = taylor::hessian_to_observable(&f, 2)?;
    println!("A = {:?}", a.matrix().rows());
    println!("Tr(B A)   = {}", taylor::trace_form(&b, &a)?);
    println!("taylor2   = {}", taylor::second_order_mean(&f, &model)?.value());
    let mc = oracle::estimate_mean(&f, &model, 2_000_000, 1)?;
    println!("mc        = {} ± {}", mc.mean, mc.std_error);

    // the rule refuses to run outside its preconditions
    let shifted = StochasticModel::validate(vec![0.1, 0.0], b, Family::Gaussian)?;
    println!("{}", taylor::symmetric_trace_mean(&f, &shifted).unwrap_err());
    Ok(())
}
