//! Seeded Monte Carlo mean of f(x) with its standard error.
use std::time::Instant;

use taylor_moments::{expr, oracle, Family, Matrix, StochasticModel};

fn main() -> taylor_moments::Result<()> {
    let f = expr::parse("x1^2 + x1^4")?;
    let model = StochasticModel::validate(vec![0.0], Matrix::diagonal(&[0.1]), Family::Gaussian)?;
    let count = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000_000);
    let t = Instant::now();
    let est = oracle::estimate_mean(&f, &model, count, 7)?;
    // E[x^2 + x^4] = σ² + 3σ⁴
    println!("mean      {}", est.mean);
    println!("exact     {}", 0.1 + 3.0 * 0.01);
    println!("std_error {}", est.std_error);
    println!("count     {}  ({:.2?})", est.count, t.elapsed());
    Ok(())
}
