//! First and second order means next to the exact answer for f = exp(x1).
use taylor_moments::{expr, taylor, Family, Matrix, StochasticModel};

fn main() -> taylor_moments::Result<()> {
    let f = expr::parse("exp(x1)")?;
    println!("{:>8} {:>10} {:>14} {:>14} {:>12}", "var", "taylor1", "taylor2", "exact", "error/(v²/8)");
    for var in [0.4, 0.2, 0.1, 0.05, 0.025] {
        let model = StochasticModel::validate(vec![0.0], Matrix::diagonal(&[var]), Family::Gaussian)?;
        let t1 = taylor::first_order_mean(&f, &model)?;
        let t2 = taylor::second_order_mean(&f, &model)?;
        let exact = (var / 2.0).exp();
        let ratio = (exact - t2.value()) / (var * var / 8.0);
        println!("{var:>8} {:>10} {:>14.10} {:>14.10} {ratio:>12.4}", t1.value(), t2.value(), exact);
    }

    // the split into f(m) and ½ Tr(B f''(m))
    let g = expr::parse("x1^2 + x1*x2 + 2*x2^2")?;
    let model = StochasticModel::validate(vec![1.0, 0.0], Matrix::from_rows(&[[1.0, 0.5], [0.5, 2.0]])?, Family::Gaussian)?;
    let e = taylor::second_order_mean(&g, &model)?;
    println!("\n{g}: {} = {} + {}", e.value(), e.constant_term(), e.correction_term());
    Ok(())
}
