//! Exact gradient and Hessian by forward-mode AD, checked against finite differences.
use taylor_moments::{autodiff, expr};

fn main() -> taylor_moments::Result<()> {
    let f = expr::parse("exp(x1) * sin(x2) + x1 * x2^3")?;
    let p = [0.3, -0.7];
    let d = autodiff::derivatives(&f, &p)?;
    println!("f        = {}", d.value);
    println!("gradient = {:?}", d.gradient);
    for row in d.hessian.rows() {
        println!("hessian  | {row:?}");
    }
    println!("symmetric: {}", d.hessian.is_symmetric());

    for h in [1e-3, 1e-4, 1e-5] {
        let r = autodiff::fd_check(&f, &p, h)?;
        println!("h = {h:e}: |Δgrad| {:.2e}  |Δhess| {:.2e}", r.max_gradient_abs, r.max_hessian_abs);
    }
    Ok(())
}
