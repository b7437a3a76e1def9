//! Parse an expression, print its canonical form and evaluate it.
use taylor_moments::expr;

fn main() {
    let src = std::env::args().nth(1).unwrap_or_else(|| "x1^2 + sin(x2) * exp(-x1)".into());
    let f = match expr::parse(&src) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    println!("canonical: {f}");
    println!("arity:     {}", f.arity());
    let point: Vec<f64> = (1..=f.arity()).map(|i| 0.25 * i as f64).collect();
    match f.evaluate(&point) {
        Ok(v) => println!("f({point:?}) = {v}"),
        Err(e) => println!("f({point:?}): {e}"),
    }
    // domain errors are values, not NaNs
    println!("log(x1) at 0: {}", expr::parse("log(x1)").unwrap().evaluate(&[0.0]).unwrap_err());
}
