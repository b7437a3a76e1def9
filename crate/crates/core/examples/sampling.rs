//! Validate a covariance, factor it, and draw from each sampling family.
use taylor_moments::{oracle, Family, Matrix, StochasticModel};

fn main() -> taylor_moments::Result<()> {
    let mean = vec![1.0, -0.5];
    let full = Matrix::from_rows(&[[0.5, 0.2], [0.2, 0.3]])?;

    let gauss = StochasticModel::validate(mean.clone(), full.clone(), Family::Gaussian)?;
    println!("cholesky factor: {:?}", gauss.cholesky_factor().rows());

    // rank-deficient covariances are fine: the zero pivot is clamped
    let rank_one = StochasticModel::validate(vec![0.0, 0.0], Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]])?, Family::Gaussian)?;
    let pts = rank_one.sample(3, 0)?;
    println!("rank one draws: {:?}", pts.points().collect::<Vec<_>>());

    // non-gaussian families need a diagonal covariance
    match StochasticModel::validate(mean.clone(), full, Family::Uniform) {
        Err(e) => println!("uniform with correlation: {e}"),
        Ok(_) => unreachable!(),
    }

    let diag = Matrix::diagonal(&[0.5, 0.3]);
    for family in Family::ALL {
        let cov = if family.diagonal_only() { diag.clone() } else { gauss.covariance().clone() };
        let model = StochasticModel::validate(mean.clone(), cov, family)?;
        let batch = model.sample(200_000, 42)?;
        let (m, b) = oracle::empirical_covariance(&batch)?;
        println!("{family:>20}: mean {m:.4?} cov {:.4?}", b.rows());
    }
    Ok(())
}
