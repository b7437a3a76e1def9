//! Run a JSON job in-process; the same thing the CLI does.
use taylor_moments::job::{self, JobConfig};

fn main() -> taylor_moments::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quadratic_trace.json").into());
    let config = JobConfig::load(path.as_ref())?;
    let report = job::run_estimate(&config)?;
    print!("{}", report.to_text());
    Ok(())
}
