//! Monte Carlo ground truth for `E f(x)` and `B_x`.
//!
//! The sample stream is split into fixed chunks of [`CHUNK_SIZE`] points;
//! chunk `k` is generated from its own counter-based substream and reduced
//! with Welford's update. Chunk statistics are merged strictly in chunk
//! order, so the result does not depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::batch::LANES;
use crate::expr::Expression;
use crate::linalg::Matrix;
use crate::model::{SampleBatch, StochasticModel};
use crate::rng::{Stream, CHUNK_SIZE};

/// Monte Carlo mean of `f(x)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation (denominator `count - 1`) over `√count`;
    /// zero when `count == 1`.
    pub std_error: f64,
    pub count: u64,
    pub seed: u64,
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines two disjoint summaries (Chan et al. pairwise update).
    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / count as f64;
        RunningStats {
            count,
            mean: self.mean + delta * weight,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * weight,
        }
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Thread-count control for [`estimate_mean_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct McOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

pub fn chunk_count(count: u64) -> u64 {
    count.div_ceil(CHUNK_SIZE as u64)
}

/// Statistics of `f` over chunk `chunk` of the stream for `(model, count, seed)`.
pub fn estimate_chunk(
    f: &Expression,
    model: &StochasticModel,
    count: u64,
    seed: u64,
    chunk: u64,
) -> Result<RunningStats> {
    let start = chunk * CHUNK_SIZE as u64;
    let end = (start + CHUNK_SIZE as u64).min(count);
    let n = model.dim();
    let mut sampler = model.sampler();
    let mut stream = Stream::new(seed, chunk);
    let mut points = vec![0.0; LANES * n];
    let mut lanes = vec![[0.0; LANES]; n];
    let mut batch = f.batch();
    let mut slots = Vec::new();
    let mut stats = RunningStats::default();
    let mut index = start;
    while index < end {
        let len = (end - index).min(LANES as u64) as usize;
        for (l, p) in points.chunks_exact_mut(n.max(1)).take(len).enumerate() {
            sampler.draw(&mut stream, &mut p[..n]);
            for (lane, &x) in lanes.iter_mut().zip(p.iter()) {
                lane[l] = x;
            }
        }
        if let Some(values) = batch.eval(&lanes, len) {
            values[..len].iter().for_each(|&y| stats.push(y));
        } else {
            // some lane fails: redo the batch pointwise to find the first
            for l in 0..len {
                let p = &points[l * n..(l + 1) * n];
                match f.evaluate_into(p, &mut slots) {
                    Ok(y) => stats.push(y),
                    Err(source) => {
                        return Err(Error::SampleDomain {
                            index: index + l as u64,
                            point: p.to_vec(),
                            source,
                        })
                    }
                }
            }
        }
        index += len as u64;
    }
    Ok(stats)
}

fn finish(stats: RunningStats, seed: u64) -> McEstimate {
    McEstimate {
        mean: stats.mean,
        std_error: stats.sample_variance().sqrt() / (stats.count as f64).sqrt(),
        count: stats.count,
        seed,
    }
}

/// Folds chunk summaries in order; the first failing chunk wins.
pub fn merge_chunks(chunks: impl IntoIterator<Item = Result<RunningStats>>, seed: u64) -> Result<McEstimate> {
    let mut total = RunningStats::default();
    for c in chunks {
        total = total.merge(&c?);
    }
    Ok(finish(total, seed))
}

pub fn estimate_mean(f: &Expression, model: &StochasticModel, count: u64, seed: u64) -> Result<McEstimate> {
    estimate_mean_with(f, model, count, seed, McOptions::default())
}

pub fn estimate_mean_with(
    f: &Expression,
    model: &StochasticModel,
    count: u64,
    seed: u64,
    options: McOptions,
) -> Result<McEstimate> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if f.arity() > model.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.arity(),
            actual: model.dim(),
        });
    }
    let run = || -> Vec<Result<RunningStats>> {
        (0..chunk_count(count))
            .into_par_iter()
            .map(|k| estimate_chunk(f, model, count, seed, k))
            .collect()
    };
    let chunks = match options.workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
    };
    merge_chunks(chunks, seed)
}

/// Sample mean and unbiased (`count - 1`) sample covariance.
pub fn empirical_covariance(batch: &SampleBatch) -> Result<(Vec<f64>, Matrix)> {
    let count = batch.count();
    if count < 2 {
        return Err(Error::InsufficientSamples(count));
    }
    let n = batch.dim();
    let mut mean = vec![0.0; n];
    for p in batch.points() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= count as f64;
    }
    let mut cov = Matrix::zeros(n);
    let mut centered = vec![0.0; n];
    for p in batch.points() {
        for ((c, x), m) in centered.iter_mut().zip(p).zip(&mean) {
            *c = x - m;
        }
        for i in 0..n {
            for j in i..n {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    let denom = (count - 1) as f64;
    for i in 0..n {
        for j in i..n {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((mean, cov))
}
