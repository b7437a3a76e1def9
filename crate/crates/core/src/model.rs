//! Random vectors described by mean, covariance and a sampling family.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_psd, Matrix};
use crate::rng::{Stream, CHUNK_SIZE};

/// Off-diagonal magnitude below which a covariance counts as diagonal.
pub const DIAGONAL_TOL: f64 = 1e-12;

/// How coordinates are drawn. All families reproduce the declared mean and
/// covariance exactly in expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `m + L z`, `z` standard normal, `L Lᵀ = B`.
    Gaussian,
    /// Each coordinate independently `m_i ± σ_i` with probability ½.
    SymmetricTwoPoint,
    /// Each coordinate independently uniform on `m_i ± σ_i √3`.
    Uniform,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::SymmetricTwoPoint, Family::Uniform];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::SymmetricTwoPoint => "symmetric-two-point",
            Family::Uniform => "uniform",
        }
    }

    /// Whether coordinates are drawn independently (diagonal covariance only).
    pub fn diagonal_only(self) -> bool {
        !matches!(self, Family::Gaussian)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown family {s:?}")))
    }
}

/// A validated random vector `x` with mean `m_x` and covariance `B_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticModel {
    mean: Vec<f64>,
    covariance: Matrix,
    family: Family,
    factor: Matrix,
    symmetrized: bool,
}

impl StochasticModel {
    /// Checks dimensions, symmetrizes `covariance` as `(B + Bᵀ)/2`, and
    /// verifies it is PSD with a tolerant Cholesky factorization.
    pub fn validate(mean: Vec<f64>, covariance: Matrix, family: Family) -> Result<StochasticModel> {
        let n = mean.len();
        if covariance.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: covariance.dim(),
            });
        }
        if let Some(bad) = mean.iter().chain(covariance.as_slice()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite entry {bad}")));
        }
        let symmetrized = !covariance.is_symmetric();
        let covariance = if symmetrized { covariance.symmetrized() } else { covariance };
        if family.diagonal_only() {
            if let Some((row, col, value)) = covariance.first_off_diagonal(DIAGONAL_TOL) {
                return Err(Error::FamilyConstraint {
                    family: family.name(),
                    row,
                    col,
                    value,
                });
            }
        }
        let factor = cholesky_psd(&covariance)?;
        Ok(StochasticModel {
            mean,
            covariance,
            family,
            factor,
            symmetrized,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// True when the input covariance was not exactly symmetric and was
    /// replaced by its symmetric part.
    pub fn was_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// `σ_i = sqrt(B_ii)`.
    pub fn std_dev(&self, i: usize) -> f64 {
        self.covariance[(i, i)].sqrt()
    }

    /// Lower-triangular `L` with `L Lᵀ = B`; zero columns where `B` is singular.
    pub fn cholesky_factor(&self) -> &Matrix {
        &self.factor
    }

    pub(crate) fn sampler(&self) -> Sampler<'_> {
        let n = self.dim();
        Sampler {
            model: self,
            sigma: (0..n).map(|i| self.std_dev(i)).collect(),
            z: vec![0.0; n],
        }
    }

    /// Draws `count` points. Point `k` is a function of `(seed, k)` only.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        let n = self.dim();
        let mut values = vec![0.0; count * n];
        if n > 0 {
            values
                .par_chunks_mut(CHUNK_SIZE * n)
                .enumerate()
                .for_each(|(chunk, out)| {
                    let mut s = self.sampler();
                    let mut stream = Stream::new(seed, chunk as u64);
                    for point in out.chunks_exact_mut(n) {
                        s.draw(&mut stream, point);
                    }
                });
        }
        Ok(SampleBatch {
            values,
            dim: n,
            seed,
            count,
        })
    }
}

/// Reusable per-thread sampling state.
pub(crate) struct Sampler<'a> {
    model: &'a StochasticModel,
    sigma: Vec<f64>,
    z: Vec<f64>,
}

impl Sampler<'_> {
    /// Writes the next point of `stream` into `out` (length `dim`).
    #[inline]
    pub(crate) fn draw(&mut self, stream: &mut Stream, out: &mut [f64]) {
        let m = &self.model.mean;
        match self.model.family {
            Family::Gaussian => {
                for z in self.z.iter_mut() {
                    *z = stream.standard_normal();
                }
                let l = &self.model.factor;
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &l.row(i)[..=i];
                    let dot: f64 = row.iter().zip(&self.z).map(|(a, b)| a * b).sum();
                    *o = m[i] + dot;
                }
            }
            Family::SymmetricTwoPoint => {
                for (i, o) in out.iter_mut().enumerate() {
                    let s = self.sigma[i];
                    *o = if stream.next_u64() >> 63 == 0 { m[i] - s } else { m[i] + s };
                }
            }
            Family::Uniform => {
                for (i, o) in out.iter_mut().enumerate() {
                    let half = self.sigma[i] * 3f64.sqrt();
                    *o = m[i] + half * (2.0 * stream.open01() - 1.0);
                }
            }
        }
    }
}

/// `count` points of dimension `dim`, regenerable from `(model, count, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    values: Vec<f64>,
    dim: usize,
    seed: u64,
    count: usize,
}

impl SampleBatch {
    /// Builds a batch from explicit points, all of the same dimension.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P], seed: u64) -> Result<SampleBatch> {
        let dim = points.first().map_or(0, |p| p.as_ref().len());
        let mut values = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.len(),
                });
            }
            values.extend_from_slice(p);
        }
        Ok(SampleBatch {
            values,
            dim,
            seed,
            count: points.len(),
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }
}
