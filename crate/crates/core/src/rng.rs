//! Deterministic random streams.
//!
//! Every stream is ChaCha8 (`rand_chacha::ChaCha8Rng`) keyed by
//! `seed_from_u64(seed)`, with the ChaCha stream id set to the chunk index.
//! ChaCha is a counter-based generator, so chunk `k` can be produced
//! independently of all other chunks and the concatenated output never
//! depends on how chunks are scheduled.
//!
//! Uniforms take the top 53 bits of one `u64` and land on the open interval
//! `(0, 1)`; normals are the inverse CDF of such a uniform (Wichura's AS241,
//! accurate to about 1e-16).

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Samples per chunk. Changing this changes every generated stream.
pub const CHUNK_SIZE: usize = 1 << 14;

pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64, chunk: u64) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        Stream(rng)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `(0, 1)`: `(k + 0.5) / 2^53` for the top 53 bits `k`.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.open01())
    }
}

/// Derives an independent seed for sub-job `index` of a job seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a golden-ratio increment
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// AS241 coefficients, highest power first.
#[allow(clippy::excessive_precision)]
mod as241 {
    pub(super) const CENTRAL_NUM: [f64; 8] = [
        2.5090809287301226727e+3,
        3.3430575583588128105e+4,
        6.7265770927008700853e+4,
        4.5921953931549871457e+4,
        1.3731693765509461125e+4,
        1.9715909503065514427e+3,
        1.3314166789178437745e+2,
        3.3871328727963666080e+0,
    ];

    pub(super) const CENTRAL_DEN: [f64; 8] = [
        5.2264952788528545610e+3,
        2.8729085735721942674e+4,
        3.9307895800092710610e+4,
        2.1213794301586595867e+4,
        5.3941960214247511077e+3,
        6.8718700749205790830e+2,
        4.2313330701600911252e+1,
        1.0,
    ];

    pub(super) const NEAR_NUM: [f64; 8] = [
        7.74545014278341407640e-4,
        2.27238449892691845833e-2,
        2.41780725177450611770e-1,
        1.27045825245236838258e+0,
        3.64784832476320460504e+0,
        5.76949722146069140550e+0,
        4.63033784615654529590e+0,
        1.42343711074968357734e+0,
    ];

    pub(super) const NEAR_DEN: [f64; 8] = [
        1.05075007164441684324e-9,
        5.47593808499534494600e-4,
        1.51986665636164571966e-2,
        1.48103976427480074590e-1,
        6.89767334985100004550e-1,
        1.67638483018380384940e+0,
        2.05319162663775882187e+0,
        1.0,
    ];

    pub(super) const FAR_NUM: [f64; 8] = [
        2.01033439929228813265e-7,
        2.71155556874348757815e-5,
        1.24266094738807843860e-3,
        2.65321895265761230930e-2,
        2.96560571828504891230e-1,
        1.78482653991729133580e+0,
        5.46378491116411436990e+0,
        6.65790464350110377720e+0,
    ];

    pub(super) const FAR_DEN: [f64; 8] = [
        2.04426310338993978564e-15,
        1.42151175831644588870e-7,
        1.84631831751005468180e-5,
        7.86869131145613259100e-4,
        1.48753612908506148525e-2,
        1.36929880922735805310e-1,
        5.99832206555887937690e-1,
        1.0,
    ];
}

#[inline]
fn horner(c: &[f64; 8], r: f64) -> f64 {
    c[1..].iter().fold(c[0], |acc, &k| acc * r + k)
}

/// Standard normal quantile for `p` in `(0, 1)` (Wichura 1988, AS241 PPND16).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return horner(&as241::CENTRAL_NUM, r) * q / horner(&as241::CENTRAL_DEN, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        horner(&as241::NEAR_NUM, r) / horner(&as241::NEAR_DEN, r)
    } else {
        let r = r - 5.0;
        horner(&as241::FAR_NUM, r) / horner(&as241::FAR_DEN, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}
