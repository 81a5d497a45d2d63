//! Deterministic, splittable random streams.
//!
//! Each [`RngStream`] is a counter-based generator: the `i`-th 64-bit output
//! is a fixed bijective mix of `(key, i)`, where the key is derived from
//! `(master_seed, stream_id)`. Output therefore depends on nothing but those
//! two integers and the number of draws already taken, on every platform.
//!
//! Floating-point transforms go through `libm` so that Gaussian draws are
//! bit-identical across targets as well.

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0x632B_E59B_D9B4_E019;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic stream of uniform and Gaussian variates.
///
/// A stream must not be shared between workers; derive one per worker with a
/// distinct `stream_id` instead. Cloning snapshots the full state, so a clone
/// replays exactly the same variates as the original.
#[derive(Debug, Clone, PartialEq)]
pub struct RngStream {
    key: u64,
    counter: u64,
    stream_id: u64,
    spare_normal: Option<f64>,
}

impl RngStream {
    /// Derives the stream labelled `stream_id` from `master_seed`.
    pub fn derive(master_seed: u64, stream_id: u64) -> Self {
        let seed_key = mix64(master_seed.wrapping_add(GOLDEN));
        let id_key = mix64(stream_id.wrapping_mul(GOLDEN).wrapping_add(STREAM_SALT));
        RngStream {
            key: mix64(seed_key ^ id_key.rotate_left(17)),
            counter: 0,
            stream_id,
            spare_normal: None,
        }
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 64-bit words consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let c = self.counter;
        self.counter = self.counter.wrapping_add(1);
        let z = mix64(self.key.wrapping_add(c.wrapping_mul(GOLDEN)));
        mix64(z ^ self.key.rotate_left(32))
    }

    /// Uniform draw on `[0, 1)` with 53 random mantissa bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `[lo, hi)`; `lo == hi` yields `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        if lo == hi {
            return Ok(lo);
        }
        Ok(self.uniform_unchecked(lo, hi))
    }

    /// Uniform draw on `[lo, hi)` for a range already known to be valid and
    /// non-empty.
    #[inline]
    pub(crate) fn uniform_unchecked(&mut self, lo: f64, hi: f64) -> f64 {
        loop {
            let x = lo + (hi - lo) * self.next_f64();
            // rounding can land exactly on `hi`
            if x < hi {
                return x;
            }
        }
    }

    /// Standard normal draw via Box–Muller. Both outputs of each transform are
    /// used, cosine branch first.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.standard_normal();
        }
    }

    pub(crate) fn fill_uniform(&mut self, out: &mut [f64], lo: f64, hi: f64) {
        for v in out {
            *v = self.uniform_unchecked(lo, hi);
        }
    }
}

/// Free-function form of [`RngStream::derive`].
pub fn derive_stream(master_seed: u64, stream_id: u64) -> RngStream {
    RngStream::derive(master_seed, stream_id)
}
