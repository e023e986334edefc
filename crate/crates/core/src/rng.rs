//! Deterministic, splittable random streams.
//!
//! Every Monte Carlo routine in this crate draws from an [`RngStream`]
//! keyed by `(seed, stream_id)`. Trials derive per-index substreams, so a
//! result is a pure function of the seed and the trial index, independent
//! of scheduling or worker count. ChaCha12 is the backing generator: its
//! output is platform-independent and supports cheap stream selection and
//! 128-bit positioning.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::math;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seeded random stream with an explicit position counter.
///
/// Identical `(seed, stream_id, counter)` triples produce identical draws
/// on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// 128-bit position within the stream.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Derive an independent substream; a pure function of
    /// `(seed, stream_id, index)`, regardless of this stream's position.
    pub fn substream(&self, index: u64) -> RngStream {
        let mut state = self.stream_id ^ index.wrapping_mul(GOLDEN_GAMMA);
        RngStream::new(self.seed, splitmix64(&mut state))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from (0, 1]; safe as a logarithm argument.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Uniform draw from [lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * math::PI * u2)
    }

    /// Uniform direction on the unit sphere in `dim` dimensions.
    pub fn unit_direction(&mut self, dim: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), dim);
        loop {
            for x in out.iter_mut() {
                *x = self.standard_normal();
            }
            let n = math::norm(out);
            if n > 1e-12 {
                for x in out.iter_mut() {
                    *x /= n;
                }
                return;
            }
        }
    }

    /// Uniform draw from the closed ball of the given radius: a uniform
    /// direction scaled by `radius * u^(1/dim)`. No rejection loop.
    pub fn uniform_ball(&mut self, dim: usize, radius: f64, out: &mut [f64]) {
        self.unit_direction(dim, out);
        let r = radius * math::powf(self.uniform(), 1.0 / dim as f64);
        for x in out.iter_mut() {
            *x *= r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn same_key_same_draws() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_are_position_independent() {
        let mut parent = RngStream::new(1, 2);
        let before: Vec<u64> = {
            let mut s = parent.substream(5);
            (0..4).map(|_| s.next_u64()).collect()
        };
        parent.next_u64();
        parent.next_u64();
        let after: Vec<u64> = {
            let mut s = parent.substream(5);
            (0..4).map(|_| s.next_u64()).collect()
        };
        assert_eq!(before, after);
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(0, 0);
        let mut b = RngStream::new(0, 1);
        let va: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let vb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(va, vb);
    }

    #[test]
    fn counter_advances() {
        let mut s = RngStream::new(3, 4);
        let c0 = s.counter();
        s.next_u64();
        assert!(s.counter() > c0);
    }

    #[test]
    fn normal_moments() {
        let mut s = RngStream::new(9, 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let z = s.standard_normal();
            sum += z;
            sum2 += z * z;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(math::abs(mean) < 0.01);
        assert!(math::abs(var - 1.0) < 0.02);
    }

    #[test]
    fn ball_draws_stay_inside() {
        let mut s = RngStream::new(5, 5);
        let mut buf = vec![0.0; 3];
        for _ in 0..1000 {
            s.uniform_ball(3, 0.25, &mut buf);
            assert!(math::norm(&buf) <= 0.25 + 1e-12);
        }
    }
}
