//! Deterministic, splittable random streams.
//!
//! Every stream is addressed by a [`StreamKey`] made of a user seed, a stream id
//! (the replication index) and a substream id (the sampling stage). The key is
//! the 256-bit key of a ChaCha8 block function and the block counter is the
//! stream position, so any stream can be derived independently without
//! coordination and replayed bit for bit.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 2^-53, the spacing of the 53-bit uniform grid on [0, 1).
const UNIT_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub stream: u64,
    pub substream: u64,
}

impl StreamKey {
    /// Substream used for drawing the latent measure path.
    pub const LATENT: u64 = 0;
    /// Substream used for drawing observations given the latent path.
    pub const OBSERVED: u64 = 1;
    /// Substream for auxiliary Monte Carlo that is neither stage of a path.
    pub const AUXILIARY: u64 = 2;

    pub const fn new(seed: u64, stream: u64) -> Self {
        Self {
            seed,
            stream,
            substream: Self::LATENT,
        }
    }

    pub const fn with_substream(self, substream: u64) -> Self {
        Self { substream, ..self }
    }

    pub const fn latent(self) -> Self {
        self.with_substream(Self::LATENT)
    }

    pub const fn observed(self) -> Self {
        self.with_substream(Self::OBSERVED)
    }

    pub const fn auxiliary(self) -> Self {
        self.with_substream(Self::AUXILIARY)
    }

    fn chacha_key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream.to_le_bytes());
        key[16..24].copy_from_slice(&self.substream.to_le_bytes());
        key
    }

    /// Opens the stream at position zero.
    pub fn stream(&self) -> Stream {
        Stream {
            source: Source::ChaCha(Box::new(ChaCha8Rng::from_seed(self.chacha_key()))),
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    ChaCha(Box<ChaCha8Rng>),
    #[cfg(any(test, feature = "test-hooks"))]
    Constant(f64),
}

/// A live random stream. Owned by one execution unit at a time.
#[derive(Debug, Clone)]
pub struct Stream {
    source: Source,
}

impl Stream {
    /// A degenerate stream whose every uniform draw is `value`.
    ///
    /// `value` may be 1.0 so the upper edge of every inverse-CDF map can be
    /// exercised.
    #[cfg(any(test, feature = "test-hooks"))]
    pub fn constant(value: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&value),
            "constant stream value must lie in [0, 1]"
        );
        Self {
            source: Source::Constant(value),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        match &mut self.source {
            Source::ChaCha(rng) => rng.next_u64(),
            #[cfg(any(test, feature = "test-hooks"))]
            Source::Constant(v) => (*v * u64::MAX as f64) as u64,
        }
    }

    /// Uniform variate on [0, 1) with 53 bits of resolution.
    pub fn next_uniform(&mut self) -> f64 {
        match &mut self.source {
            Source::ChaCha(rng) => (rng.next_u64() >> 11) as f64 * UNIT_53,
            #[cfg(any(test, feature = "test-hooks"))]
            Source::Constant(v) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid seed {input:?}: expected a decimal or 0x-prefixed hexadecimal u64")]
pub struct ParseSeedError {
    pub input: String,
}

/// Parses a seed written in decimal or as `0x`-prefixed hex. Underscores are
/// accepted as digit separators.
pub fn parse_seed(text: &str) -> Result<u64, ParseSeedError> {
    let cleaned: String = text.trim().chars().filter(|c| *c != '_').collect();
    let parsed = match cleaned
        .strip_prefix("0x")
        .or_else(|| cleaned.strip_prefix("0X"))
    {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => cleaned.parse::<u64>(),
    };
    parsed.map_err(|_| ParseSeedError {
        input: text.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniforms(key: StreamKey, n: usize) -> Vec<f64> {
        let mut s = key.stream();
        (0..n).map(|_| s.next_uniform()).collect()
    }

    #[test]
    fn identical_keys_replay() {
        let k = StreamKey::new(7, 3);
        assert_eq!(uniforms(k, 64), uniforms(k, 64));
    }

    #[test]
    fn uniform_moments() {
        let xs = uniforms(StreamKey::new(11, 0), 100_000);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // 3 * sqrt(1/12 / 1e5)
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.004, "var {var}");
        assert!(xs.iter().all(|x| (0.0..1.0).contains(x)));
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn distinct_keys_are_uncorrelated() {
        let base = StreamKey::new(99, 0);
        let keys = [
            base,
            StreamKey::new(99, 1),
            base.observed(),
            StreamKey::new(100, 0),
        ];
        let draws: Vec<Vec<f64>> = keys.iter().map(|k| uniforms(*k, 10_000)).collect();
        for i in 0..draws.len() {
            for j in (i + 1)..draws.len() {
                let r = correlation(&draws[i], &draws[j]);
                assert!(r.abs() < 0.05, "keys {i},{j}: r = {r}");
            }
        }
    }

    #[test]
    fn latent_and_observed_substreams_differ() {
        let k = StreamKey::new(5, 5);
        assert_ne!(uniforms(k.latent(), 8), uniforms(k.observed(), 8));
    }

    #[test]
    fn seeds_parse_in_both_radices() {
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0x2A").unwrap(), 42);
        assert_eq!(parse_seed("0xffff_ffff_ffff_ffff").unwrap(), u64::MAX);
        assert!(parse_seed("0xg1").is_err());
        assert!(parse_seed("-3").is_err());
        assert!(parse_seed("").is_err());
    }

    #[test]
    fn constant_stream_repeats() {
        let mut s = Stream::constant(0.25);
        assert_eq!(s.next_uniform(), 0.25);
        assert_eq!(s.next_uniform(), 0.25);
    }
}
