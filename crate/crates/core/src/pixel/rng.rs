use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Seeded, counter-based random stream.
///
/// Backed by ChaCha8, whose output for a given seed is fixed across platforms.
/// Independent substreams for parallel work are derived with [`RngState::substream`].
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream keyed by `(seed, index)`; the result does not depend on any other stream's state.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::new(mix(seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub(crate) fn inner_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

/// SplitMix64 finalizer over the seed combined with the stream index.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n` i.i.d. samples from `N(mu, sigma^2)`.
pub fn sample_gaussian(rng: &mut RngState, mu: f64, sigma: f64, n: usize) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Param(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if !mu.is_finite() {
        return Err(Error::Param(format!("mu must be finite, got {mu}")));
    }
    Ok((0..n).map(|_| mu + sigma * rng.standard_normal()).collect())
}
