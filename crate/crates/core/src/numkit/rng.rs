//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`SimRng`] derived from one
//! [`RngSeed`]. Stream `k` of a seed is `ChaCha8Rng::seed_from_u64(seed)`
//! with `set_stream(k)`; parallel workers each own one stream, so results
//! do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::State;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Stream 0 of this seed.
    pub fn rng(self) -> SimRng {
        self.stream(0)
    }

    pub fn stream(self, stream: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

/// Draws from the isotropic Gaussian `(pi R)^{-d/2} exp(-<X,X>/R)`, whose
/// components have variance `R/2`.
pub fn gaussian_sample<G: Rng + ?Sized>(rng: &mut G, r: f64, dim: usize) -> Result<State> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "Gaussian width R must be > 0, got {r}"
        )));
    }
    Ok(gaussian_unchecked(rng, (0.5 * r).sqrt(), dim))
}

#[inline]
pub(crate) fn gaussian_unchecked<G: Rng + ?Sized>(rng: &mut G, std: f64, dim: usize) -> State {
    let mut s = State::zeros(dim);
    for c in s.as_mut_slice() {
        let z: f64 = rng.sample(StandardNormal);
        *c = std * z;
    }
    s
}
