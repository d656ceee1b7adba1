//! Counter-addressed random streams.
//!
//! Every draw is a pure function of (seed, stream, index): ensembles and
//! pulse trains can be sampled in any order, chunked, or evaluated in
//! parallel and still come out bit-identical. Streams sharing a seed are
//! kept apart by folding the stream tag into the state derivation.

use std::f64::consts::TAU;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const INDEX_SCRAMBLE: u64 = 0xA076_1D64_78BD_642F;

/// splitmix64 finalizer; bijective with full avalanche.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw streams in use across the library. Discriminants are part of the
/// reproducibility contract: renumbering changes every sampled value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Gaussian detuning of a down-converted pair.
    Detuning = 1,
    /// Uniform birth phase of a down-converted pair.
    BirthPhase = 2,
    /// Photon number of a pulse.
    PulseCount = 3,
    /// Per-photon and per-pair routing decisions inside a pulse.
    Routing = 4,
}

/// One stream positioned at one counter value. Draws after construction
/// advance an internal splitmix64 sequence, so a variable number of
/// uniforms per (seed, stream, index) key stays reproducible.
#[derive(Clone, Debug)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    /// Two mixing rounds over the packed triple keep neighbouring keys
    /// statistically unrelated in either seed, stream, or index.
    pub fn at(seed: u64, stream: Stream, index: u64) -> Self {
        let keyed = mix64(seed ^ (stream as u64).wrapping_mul(GOLDEN));
        let state = mix64(keyed ^ index.wrapping_mul(INDEX_SCRAMBLE));
        CounterRng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1]; safe under ln().
    fn next_f64_open_zero(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller (cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        let radius = (-2.0 * self.next_f64_open_zero().ln()).sqrt();
        let angle = TAU * self.next_f64();
        radius * angle.cos()
    }

    /// Poisson(mean) by Knuth's product method, chunked so the e^-mean
    /// threshold never underflows for large means.
    pub fn next_poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean.is_finite() && mean > 0.0);
        const CHUNK: f64 = 16.0;
        let mut remaining = mean;
        let mut total = 0u64;
        while remaining > CHUNK {
            total += self.poisson_step(CHUNK);
            remaining -= CHUNK;
        }
        total + self.poisson_step(remaining)
    }

    fn poisson_step(&mut self, lambda: f64) -> u64 {
        let limit = (-lambda).exp();
        let mut count = 0u64;
        let mut product = 1.0;
        loop {
            product *= self.next_f64_open_zero();
            if product <= limit {
                return count;
            }
            count += 1;
        }
    }
}
