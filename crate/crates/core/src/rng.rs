//! Counter-keyed random streams.
//!
//! Each Monte-Carlo trial draws from independent ChaCha streams keyed by
//! `(seed, trial, role)`, so a trial's randomness does not depend on which
//! worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use num_complex::Complex64;

/// What a stream is used for within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Symbols = 1,
    Channel = 2,
    Noise = 3,
}

pub type Stream = ChaCha12Rng;

pub fn stream(seed: u64, trial: u64, role: Role) -> Stream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(&(role as u64).to_le_bytes());
    key[24..].copy_from_slice(b"topsstbc");
    ChaCha12Rng::from_seed(key)
}

/// Circularly-symmetric complex Gaussian with variance `var` per real part.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, var_per_dim: f64) -> Complex64 {
    let sd = var_per_dim.sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(sd * re, sd * im)
}
