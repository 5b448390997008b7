//! Executable coincidence, width and waist theorems on triangulated model spaces.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of its
//! inputs: triangulations of round spheres, Euclidean balls and the flat torus,
//! piecewise-linear maps between them, fibers of those maps, zero-cycle
//! bookkeeping, numerical searches for coincidence pairs, and the harnesses that
//! compare fiber sizes against the known lower bounds.
//!
//! File formats, reports and the command line live in the `bulab` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coincidence;
pub mod complexes;
pub mod cyclespace;
pub mod error;
pub mod families;
pub mod generators;
pub mod geomlemmas;
pub mod linalg;
pub mod metrics;
pub mod plmaps;
pub mod waists;
pub mod widths;

pub use error::{Error, Result};

/// Seeded deterministic generator used by every randomized routine.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Build the crate's generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Default absolute tolerance for geometric predicates.
pub const TOL: f64 = 1e-9;
