//! Distribution testing when every sample arrives labelled by the representative
//! of an unknown cluster.
//!
//! The crate is organised by layer:
//! [`domain`] (metrics, distributions, exact TV/EMD), [`oracle`] (clusterings,
//! generators, the SAMP/LABEL session), [`cells`] (cell discovery and rejection),
//! [`adversarial`] (diameter-guarded testers), [`analysis`] and [`random`]
//! (random path/cycle clusterings) and [`experiment`] (seeded harness).

pub mod adversarial;
pub mod analysis;
pub mod cells;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod random;
pub mod stats;

pub use error::{CoreError, Result};

/// Deterministic RNG used everywhere a seed is accepted.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
