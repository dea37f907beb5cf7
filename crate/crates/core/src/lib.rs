//! Stabilizer-circuit laboratory for log-depth random encoders.
//!
//! The crate bundles bit-packed GF(2) kernels, a tableau simulator with
//! uniform Clifford sampling, builders for brickwork, double-layer, block and
//! global Clifford encoders, closed-form recovery-error bounds, erasure
//! Monte Carlo, exact second-moment engines and light-cone analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod choi;
pub mod domainwall;
pub mod ensembles;
pub mod error;
pub mod gf2;
pub mod lightcone;
pub mod noise;
pub mod scalar;
pub mod stabilizer;

pub use error::{LabError, Result};

/// Floating scalar used by the sampling and reporting paths.
pub type Real = f64;

/// Exact scalar for the transfer-matrix and lemma checks.
pub type Exact = num_rational::BigRational;

/// Tool version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Name of the generator behind every seeded stream.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Independent random stream `stream` derived from a master seed.
///
/// Work item `i` always draws from stream `i`, so results do not depend on
/// how items are scheduled across workers.
pub fn stream_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
