//! Photon-pair generation in random nonlinear layered structures.
//!
//! The crate follows one pipeline:
//!
//! 1. [`structure`] draws a random stack of LiNbO₃ / SiO₂ layers with
//!    quarter-wave mean optical thickness and jittered boundaries.
//! 2. [`tmm`] solves the linear optics (s-polarised transfer matrices),
//!    giving transmission spectra, internal field amplitudes and
//!    localization lengths.
//! 3. [`spdc`] builds the two-photon spectral amplitude φ(ω_s, ω_i) from the
//!    pump pulse and the per-layer overlap of pump, signal and idler modes.
//! 4. [`analysis`] measures transmission peaks, ensemble width statistics,
//!    Schmidt decompositions, Hong–Ou–Mandel visibility and wave-packet
//!    durations.
//! 5. [`synthesis`] superposes amplitudes emitted into different angles.
//!
//! Units: lengths are nanometres, angular frequencies rad/s and angles
//! degrees unless a name says otherwise.

pub mod analysis;
pub mod error;
pub mod materials;
pub mod seed;
pub mod spdc;
pub mod structure;
pub mod synthesis;
pub mod tmm;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None`.
///
/// All parallel reductions in this crate collect into index-ordered vectors
/// before reducing, so results do not depend on the worker count.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
