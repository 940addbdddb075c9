//! Random walks on the cyclic group Z/G_n whose step set is the first `n`
//! terms of a linear-recurrence sequence.
//!
//! The crate computes, for the walk `X_{t+1} = X_t + z_t mod G_n` with
//! `z_t` uniform on `{G_1, ..., G_n}`:
//!
//! - the exact sequence window in arbitrary precision ([`recurrence`]),
//! - the full circulant spectrum and its SLEM ([`spectrum`]),
//! - exact distributions, total-variation distance and mixing times ([`walk`]),
//! - closed-form mixing-time bounds and their proof diagnostics ([`bounds`]),
//! - numerical checks of the eigenvalue lemmas ([`verify`]),
//! - seeded Monte Carlo trajectories ([`montecarlo`]).
//!
//! All logarithms are natural logarithms.

pub mod bounds;
mod error;
pub mod montecarlo;
pub mod recurrence;
pub mod spectrum;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use recurrence::{GrowthEstimate, Preset, RecurrenceSpec, SequenceWindow};
pub use spectrum::{Spectrum, UnnormalizedEigenvalue};
pub use walk::{Distribution, MixingResult};

/// Default cap on the number of states for which dense vectors (spectra,
/// distributions) are materialised.
pub const DEFAULT_MAX_STATES: u64 = 1 << 24;
