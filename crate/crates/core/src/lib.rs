//! Spectral simulation and verification toolkit for the frequency-truncated
//! quintic nonlinear Schrödinger equation on the torus with Gaussian random
//! initial data.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: modes, spectral fields, cutoffs, norms, grid transforms and
//!   the dealiased quintic nonlinearity.
//! - [`random`]: sampling of the Gaussian measure `μ_s` with reproducible
//!   counter-keyed streams.
//! - [`resonance`]: resonance-function arithmetic, constrained tuple
//!   enumeration, pairing classification and lattice-counting audits.
//! - [`energetics`]: the modified energy, the decomposition of its time
//!   derivative, the correctors `Ψ`, `Ψ̃` and the cancellation identities.
//! - [`dynamics`]: time integration of the truncated flow, conservation
//!   monitoring and finite-difference energy derivatives.
//! - [`experiments`]: Monte Carlo studies built on the modules above.
//!
//! Heavy reductions go through [`exec`], which splits work into fixed-size
//! chunks and combines per-chunk compensated sums in chunk order, so results
//! are bit-identical for every thread count and for the sequential fallback
//! (build without the default `parallel` feature).

pub mod dynamics;
pub mod energetics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod lattice;
pub mod params;
pub mod random;
pub mod report;
pub mod resonance;
pub mod sum;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
pub use lattice::{CutoffProfile, Mode, ModeSet, SpectralField};
pub use num_complex::Complex64;
pub use params::ModelParams;

/// Default enumeration budget (tuple visits) before a scan is aborted.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
