//! Spectra of semicircular mixtures `H = A ∘ X`: a random nonnegative
//! symmetric variance profile `A` applied entrywise to a matrix `X` of free
//! circular elements.
//!
//! The analytic path computes the operator-valued Cauchy transform
//! `G(zI)` by fixed-point iteration ([`solver`]), averages it over random
//! profiles ([`montecarlo`]) and inverts it to a density ([`spectral`]).
//! [`moments`] and [`clt`] evaluate moments combinatorially, and [`rmt`]
//! simulates block-Gaussian matrices to compare against.

pub mod clt;
pub mod domain;
pub mod error;
pub mod moments;
pub mod montecarlo;
pub mod pairing;
mod rng;
pub mod rmt;
pub mod sampler;
pub mod solver;
pub mod spectral;

pub use domain::{uniform_grid, ComplexDiagonal, SolverSettings, SpectralCurve, VarianceProfile};
pub use error::{Error, Result};
pub use faer;
pub use num_complex::Complex64;
pub use sampler::{EntryLaw, EntryOverride, ProfileLaw, ProfileSampler, ProfileSource};
