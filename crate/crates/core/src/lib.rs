//! Spectral simulation of the periodic Benjamin–Bona–Mahony equation
//!
//! ```text
//! ∂ₜu − ∂ₜₓₓu + ∂ₓu + ∂ₓ(u²) = 0,   x ∈ 𝕋 = ℝ/2πℤ
//! ```
//!
//! written in first-order form `∂ₜu = φ(D)u + φ(D)(u²)` with the bounded
//! multiplier `φ(n) = −in/(1+n²)`, driven by rough Gaussian random data or
//! stochastic forcing.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: Hermitian Fourier fields, the multiplier and its group,
//!   dealiased products, norms and pairings.
//! * [`random`]: seeded samplers for the random data, white noise and the
//!   Wiener-integral stochastic convolution, plus the renormalization constant.
//! * [`picard`]: closed-form second Picard iterates, covariances, chaos
//!   contraction norms and the space-time-noise objects.
//! * [`solvers`]: RK4 and integrating-factor Euler–Maruyama time stepping for
//!   every equation variant.
//! * [`stats`]: Monte Carlo orchestration, moment and Gaussianity tests,
//!   two-sample Kolmogorov–Smirnov, scaling fits.
//! * [`experiments`]: canned, config-driven experiments with gated reports.
//!
//! Fourier coefficients use the normalized measure `dx/2π`, so
//! `f̂(n) = (1/2π)∫ f e^{−inx} dx` and Plancherel carries no `2π` factors.

pub mod error;
pub mod experiments;
pub mod numerics;
pub mod picard;
pub mod random;
pub mod solvers;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
