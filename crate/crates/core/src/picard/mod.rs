//! Closed-form stochastic objects built from the Gaussian data: the second
//! Picard iterate `Z_N`, its unrenormalized sibling, the limit process `Z`,
//! and their exact second moments.
//!
//! Conventions: `ψ̂(n)` are Fourier coefficients for `dx/2π`, so
//! `⟨f, ψ⟩ = Σ_n f̂(n) conj ψ̂(n)` and
//! `E[⟨Z(t₁),ψ₁⟩⟨Z(t₂),ψ₂⟩] = Σ_n cov(t₁,t₂,n) conj ψ̂₁(n) ψ̂₂(n)`.

pub mod appendix;
pub mod chaos;
mod quadrature;
mod report;

pub use appendix::{
    appendix_covariance_finite, appendix_limit_covariance, appendix_quadratic, appendix_second_iterate,
};
pub use chaos::{contraction_norm, exact_excess_kurtosis, ChaosKernel, PairingKernel};
pub use quadrature::duhamel_quadrature;
pub use report::{CovarianceKind, CovarianceReport, CovarianceRow};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{japanese, ComplexKahan, KahanSum};
use crate::random::{renorm_constant, renorm_sum, GaussianCoefficients};
use crate::spectral::{phi_im, phi_symbol, SpectralField, TestFunction};

const RESONANCE_THRESHOLD: f64 = 1e-6;

/// `∫₀ᵗ e^{−sΔ} ds` for purely imaginary `Δ = i·delta_im`.
pub(crate) fn phase_integral_im(delta_im: f64, t: f64) -> Complex64 {
    let x = t * delta_im;
    if x.abs() < RESONANCE_THRESHOLD {
        // t(1 − z/2 + z²/6 − z³/24) with z = tΔ = ix.
        let z = Complex64::new(0.0, x);
        let z2 = z * z;
        return (Complex64::new(1.0, 0.0) - z * 0.5 + z2 / 6.0 - z2 * z / 24.0) * t;
    }
    // (1 − e^{−ix}) / (i·delta_im)
    (Complex64::new(1.0, 0.0) - Complex64::cis(-x)) / Complex64::new(0.0, delta_im)
}

#[inline]
pub(crate) fn resonance_im(n1: i64, n2: i64) -> f64 {
    phi_im(n1 + n2) - phi_im(n1) - phi_im(n2)
}

/// `J_{n₁,n₂}(t) = ∫₀ᵗ e^{−s(φ(n₁+n₂)−φ(n₁)−φ(n₂))} ds`.
pub fn phase_integral(n1: i64, n2: i64, t: f64) -> Complex64 {
    phase_integral_im(resonance_im(n1, n2), t)
}

/// `⟨n₁⟩^{−α}⟨n₂⟩^{−α}` as a lookup over `|n| ≤ N`.
pub(crate) struct BracketWeights {
    n_max: i64,
    w: Vec<f64>,
}

impl BracketWeights {
    pub(crate) fn new(alpha: f64, n_max: usize) -> Self {
        let w = (0..=n_max as i64).map(|n| japanese(n).powf(-alpha)).collect();
        Self { n_max: n_max as i64, w }
    }

    #[inline]
    pub(crate) fn get(&self, n: i64) -> f64 {
        self.w[n.unsigned_abs() as usize]
    }

    /// Index range of `n₁` with `|n₁| ≤ N` and `|n − n₁| ≤ N`.
    #[inline]
    pub(crate) fn pair_range(&self, n: i64) -> std::ops::RangeInclusive<i64> {
        (n - self.n_max).max(-self.n_max)..=(n + self.n_max).min(self.n_max)
    }
}

fn require_bound(have: usize, needed: usize) -> Result<()> {
    if have < needed {
        Err(Error::GridTooSmall { needed, have })
    } else {
        Ok(())
    }
}

fn require_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")))
    }
}

/// `Ẑ_N(t,n) = C²_{α,N} e^{tφ(n)} φ(n) Σ_{n₁+n₂=n} J_{n₁,n₂}(t) g_{n₁}g_{n₂} ⟨n₁⟩^{−α}⟨n₂⟩^{−α}`.
///
/// Direct `O(N²)` double loop. The output lives on the grid of `g`, which must
/// retain `|n| ≤ 2N`.
pub fn second_iterate(g: &GaussianCoefficients, alpha: f64, n_max: usize, t: f64) -> Result<SpectralField> {
    require_time(t)?;
    require_bound(g.mode_bound(), 2 * n_max)?;
    let c2 = renorm_constant(alpha, n_max).powi(2);
    let w = BracketWeights::new(alpha, n_max);
    let n = n_max as i64;
    Ok(SpectralField::from_fn(g.as_field().grid(), |k| {
        if k == 0 || k > 2 * n {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = ComplexKahan::new();
        for n1 in w.pair_range(k) {
            let n2 = k - n1;
            let weight = w.get(n1) * w.get(n2);
            acc.add(phase_integral(n1, n2, t) * g.get(n1) * g.get(n2) * weight);
        }
        acc.value() * phi_symbol(k) * Complex64::cis(t * phi_im(k)) * c2
    }))
}

/// `𝔉_N = C^{−2}_{α,N} Z_N`, the iterate built from unrenormalized data.
pub fn divergent_iterate(g: &GaussianCoefficients, alpha: f64, n_max: usize, t: f64) -> Result<SpectralField> {
    let z = second_iterate(g, alpha, n_max, t)?;
    Ok(&z * renorm_constant(alpha, n_max).powi(-2))
}

/// `Ẑ(t,n) = ζ̂(n)(1 − e^{tφ(n)})`.
pub fn limit_convolution(zeta: &SpectralField, t: f64) -> Result<SpectralField> {
    require_time(t)?;
    Ok(SpectralField::from_fn(zeta.grid(), |n| {
        zeta.mode(n) * (Complex64::new(1.0, 0.0) - Complex64::cis(t * phi_im(n)))
    }))
}

/// `E[Ẑ_N(t₁,n) conj Ẑ_N(t₂,n)]`, exact.
///
/// Equals `2C⁴|φ(n)|² Σ_{n₁+n₂=n} A(t₁)conj A(t₂) ⟨n₁⟩^{−2α}⟨n₂⟩^{−2α}` with
/// `A(r) = e^{rφ(n)} J_{n₁,n₂}(r)`. `O(N)` per call; zero for `n = 0`.
pub fn covariance_finite(alpha: f64, n_max: usize, t1: f64, t2: f64, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = BracketWeights::new(alpha, n_max);
    let c4 = renorm_sum(alpha, n_max).recip();
    covariance_finite_with(&w, c4, t1, t2, n)
}

fn covariance_finite_with(w: &BracketWeights, c4: f64, t1: f64, t2: f64, n: i64) -> Complex64 {
    let mut acc = ComplexKahan::new();
    for n1 in w.pair_range(n) {
        let n2 = n - n1;
        let d = resonance_im(n1, n2);
        let weight = (w.get(n1) * w.get(n2)).powi(2);
        acc.add(phase_integral_im(d, t1) * phase_integral_im(d, t2).conj() * weight);
    }
    let phase = Complex64::cis((t1 - t2) * phi_im(n));
    acc.value() * phase * (2.0 * c4 * phi_im(n).powi(2))
}

/// `E[⟨Z_N(t₁),ψ₁⟩⟨Z_N(t₂),ψ₂⟩]`.
pub fn pairing_covariance_finite(
    alpha: f64,
    n_max: usize,
    t1: f64,
    t2: f64,
    psi1: &TestFunction,
    psi2: &TestFunction,
) -> f64 {
    let w = BracketWeights::new(alpha, n_max);
    let c4 = renorm_sum(alpha, n_max).recip();
    let mut acc = KahanSum::new();
    for n in psi1.support() {
        if n == 0 || n.unsigned_abs() as usize > 2 * n_max {
            continue;
        }
        let weight = psi1.mode(n).conj() * psi2.mode(n);
        if weight.norm() == 0.0 {
            continue;
        }
        acc.add((covariance_finite_with(&w, c4, t1, t2, n) * weight).re);
    }
    acc.value()
}

/// `(1 − e^{t₁φ(n)})(1 − e^{−t₂φ(n)})`, the covariance of `Ẑ(t₁,n)` and `Ẑ(t₂,n)`.
pub fn covariance_limit(t1: f64, t2: f64, n: i64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (one - Complex64::cis(t1 * phi_im(n))) * (one - Complex64::cis(-t2 * phi_im(n)))
}

/// `E[⟨Z(t₁),ψ₁⟩⟨Z(t₂),ψ₂⟩]` in the limit.
pub fn pairing_covariance_limit(t1: f64, t2: f64, psi1: &TestFunction, psi2: &TestFunction) -> f64 {
    psi1.support()
        .into_iter()
        .filter(|&n| n != 0)
        .map(|n| (covariance_limit(t1, t2, n) * psi1.mode(n).conj() * psi2.mode(n)).re)
        .sum()
}

/// `C⁴_{α,N} Σ_{n₁+n₂=n, |nᵢ|≤N} 2⟨n₁⟩^{−2α}⟨n₂⟩^{−2α}`.
pub fn c_alpha_partial(alpha: f64, n_max: usize, n: i64) -> f64 {
    let w = BracketWeights::new(alpha, n_max);
    let mut acc = KahanSum::new();
    for n1 in w.pair_range(n) {
        acc.add(2.0 * (w.get(n1) * w.get(n - n1)).powi(2));
    }
    acc.value() / renorm_sum(alpha, n_max)
}
