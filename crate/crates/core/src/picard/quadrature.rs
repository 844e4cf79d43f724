use num_complex::Complex64;

use super::{require_bound, require_time};
use crate::error::Result;
use crate::numerics::adaptive_simpson;
use crate::random::{renormalized_truncated_data, GaussianCoefficients};
use crate::spectral::{phi_im, phi_symbol, semigroup_apply, square, SpectralField};

/// `∫₀ᵗ S(t−s)φ(D)(z_N(s)²) ds` by adaptive Simpson in `s`, with the square
/// formed by a dealiased transform at every node.
///
/// Independent of the closed form in [`super::second_iterate`]; costs one
/// transform per integrand evaluation and mode, so it is meant for `N ≤ 8`.
pub fn duhamel_quadrature(
    g: &GaussianCoefficients,
    alpha: f64,
    n_max: usize,
    t: f64,
    tol: f64,
) -> Result<SpectralField> {
    require_time(t)?;
    require_bound(g.mode_bound(), 2 * n_max)?;
    let data = renormalized_truncated_data(g, alpha, n_max)?;
    let top = 2 * n_max as i64;
    Ok(SpectralField::from_fn(g.as_field().grid(), |k| {
        if k == 0 || k > top {
            return Complex64::new(0.0, 0.0);
        }
        let integrand = |s: f64| square(&semigroup_apply(&data, s)).mode(k) * Complex64::cis((t - s) * phi_im(k));
        adaptive_simpson(&integrand, 0.0, t, tol) * phi_symbol(k)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard::second_iterate;
    use crate::random::{sample_gaussian_coeffs, GaussianKind, SeedSpec};
    use crate::spectral::GridSpec;

    #[test]
    fn agrees_with_closed_form() {
        let g = sample_gaussian_coeffs(GridSpec::new(8), SeedSpec::new(2, 3), GaussianKind::InitialData);
        let q = duhamel_quadrature(&g, 0.25, 4, 1.0, 1e-12).unwrap();
        let z = second_iterate(&g, 0.25, 4, 1.0).unwrap();
        assert!((&q - &z).max_abs() < 1e-9);
        assert!(duhamel_quadrature(&g, 0.25, 5, 1.0, 1e-12).is_err());
    }
}
