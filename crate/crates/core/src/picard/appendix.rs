//! Quadratic objects driven by the renormalized stochastic convolution `𝗓_N`:
//! `𝖸_N = −P_{≠0}(𝗓_N²)` and `𝖹_N = ∫₀ᵗ S(t−s)φ(D)𝗓_N(s)² ds`.

use num_complex::Complex64;

use super::require_bound;
use crate::error::{Error, Result};
use crate::numerics::{japanese, ComplexKahan, KahanSum};
use crate::random::renorm_sum;
use crate::spectral::{dirichlet_project, phi_im, semigroup_apply, square, SpectralField, TestFunction, Trajectory};

fn highest_mode(f: &SpectralField) -> usize {
    f.modes()
        .filter(|&(n, c)| n > 0 && c.norm() != 0.0)
        .map(|(n, _)| n as usize)
        .max()
        .unwrap_or(0)
}

fn state_at(path: &Trajectory, k: usize) -> Result<&SpectralField> {
    path.states()
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("time index {k} outside path of length {}", path.len())))
}

fn checked_square(state: &SpectralField) -> Result<SpectralField> {
    require_bound(state.mode_bound(), 2 * highest_mode(state))?;
    Ok(square(state))
}

/// `𝖸_N(t_k) = −P_{≠0}(𝗓_N(t_k)²)`.
pub fn appendix_quadratic(path: &Trajectory, k: usize) -> Result<SpectralField> {
    let sq = checked_square(state_at(path, k)?)?;
    Ok(-&dirichlet_project(&sq, sq.mode_bound(), true))
}

/// Trapezoidal `∫₀^{t_k} S(t_k−s)φ(D)𝗓_N(s)² ds` along a path sampled on a
/// uniform grid starting at `0`.
///
/// The integrand is only Hölder in time, so the strong error is first order
/// in the step.
pub fn appendix_second_iterate(path: &Trajectory, k: usize) -> Result<SpectralField> {
    let dt = path.uniform_step()?;
    if path.times()[0] != 0.0 {
        return Err(Error::NonUniformGrid { index: 0 });
    }
    let tk = state_at(path, k).map(|_| path.times()[k])?;
    let mut acc = SpectralField::zeros(path.states()[0].grid());
    if k == 0 {
        return Ok(acc);
    }
    for j in 0..=k {
        let weight = if j == 0 || j == k { 0.5 * dt } else { dt };
        let integrand = checked_square(&path.states()[j])?.apply_phi();
        acc.axpy(weight, &semigroup_apply(&integrand, tk - path.times()[j]));
    }
    Ok(acc)
}

/// `(t₁ ∧ t₂)² Σ_{n≠0} conj ψ̂₁(n) ψ̂₂(n)`.
pub fn appendix_limit_covariance(t1: f64, t2: f64, psi1: &TestFunction, psi2: &TestFunction) -> f64 {
    let m = t1.min(t2);
    let s: KahanSum = psi1
        .support()
        .into_iter()
        .filter(|&n| n != 0)
        .map(|n| (psi1.mode(n).conj() * psi2.mode(n)).re)
        .collect();
    m * m * s.value()
}

/// `E[𝖸̂_N(t₁,n) conj 𝖸̂_N(t₂,n)]`, exact:
/// `2C⁴_{1−α,N}(t₁∧t₂)² Σ_{a+b=n} v_a v_b e^{(t₁−t₂)(φ(a)+φ(b))}` with
/// `v_a = |φ(a)|²⟨a⟩^{2α}` and `1 ≤ |a|,|b| ≤ N`.
pub fn appendix_covariance_finite(alpha_app: f64, n_max: usize, t1: f64, t2: f64, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let big = n_max as i64;
    let v = |a: i64| phi_im(a).powi(2) * japanese(a).powf(2.0 * alpha_app);
    let mut acc = ComplexKahan::new();
    for a in (n - big).max(-big)..=(n + big).min(big) {
        let b = n - a;
        if a == 0 || b == 0 {
            continue;
        }
        acc.add(Complex64::cis((t1 - t2) * (phi_im(a) + phi_im(b))) * (v(a) * v(b)));
    }
    let m = t1.min(t2);
    acc.value() * (2.0 * m * m / renorm_sum(1.0 - alpha_app, n_max))
}

/// `E[⟨𝖸_N(t₁),ψ₁⟩⟨𝖸_N(t₂),ψ₂⟩]`, exact.
pub fn appendix_pairing_covariance_finite(
    alpha_app: f64,
    n_max: usize,
    t1: f64,
    t2: f64,
    psi1: &TestFunction,
    psi2: &TestFunction,
) -> f64 {
    psi1.support()
        .into_iter()
        .filter(|&n| n != 0)
        .map(|n| (appendix_covariance_finite(alpha_app, n_max, t1, t2, n) * psi1.mode(n).conj() * psi2.mode(n)).re)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{renorm_constant, wiener_convolution_path, SeedSpec, WienerIncrements};
    use crate::spectral::{pairing, GridSpec};

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn zero_path_gives_zero() {
        let grid = GridSpec::new(8);
        let path = Trajectory::new(vec![0.0, 0.5, 1.0], vec![SpectralField::zeros(grid); 3]).unwrap();
        assert_eq!(appendix_quadratic(&path, 2).unwrap().max_abs(), 0.0);
        assert_eq!(appendix_second_iterate(&path, 2).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn quadratic_drops_mean_and_needs_room() {
        let path = wiener_convolution_path(0.75, 6, &[0.5, 1.0], SeedSpec::new(1, 1)).unwrap();
        for k in 0..3 {
            assert_eq!(appendix_quadratic(&path, k).unwrap().mode(0), Complex64::new(0.0, 0.0));
        }
        let tight = path.map(|s| s.regrid(GridSpec::new(8)));
        assert!(appendix_quadratic(&tight, 2).is_err());
        assert!(appendix_quadratic(&path, 3).is_err());
    }

    #[test]
    fn limit_covariance_examples() {
        let psi = TestFunction::cosine(1);
        assert_eq!(appendix_limit_covariance(0.0, 3.0, &psi, &psi), 0.0);
        assert!((appendix_limit_covariance(2.0, 3.0, &psi, &psi) - 2.0).abs() < 1e-15);
        let other = TestFunction::cosine(2);
        assert_eq!(
            appendix_limit_covariance(1.0, 2.0, &psi, &other),
            appendix_limit_covariance(2.0, 1.0, &other, &psi)
        );
    }

    #[test]
    fn sampled_quadratic_covariance_matches_exact() {
        let (alpha, n_max) = (0.75, 8usize);
        let psi = TestFunction::cosine(1);
        let samples: Vec<(f64, f64)> = (0..20_000u64)
            .map(|i| {
                let path = wiener_convolution_path(alpha, n_max, &[1.0, 2.0], SeedSpec::new(31, i)).unwrap();
                (
                    pairing(&appendix_quadratic(&path, 1).unwrap(), &psi),
                    pairing(&appendix_quadratic(&path, 2).unwrap(), &psi),
                )
            })
            .collect();
        for (idx, (t1, t2)) in [(0usize, (1.0, 1.0)), (1, (1.0, 2.0)), (2, (2.0, 2.0))] {
            let xs: Vec<f64> = samples
                .iter()
                .map(|&(a, b)| match idx {
                    0 => a * a,
                    1 => a * b,
                    _ => b * b,
                })
                .collect();
            let (m, se) = mean_se(&xs);
            let exact = appendix_pairing_covariance_finite(alpha, n_max, t1, t2, &psi, &psi);
            assert!((m - exact).abs() <= 3.0 * se, "({t1},{t2}): {m} vs {exact} ± {se}");
        }
    }

    #[test]
    fn finite_covariance_tends_to_limit_slowly() {
        let psi = TestFunction::cosine(1);
        let limit = appendix_limit_covariance(1.0, 1.0, &psi, &psi);
        let vals: Vec<f64> = [16usize, 128, 1024, 8192]
            .iter()
            .map(|&n| appendix_pairing_covariance_finite(0.75, n, 1.0, 1.0, &psi, &psi))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0] && w[1] < limit), "{vals:?}");
        // Same-time value equals the closed form at every N.
        let c = renorm_constant(0.25, 4);
        let v = |a: i64| phi_im(a).powi(2) * japanese(a).powf(1.5);
        let direct: f64 = (-3..=4).filter(|&a| a != 0 && a != 1).map(|a| v(a) * v(1 - a)).sum();
        let exact = appendix_covariance_finite(0.75, 4, 1.0, 1.0, 1).re;
        assert!((exact - 2.0 * c.powi(4) * direct).abs() < 1e-15);
    }

    #[test]
    fn second_iterate_converges_at_first_order_on_frozen_noise() {
        let (alpha, n_max) = (0.75, 8usize);
        let steps = 2048usize;
        let times: Vec<f64> = (1..=steps).map(|k| k as f64 / steps as f64).collect();
        let c = renorm_constant(1.0 - alpha, n_max);
        let grid = GridSpec::new(2 * n_max);
        let mut num = 0.0;
        let mut den = 0.0;
        for seed in 0..16u64 {
            let fine = WienerIncrements::sample(alpha, n_max, &times, SeedSpec::new(40, seed)).unwrap();
            let z: Vec<SpectralField> = [4usize, 2, 1]
                .iter()
                .map(|&f| {
                    let path = fine.coarsen(f).unwrap().convolution_path(c, grid).unwrap();
                    appendix_second_iterate(&path, path.len() - 1).unwrap()
                })
                .collect();
            num += crate::spectral::h_norm_sq(&(&z[0] - &z[1]), 0.0);
            den += crate::spectral::h_norm_sq(&(&z[1] - &z[2]), 0.0);
        }
        let order = 0.5 * (num / den).log2();
        assert!(order >= 0.8, "observed order {order}");
    }

    #[test]
    fn second_iterate_is_zero_at_start_and_decays_spectrally() {
        let (alpha, n_max) = (0.75, 8usize);
        let times: Vec<f64> = (1..=32).map(|k| k as f64 / 32.0).collect();
        let paths: Vec<Trajectory> = (0..400u64)
            .map(|i| wiener_convolution_path(alpha, n_max, &times, SeedSpec::new(41, i)).unwrap())
            .collect();
        assert_eq!(appendix_second_iterate(&paths[0], 0).unwrap().max_abs(), 0.0);
        let z: Vec<SpectralField> = paths.iter().map(|p| appendix_second_iterate(p, 32).unwrap()).collect();
        let scaled: Vec<f64> = (1..=16i64)
            .map(|n| z.iter().map(|f| f.mode(n).norm_sqr()).sum::<f64>() / z.len() as f64 * japanese(n).powi(2))
            .collect();
        let k = scaled[..4].iter().cloned().fold(0.0, f64::max);
        assert!(scaled.iter().all(|&s| s <= 2.0 * k), "{scaled:?}");
    }

    #[test]
    fn second_iterate_rejects_nonuniform_paths() {
        let grid = GridSpec::new(4);
        let path = Trajectory::new(vec![0.0, 0.1, 0.3], vec![SpectralField::zeros(grid); 3]).unwrap();
        assert!(appendix_second_iterate(&path, 2).is_err());
    }
}
