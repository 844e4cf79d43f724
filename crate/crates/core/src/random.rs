//! Seeded samplers for every random object: Gaussian data, white noise,
//! the linear solutions, and the Wiener-integral stochastic convolution.
//!
//! Streams are derived from `(master_seed, stream_id, substream)` with a
//! ChaCha generator keyed by the master seed and addressed by a 64-bit stream
//! number, so ensemble members can be evaluated in any order on any number of
//! threads and still draw identical numbers.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{japanese, KahanSum};
use crate::spectral::{dirichlet_project, phi_im, semigroup_apply, GridSpec, SpectralField, Trajectory};

/// Independent random sources attached to one ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Substream {
    InitialData = 1,
    WhiteNoise = 2,
    Brownian = 3,
    LimitNoise = 4,
    Synthetic = 5,
}

/// Address of one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const MAX_STREAM_ID: u64 = (1 << 56) - 1;

    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        assert!(stream_id <= Self::MAX_STREAM_ID, "stream id out of range");
        Self { master_seed, stream_id }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self::new(self.master_seed, stream_id)
    }

    pub fn rng(&self, sub: Substream) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream((self.stream_id << 8) | sub as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianKind {
    InitialData,
    WhiteNoise,
    BrownianIncrement,
}

impl GaussianKind {
    fn substream(self) -> Substream {
        match self {
            GaussianKind::InitialData => Substream::InitialData,
            GaussianKind::WhiteNoise => Substream::WhiteNoise,
            GaussianKind::BrownianIncrement => Substream::Brownian,
        }
    }
}

/// Draw of `{g_n}_{|n|≤M}` with `g_{−n} = conj g_n`, `g_0` real.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCoefficients {
    kind: GaussianKind,
    values: SpectralField,
}

impl GaussianCoefficients {
    pub fn from_field(kind: GaussianKind, values: SpectralField) -> Self {
        Self { kind, values }
    }

    pub fn kind(&self) -> GaussianKind {
        self.kind
    }

    pub fn mode_bound(&self) -> usize {
        self.values.mode_bound()
    }

    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        self.values.mode(n)
    }

    pub fn as_field(&self) -> &SpectralField {
        &self.values
    }
}

/// Which renormalized problem an experiment studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `C_{α,N}` on the truncated data, full nonlinearity.
    DataRenormalized,
    /// `C²_{α,N}` on the nonlinearity, unrenormalized truncated data.
    WeakNonlinearity,
    /// `C_{1−α,N}` on the space-time noise.
    NoiseRenormalizedAppendix,
    /// `C²_{1−α,N}` on the nonlinearity with space-time noise.
    WeakAppendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub truncation: usize,
    pub variant: Variant,
    #[serde(default = "default_appendix_alpha")]
    pub appendix_alpha: f64,
}

fn default_appendix_alpha() -> f64 {
    0.75
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            truncation: 64,
            variant: Variant::DataRenormalized,
            appendix_alpha: default_appendix_alpha(),
        }
    }
}

impl ModelParams {
    pub fn validate(&self, grid_bound: Option<usize>) -> Result<()> {
        if !self.alpha.is_finite() || !self.appendix_alpha.is_finite() {
            return Err(Error::InvalidArgument("non-finite alpha".into()));
        }
        if let Some(m) = grid_bound {
            if self.truncation > m {
                return Err(Error::GridTooSmall {
                    needed: self.truncation,
                    have: m,
                });
            }
        }
        Ok(())
    }
}

/// `C_{α,N} = (Σ_{|n|≤N} 2⟨n⟩^{−4α})^{−1/4}`, compensated summation.
pub fn renorm_constant(alpha: f64, n_max: usize) -> f64 {
    renorm_sum(alpha, n_max).powf(-0.25)
}

/// `C_{α,N}^{−4} = Σ_{|n|≤N} 2⟨n⟩^{−4α}`.
pub fn renorm_sum(alpha: f64, n_max: usize) -> f64 {
    let mut acc = KahanSum::new();
    // Small terms first.
    for n in (1..=n_max as i64).rev() {
        acc.add(4.0 * japanese(n).powf(-4.0 * alpha));
    }
    acc.add(2.0);
    acc.value()
}

fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Circularly symmetric complex Gaussian with `E|z|² = variance`.
fn circular<R: rand::Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let a = standard_normal(rng);
    let b = standard_normal(rng);
    Complex64::new(a * s, b * s)
}

/// Draws `g_0 ~ N(0,1)` and `g_n = (a+ib)/√2` for `n = 1..M`.
pub fn sample_gaussian_coeffs(grid: GridSpec, seed: SeedSpec, kind: GaussianKind) -> GaussianCoefficients {
    let mut rng = seed.rng(kind.substream());
    let values = SpectralField::from_fn(grid, |n| {
        if n == 0 {
            Complex64::new(standard_normal(&mut rng), 0.0)
        } else {
            circular(&mut rng, 1.0)
        }
    });
    GaussianCoefficients { kind, values }
}

fn expect_kind(g: &GaussianCoefficients, kind: GaussianKind) -> Result<()> {
    if g.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "expected {kind:?} coefficients, got {:?}",
            g.kind
        )));
    }
    Ok(())
}

/// `û_0(n) = g_n / ⟨n⟩^α`.
pub fn initial_data(g: &GaussianCoefficients, alpha: f64) -> Result<SpectralField> {
    expect_kind(g, GaussianKind::InitialData)?;
    Ok(g.values.map_even(|n| japanese(n).powf(-alpha)))
}

/// `C_{α,N} P_N u_0`.
pub fn renormalized_truncated_data(g: &GaussianCoefficients, alpha: f64, n_max: usize) -> Result<SpectralField> {
    if n_max > g.mode_bound() {
        return Err(Error::GridTooSmall {
            needed: n_max,
            have: g.mode_bound(),
        });
    }
    let c = renorm_constant(alpha, n_max);
    Ok(&dirichlet_project(&initial_data(g, alpha)?, n_max, false) * c)
}

/// `z_N(t) = S(t) C_{α,N} P_N u_0`.
pub fn linear_solution_zn(g: &GaussianCoefficients, alpha: f64, n_max: usize, t: f64) -> Result<SpectralField> {
    Ok(semigroup_apply(&renormalized_truncated_data(g, alpha, n_max)?, t))
}

/// `E‖z_N(t)‖²_{Hˢ} = C²_{α,N} Σ_{|n|≤N} ⟨n⟩^{2s−2α}`, the same for every `t`.
pub fn zn_expected_norm_sq(alpha: f64, n_max: usize, s: f64) -> f64 {
    let sum: KahanSum = (-(n_max as i64)..=n_max as i64)
        .map(|n| japanese(n).powf(2.0 * s - 2.0 * alpha))
        .collect();
    renorm_constant(alpha, n_max).powi(2) * sum.value()
}

/// `ζ̂(n) = 𝔤_n`.
pub fn white_noise(g: &GaussianCoefficients) -> Result<SpectralField> {
    expect_kind(g, GaussianKind::WhiteNoise)?;
    Ok(g.values.clone())
}

/// Increments of the Wiener integrals
/// `𝔦_n(t) = ∫₀ᵗ e^{−sφ(n)} φ(n) ⟨n⟩^α dB_n(s)` for `1 ≤ n ≤ N`.
///
/// The integrand has constant modulus, so over each interval the increment is
/// a circular complex Gaussian of variance `|φ(n)|²⟨n⟩^{2α} Δt`, independent
/// across intervals. Sampling is exact in law at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerIncrements {
    alpha: f64,
    n_max: usize,
    /// Nodes, starting at `0`.
    times: Vec<f64>,
    /// `increments[k][n-1]` is `𝔦_n(t_{k+1}) − 𝔦_n(t_k)`.
    increments: Vec<Vec<Complex64>>,
}

impl WienerIncrements {
    /// Samples on `times` (strictly increasing, `times[0] ≥ 0`); a node at `0`
    /// is prepended when missing.
    pub fn sample(alpha: f64, n_max: usize, times: &[f64], seed: SeedSpec) -> Result<Self> {
        let mut nodes = Vec::with_capacity(times.len() + 1);
        if times.first().is_none_or(|&t| t != 0.0) {
            nodes.push(0.0);
        }
        nodes.extend_from_slice(times);
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneTimes { index: i + 1 });
        }
        if nodes[0] < 0.0 {
            return Err(Error::NonMonotoneTimes { index: 0 });
        }
        let rates: Vec<f64> = (1..=n_max as i64)
            .map(|n| phi_im(n).powi(2) * japanese(n).powf(2.0 * alpha))
            .collect();
        let mut rng = seed.rng(Substream::Brownian);
        let increments = nodes
            .windows(2)
            .map(|w| {
                let dt = w[1] - w[0];
                rates.iter().map(|r| circular(&mut rng, r * dt)).collect()
            })
            .collect();
        Ok(Self {
            alpha,
            n_max,
            times: nodes,
            increments,
        })
    }

    /// Identically zero increments on the same nodes as [`Self::sample`].
    pub fn zeros(alpha: f64, n_max: usize, times: &[f64]) -> Result<Self> {
        let mut w = Self::sample(alpha, n_max, times, SeedSpec::new(0, 0))?;
        for row in w.increments.iter_mut() {
            row.fill(Complex64::new(0.0, 0.0));
        }
        Ok(w)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Increment of `𝔦_n` over `[t_k, t_{k+1}]`, `n ≥ 1`.
    pub fn increment(&self, k: usize, n: usize) -> Complex64 {
        self.increments[k][n - 1]
    }

    /// Keeps every `factor`-th node; increments add exactly.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || (self.times.len() - 1) % factor != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot coarsen {} intervals by {factor}",
                self.times.len() - 1
            )));
        }
        let times = self.times.iter().copied().step_by(factor).collect();
        let increments = self
            .increments
            .chunks(factor)
            .map(|chunk| (0..self.n_max).map(|i| chunk.iter().map(|row| row[i]).sum()).collect())
            .collect();
        Ok(Self {
            alpha: self.alpha,
            n_max: self.n_max,
            times,
            increments,
        })
    }

    /// `𝗓̂_N(t_k, n) = −c · e^{t_kφ(n)} 𝔦_n(t_k)` at every node, on `grid`.
    pub fn convolution_path(&self, c: f64, grid: GridSpec) -> Result<Trajectory> {
        if grid.mode_bound() < self.n_max {
            return Err(Error::GridTooSmall {
                needed: self.n_max,
                have: grid.mode_bound(),
            });
        }
        let mut integral = vec![Complex64::new(0.0, 0.0); self.n_max];
        let mut states = Vec::with_capacity(self.times.len());
        for (k, &t) in self.times.iter().enumerate() {
            if k > 0 {
                for (acc, d) in integral.iter_mut().zip(&self.increments[k - 1]) {
                    *acc += d;
                }
            }
            states.push(SpectralField::from_fn(grid, |n| {
                if n == 0 || n as usize > self.n_max {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::cis(t * phi_im(n)) * integral[n as usize - 1] * (-c)
                }
            }));
        }
        Trajectory::new(self.times.clone(), states)
    }
}

/// Samples the renormalized stochastic convolution `𝗓_N` at `times`, on a grid
/// of mode bound `2N` so that its square is representable.
pub fn wiener_convolution_path(alpha_app: f64, n_max: usize, times: &[f64], seed: SeedSpec) -> Result<Trajectory> {
    let w = WienerIncrements::sample(alpha_app, n_max, times, seed)?;
    w.convolution_path(renorm_constant(1.0 - alpha_app, n_max), GridSpec::new(2 * n_max))
}

/// Samples the limiting Gaussian forcing `ϒ(t) = Σ_{n≠0} ∫₀ᵗ √(2s) dB_n(s) e_n`
/// for `1 ≤ |n| ≤ N` at `times` (a node at `0` is prepended when missing).
pub fn limit_noise_path(n_max: usize, times: &[f64], seed: SeedSpec, grid: GridSpec) -> Result<Trajectory> {
    let mut nodes = Vec::with_capacity(times.len() + 1);
    if times.first().is_none_or(|&t| t != 0.0) {
        nodes.push(0.0);
    }
    nodes.extend_from_slice(times);
    if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTimes { index: i + 1 });
    }
    let mut rng = seed.rng(Substream::LimitNoise);
    let mut value = vec![Complex64::new(0.0, 0.0); n_max];
    let mut states = vec![SpectralField::zeros(grid)];
    for w in nodes.windows(2) {
        let var = w[1] * w[1] - w[0] * w[0];
        for v in value.iter_mut() {
            *v += circular(&mut rng, var);
        }
        states.push(SpectralField::from_fn(grid, |n| {
            if n == 0 || n as usize > n_max {
                Complex64::new(0.0, 0.0)
            } else {
                value[n as usize - 1]
            }
        }));
    }
    Trajectory::new(nodes, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::h_norm_sq;

    fn se_check(samples: &[f64], expected: f64, k: f64) -> bool {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean - expected).abs() <= k * (var / n).sqrt()
    }

    #[test]
    fn zn_norm_matches_monte_carlo() {
        let (alpha, n_max, s) = (0.25, 10, -0.3);
        let xs: Vec<f64> = (0..4000u64)
            .map(|i| {
                let g = sample_gaussian_coeffs(GridSpec::new(n_max), SeedSpec::new(6, i), GaussianKind::InitialData);
                h_norm_sq(&linear_solution_zn(&g, alpha, n_max, 1.3).unwrap(), s)
            })
            .collect();
        assert!(se_check(&xs, zn_expected_norm_sq(alpha, n_max, s), 3.0));
        // s = α gives C²(2N+1).
        let c = renorm_constant(0.0, 5);
        assert!((zn_expected_norm_sq(0.0, 5, 0.0) - 11.0 * c * c).abs() < 1e-14);
    }

    #[test]
    fn renorm_constant_examples() {
        let expected0 = 2f64.powf(-0.25);
        for alpha in [-0.5, 0.0, 0.25, 1.0] {
            assert!((renorm_constant(alpha, 0) - expected0).abs() < 1e-15);
        }
        let expected = (2.0 + 2.0 * 2f64.sqrt()).powf(-0.25);
        assert!((renorm_constant(0.25, 1) - expected).abs() < 1e-15);
        assert!((renorm_constant(0.25, 1) - 0.6746).abs() < 1e-4);
        assert!((renorm_constant(0.0, 1024) - 4098f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn renorm_constant_is_nonincreasing() {
        for alpha in [-0.5, 0.0, 0.1, 0.25] {
            let mut prev = renorm_constant(alpha, 0);
            for n in 1..200 {
                let c = renorm_constant(alpha, n);
                assert!(c <= prev && c > 0.0);
                prev = c;
            }
        }
    }

    #[test]
    fn seeds_are_deterministic_and_separated() {
        let grid = GridSpec::new(8);
        let s = SeedSpec::new(42, 3);
        let a = sample_gaussian_coeffs(grid, s, GaussianKind::InitialData);
        let b = sample_gaussian_coeffs(grid, s, GaussianKind::InitialData);
        assert_eq!(a, b);
        let c = sample_gaussian_coeffs(grid, s.with_stream(4), GaussianKind::InitialData);
        assert_ne!(a, c);
        let d = sample_gaussian_coeffs(grid, s, GaussianKind::WhiteNoise);
        assert_ne!(a.get(1), d.get(1));
        assert_eq!(a.get(0).im, 0.0);
        assert_eq!(a.get(-3), a.get(3).conj());
    }

    #[test]
    fn smaller_grids_draw_a_prefix() {
        let s = SeedSpec::new(7, 0);
        let big = sample_gaussian_coeffs(GridSpec::new(32), s, GaussianKind::InitialData);
        let small = sample_gaussian_coeffs(GridSpec::new(8), s, GaussianKind::InitialData);
        for n in -8..=8 {
            assert_eq!(big.get(n), small.get(n));
        }
    }

    #[test]
    fn gaussian_moments() {
        let grid = GridSpec::new(3);
        let draws: Vec<_> = (0..100_000)
            .map(|i| sample_gaussian_coeffs(grid, SeedSpec::new(1, i), GaussianKind::InitialData))
            .collect();
        for n in [1i64, 2, 3] {
            let m2 = draws.iter().map(|g| g.get(n).norm_sqr()).sum::<f64>() / draws.len() as f64;
            assert!((m2 - 1.0).abs() < 0.02, "E|g_{n}|² = {m2}");
            let sq: Complex64 = draws.iter().map(|g| g.get(n) * g.get(n)).sum::<Complex64>() / draws.len() as f64;
            assert!(sq.norm() < 0.02, "E g_{n}² = {sq}");
        }
        let m4: Vec<f64> = draws.iter().map(|g| g.get(0).re.powi(4)).collect();
        assert!(se_check(&m4, 3.0, 4.0));
    }

    #[test]
    fn initial_data_spectrum() {
        let grid = GridSpec::new(6);
        let alpha = 0.25;
        let draws: Vec<SpectralField> = (0..10_000)
            .map(|i| {
                let g = sample_gaussian_coeffs(grid, SeedSpec::new(9, i), GaussianKind::InitialData);
                initial_data(&g, alpha).unwrap()
            })
            .collect();
        for n in [0i64, 1, 4, 6] {
            let xs: Vec<f64> = draws.iter().map(|f| f.mode(n).norm_sqr()).collect();
            assert!(se_check(&xs, japanese(n).powf(-2.0 * alpha), 3.0), "mode {n}");
        }
        let s = 0.5;
        let n_max = 4;
        let exact: f64 = (-4i64..=4).map(|n| japanese(n).powf(2.0 * s - 2.0 * alpha)).sum();
        let xs: Vec<f64> = draws
            .iter()
            .map(|f| h_norm_sq(&dirichlet_project(f, n_max, false), s))
            .collect();
        assert!(se_check(&xs, exact, 3.0));
    }

    #[test]
    fn white_noise_is_unit_variance() {
        let grid = GridSpec::new(4);
        let draws: Vec<SpectralField> = (0..10_000)
            .map(|i| {
                let g = sample_gaussian_coeffs(grid, SeedSpec::new(5, i), GaussianKind::WhiteNoise);
                white_noise(&g).unwrap()
            })
            .collect();
        for n in 0..=4 {
            let xs: Vec<f64> = draws.iter().map(|f| f.mode(n).norm_sqr()).collect();
            assert!(se_check(&xs, 1.0, 3.0));
        }
        let s = -0.5;
        let exact: f64 = (-4i64..=4).map(|n| japanese(n).powf(2.0 * s)).sum();
        let xs: Vec<f64> = draws.iter().map(|f| h_norm_sq(f, s)).collect();
        assert!(se_check(&xs, exact, 3.0));
        assert!(draws.iter().all(|f| f.hermitian_defect() == 0.0));
        let wrong = sample_gaussian_coeffs(grid, SeedSpec::new(5, 0), GaussianKind::InitialData);
        assert!(white_noise(&wrong).is_err());
    }

    #[test]
    fn truncated_data_examples() {
        let grid = GridSpec::new(8);
        let g = sample_gaussian_coeffs(grid, SeedSpec::new(3, 1), GaussianKind::InitialData);
        let d0 = renormalized_truncated_data(&g, 0.25, 0).unwrap();
        assert!((d0.mode(0).re - 2f64.powf(-0.25) * g.get(0).re).abs() < 1e-15);
        assert!(d0
            .modes()
            .filter(|&(n, _)| n != 0)
            .all(|(_, c)| c == Complex64::new(0.0, 0.0)));
        assert!(renormalized_truncated_data(&g, 0.0, 9).is_err());
        let z0 = linear_solution_zn(&g, 0.1, 5, 0.0).unwrap();
        assert_eq!(z0, renormalized_truncated_data(&g, 0.1, 5).unwrap());
        let z = linear_solution_zn(&g, 0.1, 5, 2.3).unwrap();
        for n in -8..=8 {
            assert!((z.mode(n).norm() - z0.mode(n).norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_solution_variance() {
        let grid = GridSpec::new(8);
        let (alpha, n_max, t) = (0.0, 8, 1.0);
        let c = renorm_constant(alpha, n_max);
        let draws: Vec<SpectralField> = (0..10_000)
            .map(|i| {
                let g = sample_gaussian_coeffs(grid, SeedSpec::new(11, i), GaussianKind::InitialData);
                linear_solution_zn(&g, alpha, n_max, t).unwrap()
            })
            .collect();
        for n in [1i64, 3, 8] {
            let xs: Vec<f64> = draws.iter().map(|f| f.mode(n).norm_sqr()).collect();
            assert!(se_check(&xs, c * c * japanese(n).powf(-2.0 * alpha), 3.0));
        }
    }

    #[test]
    fn wiener_path_moments() {
        let (alpha, n_max) = (0.75, 4);
        let times = [0.5, 1.0, 2.0];
        let c = renorm_constant(1.0 - alpha, n_max);
        let paths: Vec<Trajectory> = (0..10_000)
            .map(|i| wiener_convolution_path(alpha, n_max, &times, SeedSpec::new(13, i)).unwrap())
            .collect();
        assert_eq!(paths[0].times(), &[0.0, 0.5, 1.0, 2.0]);
        for p in &paths[..10] {
            assert!(p.states().iter().all(|s| s.mode(0) == Complex64::new(0.0, 0.0)));
        }
        for (k, &t) in [0.0, 0.5, 1.0, 2.0].iter().enumerate() {
            for n in 1..=4i64 {
                let xs: Vec<f64> = paths.iter().map(|p| p.states()[k].mode(n).norm_sqr()).collect();
                let exact = c * c * phi_im(n).powi(2) * japanese(n).powf(2.0 * alpha) * t;
                if t == 0.0 {
                    assert!(xs.iter().all(|&x| x == 0.0));
                } else {
                    assert!(se_check(&xs, exact, 3.0), "t={t} n={n}");
                }
            }
        }
        // Increments over [0, 0.5] and [1, 2] are uncorrelated.
        let n = 2;
        let corr: Vec<f64> = paths
            .iter()
            .map(|p| {
                let s = p.states();
                let i1 = s[1].mode(n) * Complex64::cis(-0.5 * phi_im(n));
                let i2 = s[3].mode(n) * Complex64::cis(-2.0 * phi_im(n)) - s[2].mode(n) * Complex64::cis(-phi_im(n));
                (i1 * i2.conj()).re
            })
            .collect();
        assert!(se_check(&corr, 0.0, 3.0));
        assert!(wiener_convolution_path(alpha, n_max, &[1.0, 0.5], SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn coarsened_increments_add() {
        let times: Vec<f64> = (1..=8).map(|k| k as f64 * 0.125).collect();
        let w = WienerIncrements::sample(0.75, 3, &times, SeedSpec::new(2, 2)).unwrap();
        let c = w.coarsen(2).unwrap();
        assert_eq!(c.times().len(), 5);
        let fine = w.convolution_path(1.0, GridSpec::new(3)).unwrap();
        let coarse = c.convolution_path(1.0, GridSpec::new(3)).unwrap();
        for k in 0..5 {
            assert!((&fine.states()[2 * k] - &coarse.states()[k]).max_abs() < 1e-14);
        }
        assert!(w.coarsen(3).is_err());
    }

    #[test]
    fn limit_noise_variance_is_t_squared() {
        let grid = GridSpec::new(2);
        let paths: Vec<Trajectory> = (0..10_000)
            .map(|i| limit_noise_path(2, &[1.0, 2.0], SeedSpec::new(17, i), grid).unwrap())
            .collect();
        for (k, t) in [(1usize, 1.0f64), (2, 2.0)] {
            let xs: Vec<f64> = paths.iter().map(|p| p.states()[k].mode(1).norm_sqr()).collect();
            assert!(se_check(&xs, t * t, 3.0));
        }
    }
}
