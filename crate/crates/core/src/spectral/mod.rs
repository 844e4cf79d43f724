//! Fourier-side representation of real functions on the circle.
//!
//! A [`SpectralField`] stores `û(n)` for `n = −M..M` in a dense array and
//! keeps `û(−n) = conj û(n)` by construction. All operations here are pure
//! and map Hermitian fields to Hermitian fields.

mod fft;
pub mod io;

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{japanese, smooth_fft_len, KahanSum};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Mode range `{−M..M}` plus the size of the physical sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridSpecFields")]
pub struct GridSpec {
    mode_bound: usize,
    physical_points: usize,
}

/// Serialized form; `physical_points` defaults to `2M + 2`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpecFields {
    mode_bound: usize,
    physical_points: Option<usize>,
}

impl TryFrom<GridSpecFields> for GridSpec {
    type Error = Error;

    fn try_from(raw: GridSpecFields) -> Result<Self> {
        match raw.physical_points {
            Some(p) => GridSpec::with_points(raw.mode_bound, p),
            None => Ok(GridSpec::new(raw.mode_bound)),
        }
    }
}

impl GridSpec {
    /// Grid with the minimal alias-free sample count `P = 2M + 2`.
    pub fn new(mode_bound: usize) -> Self {
        Self {
            mode_bound,
            physical_points: 2 * mode_bound + 2,
        }
    }

    pub fn with_points(mode_bound: usize, physical_points: usize) -> Result<Self> {
        if physical_points < 2 * mode_bound + 2 {
            return Err(Error::InvalidGrid(format!(
                "{physical_points} physical points cannot resolve mode bound {mode_bound}"
            )));
        }
        Ok(Self {
            mode_bound,
            physical_points,
        })
    }

    pub fn mode_bound(&self) -> usize {
        self.mode_bound
    }

    pub fn physical_points(&self) -> usize {
        self.physical_points
    }

    /// Number of stored coefficients, `2M + 1`.
    pub fn len(&self) -> usize {
        2 * self.mode_bound + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let m = self.mode_bound as i64;
        -m..=m
    }

    #[inline]
    fn index(&self, n: i64) -> Option<usize> {
        let m = self.mode_bound as i64;
        (n.abs() <= m).then(|| (n + m) as usize)
    }

    /// Sample points `x_j = 2πj/P`.
    pub fn points(&self) -> Vec<f64> {
        let p = self.physical_points as f64;
        (0..self.physical_points)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / p)
            .collect()
    }
}

/// The BBM multiplier `φ(n) = −in/(1+n²)`.
#[inline]
pub fn phi_symbol(n: i64) -> Complex64 {
    let x = n as f64;
    Complex64::new(0.0, -x / (1.0 + x * x))
}

/// Imaginary part of [`phi_symbol`], i.e. `−n/(1+n²)`.
#[inline]
pub(crate) fn phi_im(n: i64) -> f64 {
    let x = n as f64;
    -x / (1.0 + x * x)
}

/// Hermitian Fourier coefficients of a real function on `𝕋`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    /// Builds a field from its non-negative modes; `f(0)` is taken real and
    /// negative modes are filled by conjugation.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let mut field = Self::zeros(grid);
        let m = grid.mode_bound as i64;
        field.coeffs[m as usize] = Complex64::new(f(0).re, 0.0);
        for n in 1..=m {
            let c = f(n);
            field.coeffs[(m + n) as usize] = c;
            field.coeffs[(m - n) as usize] = c.conj();
        }
        field
    }

    /// Wraps a dense `−M..M` array, symmetrizing it onto the Hermitian
    /// subspace (the projection onto real functions).
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        let m = grid.mode_bound;
        Ok(Self::from_fn(grid, |n| {
            let n = n as usize;
            (coeffs[m + n] + coeffs[m - n].conj()) * 0.5
        }))
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[grid.mode_bound] = Complex64::new(c, 0.0);
        f
    }

    /// `cos(kx)`, i.e. `1/2` at `n = ±k`.
    pub fn cosine(grid: GridSpec, k: usize) -> Self {
        let mut f = Self::zeros(grid);
        f.set_mode(k as i64, Complex64::new(if k == 0 { 1.0 } else { 0.5 }, 0.0));
        f
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn mode_bound(&self) -> usize {
        self.grid.mode_bound
    }

    /// `û(n)`, zero outside the retained range.
    #[inline]
    pub fn mode(&self, n: i64) -> Complex64 {
        self.grid.index(n).map_or(ZERO, |i| self.coeffs[i])
    }

    /// Sets `û(n) = c` and `û(−n) = conj c`. Out-of-range modes are ignored.
    pub fn set_mode(&mut self, n: i64, c: Complex64) {
        if let (Some(i), Some(j)) = (self.grid.index(n), self.grid.index(-n)) {
            if n == 0 {
                self.coeffs[i] = Complex64::new(c.re, 0.0);
            } else {
                self.coeffs[i] = c;
                self.coeffs[j] = c.conj();
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(n, û(n))` pairs in increasing `n`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.grid.modes().zip(self.coeffs.iter().copied())
    }

    /// `max_n |û(−n) − conj û(n)|`, plus `|Im û(0)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.grid.mode_bound;
        (0..=m)
            .map(|n| (self.coeffs[m + n] - self.coeffs[m - n].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid, "axpy on mismatched grids");
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    /// Copies the coefficients into `grid`, truncating or zero-padding.
    pub fn regrid(&self, grid: GridSpec) -> SpectralField {
        SpectralField::from_fn(grid, |n| self.mode(n))
    }

    /// Applies a real, even multiplier `n ↦ w(n)` (evaluated for `n ≥ 0`).
    pub fn map_even(&self, mut w: impl FnMut(i64) -> f64) -> SpectralField {
        SpectralField::from_fn(self.grid, |n| self.mode(n) * w(n))
    }

    /// Applies `φ(D)`.
    pub fn apply_phi(&self) -> SpectralField {
        SpectralField::from_fn(self.grid, |n| self.mode(n) * phi_symbol(n))
    }

    /// Applies `⟨∇⟩^s`.
    pub fn apply_bracket(&self, s: f64) -> SpectralField {
        self.map_even(|n| japanese(n).powf(s))
    }

    /// Energy fraction `Σ_{|n|>M/2}|û|² / Σ|û|²` in the top octave.
    pub fn tail_fraction(&self) -> f64 {
        let m = self.grid.mode_bound as i64;
        let mut total = KahanSum::new();
        let mut tail = KahanSum::new();
        for (n, c) in self.modes() {
            let e = c.norm_sqr();
            total.add(e);
            if 2 * n.abs() > m {
                tail.add(e);
            }
        }
        let total = total.value();
        if total == 0.0 {
            0.0
        } else {
            tail.value() / total
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

/// A field with finitely many nonzero modes used as a pairing target `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction(SpectralField);

impl TestFunction {
    pub fn new(field: SpectralField) -> Self {
        Self(field)
    }

    /// `ψ(x) = cos(kx)`.
    pub fn cosine(k: usize) -> Self {
        Self(SpectralField::cosine(GridSpec::new(k), k))
    }

    pub fn zero() -> Self {
        Self(SpectralField::zeros(GridSpec::new(0)))
    }

    pub fn field(&self) -> &SpectralField {
        &self.0
    }

    pub fn mode(&self, n: i64) -> Complex64 {
        self.0.mode(n)
    }

    /// Modes where `ψ̂(n) ≠ 0`.
    pub fn support(&self) -> Vec<i64> {
        self.0
            .modes()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(n, _)| n)
            .collect()
    }

    /// `Σ_{n≠0} |ψ̂(n)|²`.
    pub fn nonzero_mode_energy(&self) -> f64 {
        self.0.modes().filter(|&(n, _)| n != 0).map(|(_, c)| c.norm_sqr()).sum()
    }
}

/// Time grid plus one field per node, all on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<SpectralField>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: states.len(),
            });
        }
        if let Some(&t0) = times.first() {
            if !(t0 >= 0.0) {
                return Err(Error::InvalidArgument(format!("negative start time {t0}")));
            }
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneTimes { index: i + 1 });
        }
        if let Some(first) = states.first() {
            if let Some(bad) = states.iter().find(|s| s.grid != first.grid) {
                return Err(Error::GridMismatch {
                    left: first.mode_bound(),
                    right: bad.mode_bound(),
                });
            }
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SpectralField> {
        self.states.last()
    }

    /// State at the node closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&SpectralField> {
        let i = self.nearest_index(t)?;
        Some(&self.states[i])
    }

    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        if self.times.is_empty() {
            return None;
        }
        let i = self.times.partition_point(|&s| s < t);
        let best = match i {
            0 => 0,
            i if i == self.times.len() => i - 1,
            i if (self.times[i] - t).abs() < (t - self.times[i - 1]).abs() => i,
            i => i - 1,
        };
        Some(best)
    }

    /// Uniform step if the grid is uniform to relative `1e-9`.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::InvalidArgument("need at least two time nodes".into()));
        }
        let dt = self.times[1] - self.times[0];
        for (i, w) in self.times.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::NonUniformGrid { index: i + 1 });
            }
        }
        Ok(dt)
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(f).collect(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<SpectralField>) {
        (self.times, self.states)
    }
}

/// `S(t)f`: multiplies `f̂(n)` by `e^{tφ(n)}`, a pure phase.
pub fn semigroup_apply(f: &SpectralField, t: f64) -> SpectralField {
    SpectralField::from_fn(f.grid, |n| f.mode(n) * Complex64::cis(t * phi_im(n)))
}

/// `P_N f`, optionally also removing the zero mode.
pub fn dirichlet_project(f: &SpectralField, n_max: usize, drop_zero_mode: bool) -> SpectralField {
    let n_max = n_max as i64;
    SpectralField::from_fn(f.grid, |n| {
        if n > n_max || (drop_zero_mode && n == 0) {
            ZERO
        } else {
            f.mode(n)
        }
    })
}

/// Transform length used for alias-free products on mode bound `m`.
pub fn product_fft_len(m: usize) -> usize {
    smooth_fft_len(2 * (2 * m + 1))
}

/// Exact spectral convolution `(fg)^(n) = Σ_{n₁+n₂=n} f̂(n₁)ĝ(n₂)` truncated to
/// `|n| ≤ M`, computed on a zero-padded transform of length `≥ 2(2M+1)`.
pub fn quadratic_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid.mode_bound != g.grid.mode_bound {
        return Err(Error::GridMismatch {
            left: f.mode_bound(),
            right: g.mode_bound(),
        });
    }
    let len = product_fft_len(f.mode_bound());
    let uf = fft::synthesize(&f.coeffs, len);
    let ug = fft::synthesize(&g.coeffs, len);
    let mut prod: Vec<Complex64> = uf
        .iter()
        .zip(&ug)
        .map(|(a, b)| Complex64::new(a.re * b.re, 0.0))
        .collect();
    Ok(from_analysis(f.grid, fft::analyze(&mut prod, f.mode_bound())))
}

/// `u²` with the same dealiasing as [`quadratic_product`].
pub fn square(f: &SpectralField) -> SpectralField {
    let len = product_fft_len(f.mode_bound());
    let mut u = fft::synthesize(&f.coeffs, len);
    for z in u.iter_mut() {
        *z = Complex64::new(z.re * z.re, 0.0);
    }
    from_analysis(f.grid, fft::analyze(&mut u, f.mode_bound()))
}

fn from_analysis(grid: GridSpec, coeffs: Vec<Complex64>) -> SpectralField {
    let m = grid.mode_bound;
    SpectralField::from_fn(grid, |n| coeffs[m + n as usize])
}

/// `⟨f, ψ⟩ = Σ_n f̂(n) conj ψ̂(n)`, i.e. `∫ fψ dx/2π` for real `f, ψ`.
pub fn pairing(f: &SpectralField, psi: &TestFunction) -> f64 {
    let bound = f.mode_bound().min(psi.0.mode_bound()) as i64;
    let mut acc = KahanSum::new();
    for n in -bound..=bound {
        acc.add((f.mode(n) * psi.mode(n).conj()).re);
    }
    acc.value()
}

/// `‖f‖_{H^s} = (Σ ⟨n⟩^{2s} |f̂(n)|²)^{1/2}` over retained modes.
pub fn h_norm(f: &SpectralField, s: f64) -> f64 {
    h_norm_sq(f, s).sqrt()
}

pub fn h_norm_sq(f: &SpectralField, s: f64) -> f64 {
    f.modes()
        .map(|(n, c)| japanese(n).powf(2.0 * s) * c.norm_sqr())
        .collect::<KahanSum>()
        .value()
}

/// Grid estimate of `‖⟨∇⟩^s f‖_{L^∞}` on `oversample·(2M+1)` points.
///
/// This is a lower bound on the true sup-norm; it is nondecreasing when
/// `oversample` is replaced by a multiple of itself.
pub fn winf_norm(f: &SpectralField, s: f64, oversample: usize) -> f64 {
    let len = oversample.max(2) * f.grid.len();
    let g = f.apply_bracket(s);
    fft::synthesize(&g.coeffs, len)
        .iter()
        .map(|z| z.re.abs())
        .fold(0.0, f64::max)
}

/// Samples `u(x_j)`, `x_j = 2πj/P`.
pub fn to_physical(f: &SpectralField) -> Vec<f64> {
    fft::synthesize(&f.coeffs, f.grid.physical_points)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Coefficients `f̂(n) = (1/P) Σ_j u(x_j) e^{−inx_j}` for `|n| ≤ M`.
pub fn from_physical(grid: GridSpec, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.physical_points {
        return Err(Error::LengthMismatch {
            expected: grid.physical_points,
            got: samples.len(),
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let coeffs = fft::analyze(&mut buf, grid.mode_bound);
    SpectralField::from_coeffs(grid, coeffs)
}

/// Mean of `u(x)^p` over `samples` equispaced points, `p ∈ {2, 4}` etc.
pub fn physical_power_mean(f: &SpectralField, p: i32, samples: usize) -> f64 {
    let len = samples.max(f.grid.len() + 1);
    let u = fft::synthesize(&f.coeffs, len);
    u.iter().map(|z| z.re.powi(p)).collect::<KahanSum>().value() / len as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn random_field(grid: GridSpec, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralField::from_fn(grid, |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn direct_convolution(f: &SpectralField, g: &SpectralField) -> SpectralField {
        let m = f.mode_bound() as i64;
        SpectralField::from_fn(f.grid(), |n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for n1 in -m..=m {
                acc += f.mode(n1) * g.mode(n - n1);
            }
            acc
        })
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_symbol(0), Complex64::new(0.0, 0.0));
        assert_eq!(phi_symbol(1), Complex64::new(0.0, -0.5));
        assert_eq!(phi_symbol(-2), Complex64::new(0.0, 0.4));
        assert_eq!(phi_symbol(-2), -phi_symbol(2));
        for n in -50..=50 {
            assert!(phi_symbol(n).norm() <= 0.5);
            assert_eq!(phi_symbol(n).re, 0.0);
        }
    }

    #[test]
    fn grid_rejects_too_few_points() {
        assert!(GridSpec::with_points(4, 9).is_err());
        assert!(GridSpec::with_points(4, 10).is_ok());
        let g = GridSpec::new(3);
        assert_eq!(g.modes().collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn semigroup_rotates_cosine() {
        let grid = GridSpec::new(4);
        let f = SpectralField::cosine(grid, 1);
        let t = 0.7;
        let g = semigroup_apply(&f, t);
        let expected = Complex64::cis(-t / 2.0) * 0.5;
        assert!((g.mode(1) - expected).norm() < 1e-15);
        assert!((g.mode(-1) - expected.conj()).norm() < 1e-15);
        for s in [-1.0, 0.0, 0.5, 2.0] {
            assert!(close(h_norm(&g, s), h_norm(&f, s), 1e-14));
        }
        assert_eq!(semigroup_apply(&f, 0.0), f);
    }

    #[test]
    fn projection_examples() {
        let grid = GridSpec::new(5);
        let f = random_field(grid, 1);
        assert_eq!(dirichlet_project(&f, 5, false), f);
        let e2 = SpectralField::from_fn(grid, |n| if n == 2 { Complex64::new(1.0, 0.0) } else { ZERO });
        assert_eq!(dirichlet_project(&e2, 1, false), SpectralField::zeros(grid));
        let p = dirichlet_project(&f, 3, true);
        assert_eq!(p.mode(0), ZERO);
        assert_eq!(p.mode(3), f.mode(3));
        assert_eq!(p.mode(4), ZERO);
    }

    #[test]
    fn product_examples() {
        let grid = GridSpec::new(4);
        let c = SpectralField::constant(grid, 3.0);
        let cc = quadratic_product(&c, &c).unwrap();
        assert!((cc.mode(0).re - 9.0).abs() < 1e-14);
        let cos = SpectralField::cosine(grid, 1);
        let sq = quadratic_product(&cos, &cos).unwrap();
        assert!((sq.mode(0) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((sq.mode(2) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((sq.mode(-2) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(sq.mode(1).norm() < 1e-15);
        assert!(quadratic_product(&cos, &SpectralField::zeros(GridSpec::new(3))).is_err());
    }

    #[test]
    fn pairing_examples() {
        let grid = GridSpec::new(3);
        let cos = SpectralField::cosine(grid, 1);
        assert!(close(pairing(&cos, &TestFunction::cosine(1)), 0.5, 1e-15));
        assert_eq!(pairing(&SpectralField::cosine(grid, 2), &TestFunction::cosine(1)), 0.0);
    }

    #[test]
    fn norm_examples() {
        let grid = GridSpec::new(3);
        let zero = SpectralField::zeros(grid);
        assert_eq!(h_norm(&zero, 1.0), 0.0);
        assert_eq!(winf_norm(&zero, 0.0, 4), 0.0);
        let e = SpectralField::from_fn(grid, |n| if n == 1 { Complex64::new(1.0, 0.0) } else { ZERO });
        assert!(close(h_norm(&e, 1.0), 2.0, 1e-14));
        let cos = SpectralField::cosine(grid, 1);
        assert!(close(winf_norm(&cos, 0.0, 4), 1.0, 1e-6));
    }

    #[test]
    fn winf_monotone_under_refinement() {
        let f = random_field(GridSpec::new(6), 9);
        let a = winf_norm(&f, 0.3, 2);
        let b = winf_norm(&f, 0.3, 4);
        let c = winf_norm(&f, 0.3, 8);
        assert!(a <= b && b <= c);
    }

    #[test]
    fn transform_examples() {
        let grid = GridSpec::new(4);
        let ones = vec![1.0; grid.physical_points()];
        let f = from_physical(grid, &ones).unwrap();
        assert!((f.mode(0).re - 1.0).abs() < 1e-15);
        assert!(f.modes().filter(|&(n, _)| n != 0).all(|(_, c)| c.norm() < 1e-15));
        let cos: Vec<f64> = grid.points().iter().map(|x| x.cos()).collect();
        let f = from_physical(grid, &cos).unwrap();
        assert!((f.mode(1).re - 0.5).abs() < 1e-15);
        assert!((f.mode(-1).re - 0.5).abs() < 1e-15);
        assert!(from_physical(grid, &cos[1..]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dealiased_product_matches_direct(m in 1usize..=32, seed in any::<u64>()) {
            let grid = GridSpec::new(m);
            let f = random_field(grid, seed);
            let g = random_field(grid, seed.wrapping_add(1));
            let fast = quadratic_product(&f, &g).unwrap();
            let slow = direct_convolution(&f, &g);
            for n in grid.modes() {
                prop_assert!((fast.mode(n) - slow.mode(n)).norm() < 1e-12);
            }
            prop_assert!(fast.hermitian_defect() == 0.0);
            prop_assert!((&square(&f) - &quadratic_product(&f, &f).unwrap()).max_abs() < 1e-13);
        }

        #[test]
        fn flow_is_isometric_group(m in 1usize..=24, seed in any::<u64>(),
                                   s in -2.0f64..2.0, t in -5.0f64..5.0, r in -5.0f64..5.0) {
            let f = random_field(GridSpec::new(m), seed);
            let ft = semigroup_apply(&f, t);
            let scale = h_norm(&f, s).max(1.0);
            prop_assert!((h_norm(&ft, s) - h_norm(&f, s)).abs() < 1e-12 * scale);
            let composed = semigroup_apply(&ft, r);
            let direct = semigroup_apply(&f, t + r);
            prop_assert!((&composed - &direct).max_abs() < 1e-13);
            prop_assert_eq!(ft.hermitian_defect(), 0.0);
        }

        #[test]
        fn projections_compose(m in 1usize..=20, seed in any::<u64>(), a in 0usize..25, b in 0usize..25) {
            let f = random_field(GridSpec::new(m), seed);
            let lhs = dirichlet_project(&dirichlet_project(&f, b, false), a, false);
            prop_assert_eq!(lhs, dirichlet_project(&f, a.min(b), false));
        }

        #[test]
        fn plancherel_and_quadrature(m in 1usize..=24, seed in any::<u64>()) {
            let grid = GridSpec::with_points(m, 4 * m + 4).unwrap();
            let f = random_field(grid, seed);
            let psi_field = random_field(GridSpec::new(m.min(5)), seed ^ 0xabc);
            let psi = TestFunction::new(psi_field.regrid(grid));
            let u = to_physical(&f);
            let w = to_physical(psi.field());
            let mean_sq = u.iter().map(|x| x * x).sum::<f64>() / u.len() as f64;
            prop_assert!((h_norm(&f, 0.0).powi(2) - mean_sq).abs() < 1e-10);
            let quad = u.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / u.len() as f64;
            prop_assert!((pairing(&f, &psi) - quad).abs() < 1e-10);
            let back = from_physical(grid, &u).unwrap();
            prop_assert!((&back - &f).max_abs() < 1e-12);
        }

        #[test]
        fn pairing_is_bilinear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let grid = GridSpec::new(6);
            let f = random_field(grid, seed);
            let g = random_field(grid, seed ^ 7);
            let psi = TestFunction::new(random_field(GridSpec::new(4), seed ^ 11));
            let combo = &(&f * a) + &(&g * b);
            let lhs = pairing(&combo, &psi);
            let rhs = a * pairing(&f, &psi) + b * pairing(&g, &psi);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
