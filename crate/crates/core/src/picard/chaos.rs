//! `⟨Z_N(t), ψ⟩` as a second-order Wiener chaos `Σ f̂(n₁,n₂) g_{n₁} g_{n₂}`.
//!
//! For such a variable `Var = 2Σ|f̂|²` and the fourth cumulant is
//! `48‖f ⊗₁ f‖²`, so the contraction norm controls the distance to Gaussian.

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{phase_integral, require_bound, require_time, BracketWeights};
use crate::error::Result;
use crate::numerics::{ComplexKahan, KahanSum};
use crate::random::{renorm_constant, GaussianCoefficients};
use crate::spectral::{phi_im, phi_symbol, TestFunction};

/// Dense table `Y_{n,m}(t) = e^{tφ(s)}φ(s) conj ψ̂(s) J_{n,m}(t) ⟨n⟩^{−α}⟨m⟩^{−α}`,
/// `s = n+m`, for `|n|,|m| ≤ N`; the kernel is `f̂ = C²_{α,N} Y`.
#[derive(Debug, Clone)]
pub struct ChaosKernel {
    n_max: usize,
    c2: f64,
    y: Vec<Complex64>,
}

impl ChaosKernel {
    pub fn new(alpha: f64, n_max: usize, t: f64, psi: &TestFunction) -> Result<Self> {
        require_time(t)?;
        let w = BracketWeights::new(alpha, n_max);
        let n = n_max as i64;
        let side = 2 * n_max + 1;
        let mut y = vec![Complex64::new(0.0, 0.0); side * side];
        for (row, n1) in (-n..=n).enumerate() {
            for (col, n2) in (-n..=n).enumerate() {
                let s = n1 + n2;
                let p = psi.mode(s);
                if s == 0 || p.norm() == 0.0 {
                    continue;
                }
                y[row * side + col] = Complex64::cis(t * phi_im(s))
                    * phi_symbol(s)
                    * p.conj()
                    * phase_integral(n1, n2, t)
                    * (w.get(n1) * w.get(n2));
            }
        }
        Ok(Self {
            n_max,
            c2: renorm_constant(alpha, n_max).powi(2),
            y,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn side(&self) -> usize {
        2 * self.n_max + 1
    }

    /// `f̂(n₁, n₂)`.
    pub fn kernel(&self, n1: i64, n2: i64) -> Complex64 {
        let n = self.n_max as i64;
        let side = self.side();
        self.y[(n1 + n) as usize * side + (n2 + n) as usize] * self.c2
    }

    /// `2Σ|f̂|²`.
    pub fn variance(&self) -> f64 {
        let s: KahanSum = self.y.iter().map(|c| c.norm_sqr()).collect();
        2.0 * self.c2.powi(2) * s.value()
    }

    /// `‖f ⊗₁ f‖² = C⁸ Σ_{n₁,n₂} |(Y Y^H)_{n₁n₂}|²`, an `O(N³)` Gram product.
    pub fn contraction_norm_sq(&self) -> f64 {
        let side = self.side();
        let rows: Vec<&[Complex64]> = self.y.chunks(side).collect();
        let row_sum = |a: usize| -> f64 {
            let ra = rows[a];
            if ra.iter().all(|c| c.norm() == 0.0) {
                return 0.0;
            }
            let mut acc = KahanSum::new();
            for (b, rb) in rows.iter().enumerate().skip(a) {
                let mut g = ComplexKahan::new();
                for (x, y) in ra.iter().zip(rb.iter()) {
                    g.add(x * y.conj());
                }
                let v = g.value().norm_sqr();
                acc.add(if b == a { v } else { 2.0 * v });
            }
            acc.value()
        };
        #[cfg(feature = "parallel")]
        let per_row: Vec<f64> = (0..side).into_par_iter().map(row_sum).collect();
        #[cfg(not(feature = "parallel"))]
        let per_row: Vec<f64> = (0..side).map(row_sum).collect();
        let total: KahanSum = per_row.into_iter().collect();
        self.c2.powi(4) * total.value()
    }

    /// `κ₄ / Var² = 48‖f⊗₁f‖² / (2Σ|f̂|²)²`; zero for a degenerate kernel.
    pub fn excess_kurtosis(&self) -> f64 {
        let v = self.variance();
        if v == 0.0 {
            0.0
        } else {
            48.0 * self.contraction_norm_sq() / (v * v)
        }
    }
}

/// `‖f^t_{N,ψ} ⊗₁ f^t_{N,ψ}‖_{L²}`.
pub fn contraction_norm(alpha: f64, n_max: usize, t: f64, psi: &TestFunction) -> Result<f64> {
    Ok(ChaosKernel::new(alpha, n_max, t, psi)?.contraction_norm_sq().sqrt())
}

/// Exact excess kurtosis of `⟨Z_N(t), ψ⟩`.
pub fn exact_excess_kurtosis(alpha: f64, n_max: usize, t: f64, psi: &TestFunction) -> Result<f64> {
    Ok(ChaosKernel::new(alpha, n_max, t, psi)?.excess_kurtosis())
}

/// Precomputed weights for `⟨Z_N(t), ψ⟩` at `O(N·|supp ψ|)` per sample.
#[derive(Debug, Clone)]
pub struct PairingKernel {
    n_max: usize,
    /// `(s, first n₁, coefficients over n₁)` for each support mode `s ≠ 0`.
    rows: Vec<(i64, i64, Vec<Complex64>)>,
}

impl PairingKernel {
    pub fn new(alpha: f64, n_max: usize, t: f64, psi: &TestFunction) -> Result<Self> {
        require_time(t)?;
        let w = BracketWeights::new(alpha, n_max);
        let c2 = renorm_constant(alpha, n_max).powi(2);
        let rows = psi
            .support()
            .into_iter()
            .filter(|&s| s != 0 && s.unsigned_abs() as usize <= 2 * n_max)
            .map(|s| {
                let front = Complex64::cis(t * phi_im(s)) * phi_symbol(s) * psi.mode(s).conj() * c2;
                let range = w.pair_range(s);
                let start = *range.start();
                let coeffs = range
                    .map(|n1| front * phase_integral(n1, s - n1, t) * (w.get(n1) * w.get(s - n1)))
                    .collect();
                (s, start, coeffs)
            })
            .collect();
        Ok(Self { n_max, rows })
    }

    pub fn eval(&self, g: &GaussianCoefficients) -> Result<f64> {
        require_bound(g.mode_bound(), self.n_max)?;
        let mut acc = ComplexKahan::new();
        for (s, start, coeffs) in &self.rows {
            for (k, c) in coeffs.iter().enumerate() {
                let n1 = start + k as i64;
                acc.add(c * g.get(n1) * g.get(s - n1));
            }
        }
        Ok(acc.value().re)
    }
}
