//! Equations driven by the space-time noise `⟨∂ₓ⟩^α ∂ₓ ξ`.
//!
//! The two truncated equations use integrating-factor Euler–Maruyama: exact
//! transport by `S(dt)`, one explicit nonlinear substep, and the exact
//! Gaussian increment of the stochastic convolution over the step. The
//! scheme has weak order 1; with the nonlinearity switched off it reproduces
//! the sampled stochastic convolution exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolveConfig;
use crate::error::{Error, Result};
use crate::random::{limit_noise_path, renorm_constant, SeedSpec, WienerIncrements};
use crate::spectral::{phi_im, semigroup_apply, square, SpectralField, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AppendixVariant {
    /// Full nonlinearity, noise scaled by `C_{1−α,N}`.
    NoiseRenormalized,
    /// Nonlinearity scaled by `C²_{1−α,N}`, unscaled noise.
    WeakInteraction,
    /// Linear limit of the weakly interacting equation with the extra
    /// Gaussian forcing `∂ₓϒ`.
    Limit,
}

/// Frozen noise for one solve: Wiener-integral increments on the step grid
/// and, for [`AppendixVariant::Limit`], a sample of `ϒ` on the same nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixNoise {
    pub brownian: WienerIncrements,
    pub limit: Option<Trajectory>,
}

impl AppendixNoise {
    pub fn sample(
        seed: SeedSpec,
        alpha_app: f64,
        n_max: usize,
        variant: AppendixVariant,
        cfg: &SolveConfig,
    ) -> Result<Self> {
        let steps = cfg.steps()?;
        let times: Vec<f64> = (1..=steps).map(|k| cfg.time_of(k)).collect();
        let brownian = WienerIncrements::sample(alpha_app, n_max, &times, seed)?;
        let limit = match variant {
            AppendixVariant::Limit => Some(limit_noise_path(n_max, &times, seed, cfg.grid)?),
            _ => None,
        };
        Ok(Self { brownian, limit })
    }
}

fn aligned_increments(noise: &WienerIncrements, cfg: &SolveConfig, steps: usize) -> Result<WienerIncrements> {
    let intervals = noise.times().len() - 1;
    if intervals % steps != 0 {
        return Err(Error::InvalidArgument(format!(
            "noise with {intervals} intervals cannot drive {steps} steps"
        )));
    }
    let coarse = noise.coarsen(intervals / steps)?;
    for (k, &t) in coarse.times().iter().enumerate() {
        if (t - cfg.time_of(k)).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::NonUniformGrid { index: k });
        }
    }
    Ok(coarse)
}

/// Solves one of the noise-driven equations from `v0` with frozen noise.
pub fn appendix_solve_with_noise(
    v0: &SpectralField,
    noise: &AppendixNoise,
    alpha_app: f64,
    n_max: usize,
    variant: AppendixVariant,
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    if alpha_app < 0.75 && variant != AppendixVariant::Limit {
        log::warn!("noise-driven solve with alpha {alpha_app} below 3/4");
    }
    if cfg.grid.mode_bound() < 2 * n_max {
        return Err(Error::GridTooSmall {
            needed: 2 * n_max,
            have: cfg.grid.mode_bound(),
        });
    }
    if v0.grid() != cfg.grid {
        return Err(Error::GridMismatch {
            left: v0.mode_bound(),
            right: cfg.grid.mode_bound(),
        });
    }
    let steps = cfg.steps()?;
    let records = cfg.record_steps()?;
    let w = aligned_increments(&noise.brownian, cfg, steps)?;
    let c = renorm_constant(1.0 - alpha_app, n_max);
    let (noise_coef, nonlinear_coef) = match variant {
        AppendixVariant::NoiseRenormalized => (c, 1.0),
        AppendixVariant::WeakInteraction => (1.0, c * c),
        AppendixVariant::Limit => (1.0, 0.0),
    };
    let limit_forcing = match (variant, &noise.limit) {
        (AppendixVariant::Limit, Some(path)) => {
            if path.len() != steps + 1 {
                return Err(Error::LengthMismatch {
                    expected: steps + 1,
                    got: path.len(),
                });
            }
            Some(path.map(|s| s.regrid(cfg.grid).apply_phi()))
        }
        (AppendixVariant::Limit, None) => {
            return Err(Error::InvalidArgument("limit solve needs a limit-noise path".into()))
        }
        _ => None,
    };

    let dt = cfg.dt;
    let mut u = v0.clone();
    // −∫₀ᵗ S(t−s)φ(D)ϒ(s) ds, trapezoidal.
    let mut upsilon_part = SpectralField::zeros(cfg.grid);
    let mut times = Vec::with_capacity(records.len());
    let mut states = Vec::with_capacity(records.len());
    let mut next = 0;
    for k in 0..=steps {
        if records.get(next) == Some(&k) {
            times.push(cfg.time_of(k));
            states.push(if variant == AppendixVariant::Limit {
                &u + &upsilon_part
            } else {
                u.clone()
            });
            next += 1;
        }
        if k == steps {
            break;
        }
        if nonlinear_coef != 0.0 {
            u.axpy(dt * nonlinear_coef, &square(&u).apply_phi());
        }
        u = semigroup_apply(&u, dt);
        let t_next = cfg.time_of(k + 1);
        let n_top = n_max.min(cfg.grid.mode_bound());
        for n in 1..=n_top {
            let kick = Complex64::cis(t_next * phi_im(n as i64)) * w.increment(k, n) * noise_coef;
            u.set_mode(n as i64, u.mode(n as i64) - kick);
        }
        if let Some(f) = &limit_forcing {
            let s = f.states();
            let mut acc = semigroup_apply(&upsilon_part, dt);
            acc.axpy(-0.5 * dt, &semigroup_apply(&s[k], dt));
            acc.axpy(-0.5 * dt, &s[k + 1]);
            upsilon_part = acc;
        }
        if !u.is_finite() {
            return Err(Error::NonFinite { step: k + 1 });
        }
    }
    Trajectory::new(times, states)
}

/// Samples the noise from `seed` on the step grid and solves.
pub fn appendix_solve(
    seed: SeedSpec,
    v0: &SpectralField,
    alpha_app: f64,
    n_max: usize,
    variant: AppendixVariant,
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    let noise = AppendixNoise::sample(seed, alpha_app, n_max, variant, cfg)?;
    appendix_solve_with_noise(v0, &noise, alpha_app, n_max, variant, cfg)
}
