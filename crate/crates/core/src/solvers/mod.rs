//! Time integration of the BBM family in first-order form
//! `∂ₜu = φ(D)u + c·φ(D)(u²)` plus forcing and noise variants.
//!
//! The system is non-stiff (`|φ(n)| ≤ 1/2`), so plain explicit RK4 on the
//! Fourier coefficients is used throughout, except for the noise-driven
//! problems in [`appendix`], which need exact stochastic increments per step.

pub mod appendix;
mod diagnostics;
mod fixed_point;
mod forcing;

pub use appendix::{appendix_solve, appendix_solve_with_noise, AppendixNoise, AppendixVariant};
pub use diagnostics::{
    forcing_norms, gronwall_envelope, invariant_report, InvariantReport, InvariantRow, GRONWALL_CONSTANT,
};
pub use fixed_point::{duhamel_fixed_point, FixedPoint};
pub use forcing::{ClosedFormForcing, ForcingProvider, LimitForcing, SampledForcing, ZeroForcing};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::picard::limit_convolution;
use crate::random::{initial_data, renorm_constant, renormalized_truncated_data, GaussianCoefficients};
use crate::spectral::{dirichlet_project, semigroup_apply, square, GridSpec, SpectralField, Trajectory};

/// Tail-energy thresholds for truncated-data solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monitors {
    #[serde(default)]
    pub tail_energy: bool,
    #[serde(default = "default_tail_warn")]
    pub tail_warn: f64,
    #[serde(default = "default_tail_error")]
    pub tail_error: f64,
}

fn default_tail_warn() -> f64 {
    1e-8
}

fn default_tail_error() -> f64 {
    1e-4
}

impl Default for Monitors {
    fn default() -> Self {
        Self {
            tail_energy: false,
            tail_warn: default_tail_warn(),
            tail_error: default_tail_error(),
        }
    }
}

/// Step size, horizon, grid and recording schedule.
///
/// The recorded trajectory always contains `t = 0` and `t = t_final` in
/// addition to `record_times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub record_times: Vec<f64>,
    #[serde(default)]
    pub monitors: Monitors,
}

impl SolveConfig {
    pub fn new(dt: f64, t_final: f64, grid: GridSpec) -> Self {
        Self {
            dt,
            t_final,
            grid,
            record_times: Vec::new(),
            monitors: Monitors::default(),
        }
    }

    pub fn with_records(mut self, times: Vec<f64>) -> Self {
        self.record_times = times;
        self
    }

    /// Records every `stride`-th step.
    pub fn recording_every(mut self, stride: usize) -> Result<Self> {
        let steps = self.steps()?;
        let stride = stride.max(1);
        self.record_times = (0..=steps).step_by(stride).map(|k| k as f64 * self.dt).collect();
        Ok(self)
    }

    fn step_index(&self, t: f64) -> Option<usize> {
        let k = t / self.dt;
        let r = k.round();
        ((k - r).abs() <= 1e-6 && r >= 0.0).then_some(r as usize)
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt and t_final must be positive, got dt={} t_final={}",
                self.dt, self.t_final
            )));
        }
        self.step_index(self.t_final)
            .ok_or_else(|| Error::InvalidArgument(format!("dt={} does not divide t_final={}", self.dt, self.t_final)))
    }

    /// Sorted, deduplicated step indices to record.
    pub fn record_steps(&self) -> Result<Vec<usize>> {
        let steps = self.steps()?;
        let mut out = vec![0, steps];
        for (i, &t) in self.record_times.iter().enumerate() {
            match self.step_index(t) {
                Some(k) if k <= steps => out.push(k),
                _ => return Err(Error::NonUniformGrid { index: i }),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn time_of(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// `φ(D)u + c·φ(D)(u²)` with a dealiased square.
pub fn bbm_rhs(u: &SpectralField, nonlinearity_coefficient: f64) -> SpectralField {
    let mut out = u.clone();
    if nonlinearity_coefficient != 0.0 {
        out.axpy(nonlinearity_coefficient, &square(u));
    }
    out.apply_phi()
}

/// Right-hand side `F(u, f)` where `f` is the forcing at the stage time.
pub type Rhs<'a> = dyn Fn(&SpectralField, Option<&SpectralField>) -> SpectralField + Sync + 'a;

/// Classical RK4 on the coefficient vector; forcing is evaluated at `t`,
/// `t + dt/2`, `t + dt`.
pub fn rk4_integrate(
    u0: &SpectralField,
    rhs: &Rhs<'_>,
    forcing: Option<&dyn ForcingProvider>,
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    if u0.grid() != cfg.grid {
        return Err(Error::GridMismatch {
            left: u0.mode_bound(),
            right: cfg.grid.mode_bound(),
        });
    }
    let steps = cfg.steps()?;
    let records = cfg.record_steps()?;
    let dt = cfg.dt;
    let eval_forcing =
        |t: f64| -> Result<Option<SpectralField>> { forcing.map(|f| f.forcing_at(t, cfg.grid)).transpose() };
    let mut u = u0.clone();
    let mut times = Vec::with_capacity(records.len());
    let mut states = Vec::with_capacity(records.len());
    let mut next = 0;
    let mut warned = false;
    let mut f_start = eval_forcing(0.0)?;
    for k in 0..=steps {
        let t = cfg.time_of(k);
        if records.get(next) == Some(&k) {
            times.push(t);
            states.push(u.clone());
            next += 1;
        }
        if cfg.monitors.tail_energy {
            let frac = u.tail_fraction();
            if frac > cfg.monitors.tail_error {
                return Err(Error::TailEnergy {
                    fraction: frac,
                    limit: cfg.monitors.tail_error,
                    time: t,
                });
            }
            if frac > cfg.monitors.tail_warn && !warned {
                log::warn!(
                    "tail energy fraction {frac:.3e} at t={t} exceeds {:.1e}",
                    cfg.monitors.tail_warn
                );
                warned = true;
            }
        }
        if k == steps {
            break;
        }
        let f_mid = eval_forcing(t + 0.5 * dt)?;
        let f_end = eval_forcing(cfg.time_of(k + 1))?;
        let k1 = rhs(&u, f_start.as_ref());
        let mut stage = u.clone();
        stage.axpy(0.5 * dt, &k1);
        let k2 = rhs(&stage, f_mid.as_ref());
        let mut stage = u.clone();
        stage.axpy(0.5 * dt, &k2);
        let k3 = rhs(&stage, f_mid.as_ref());
        let mut stage = u.clone();
        stage.axpy(dt, &k3);
        let k4 = rhs(&stage, f_end.as_ref());
        u.axpy(dt / 6.0, &k1);
        u.axpy(dt / 3.0, &k2);
        u.axpy(dt / 3.0, &k3);
        u.axpy(dt / 6.0, &k4);
        if !u.is_finite() {
            return Err(Error::NonFinite { step: k + 1 });
        }
        f_start = f_end;
    }
    Trajectory::new(times, states)
}

/// BBM with nonlinearity scaled by `coefficient`.
pub fn solve_bbm_scaled(u0: &SpectralField, coefficient: f64, cfg: &SolveConfig) -> Result<Trajectory> {
    let rhs = move |u: &SpectralField, _: Option<&SpectralField>| bbm_rhs(u, coefficient);
    rk4_integrate(u0, &rhs, None, cfg)
}

pub fn solve_bbm(u0: &SpectralField, cfg: &SolveConfig) -> Result<Trajectory> {
    solve_bbm_scaled(u0, 1.0, cfg)
}

fn truncated_cfg(n_max: usize, cfg: &SolveConfig) -> Result<SolveConfig> {
    if cfg.grid.mode_bound() < 4 * n_max {
        return Err(Error::GridTooSmall {
            needed: 4 * n_max,
            have: cfg.grid.mode_bound(),
        });
    }
    let mut cfg = cfg.clone();
    cfg.monitors.tail_energy = true;
    Ok(cfg)
}

/// BBM from `C_{α,N} P_N u₀`; requires `M ≥ 4N` and monitors tail energy.
pub fn solve_renormalized(g: &GaussianCoefficients, alpha: f64, n_max: usize, cfg: &SolveConfig) -> Result<Trajectory> {
    let cfg = truncated_cfg(n_max, cfg)?;
    let u0 = renormalized_truncated_data(g, alpha, n_max)?.regrid(cfg.grid);
    solve_bbm(&u0, &cfg)
}

/// Weakly interacting BBM: data `P_N u₀`, nonlinearity scaled by `C²_{α,N}`.
pub fn solve_weak(g: &GaussianCoefficients, alpha: f64, n_max: usize, cfg: &SolveConfig) -> Result<Trajectory> {
    let cfg = truncated_cfg(n_max, cfg)?;
    if n_max > g.mode_bound() {
        return Err(Error::GridTooSmall {
            needed: n_max,
            have: g.mode_bound(),
        });
    }
    let u0 = dirichlet_project(&initial_data(g, alpha)?, n_max, false).regrid(cfg.grid);
    solve_bbm_scaled(&u0, renorm_constant(alpha, n_max).powi(2), &cfg)
}

/// `∂ₜv = φ(D)v + φ(D)((v + f(t))²)`.
pub fn solve_perturbed(v0: &SpectralField, forcing: &dyn ForcingProvider, cfg: &SolveConfig) -> Result<Trajectory> {
    let rhs = |v: &SpectralField, f: Option<&SpectralField>| match f {
        Some(f) => {
            let mut w = v.clone();
            w.axpy(1.0, f);
            let mut out = v.clone();
            out.axpy(1.0, &square(&w));
            out.apply_phi()
        }
        None => bbm_rhs(v, 1.0),
    };
    rk4_integrate(v0, &rhs, Some(forcing), cfg)
}

/// Solution `u = Z + v` of the limiting equation, with both parts recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSolution {
    pub u: Trajectory,
    pub z: Trajectory,
    pub v: Trajectory,
}

/// Limit equation forced by `∂ₓζ`: `Z` in closed form, `v` by
/// [`solve_perturbed`] with forcing `Z`.
pub fn solve_limit_sbbm(zeta: &SpectralField, v0: &SpectralField, cfg: &SolveConfig) -> Result<LimitSolution> {
    let zeta = zeta.regrid(cfg.grid);
    let forcing = LimitForcing::new(zeta.clone());
    let v = solve_perturbed(v0, &forcing, cfg)?;
    let z_states = v
        .times()
        .iter()
        .map(|&t| limit_convolution(&zeta, t))
        .collect::<Result<Vec<_>>>()?;
    let z = Trajectory::new(v.times().to_vec(), z_states)?;
    let u_states = z.states().iter().zip(v.states()).map(|(a, b)| a + b).collect();
    let u = Trajectory::new(v.times().to_vec(), u_states)?;
    Ok(LimitSolution { u, z, v })
}

/// `S(t)u₀ + Z(t)` for the linear limit with independent data and noise.
pub fn linear_limit(u0: &SpectralField, zeta: &SpectralField, t: f64) -> Result<SpectralField> {
    if u0.grid() != zeta.grid() {
        return Err(Error::GridMismatch {
            left: u0.mode_bound(),
            right: zeta.mode_bound(),
        });
    }
    Ok(&semigroup_apply(u0, t) + &limit_convolution(zeta, t)?)
}
