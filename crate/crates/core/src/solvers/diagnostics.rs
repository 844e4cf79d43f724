use serde::{Deserialize, Serialize};

use super::forcing::ForcingProvider;
use crate::error::Result;
use crate::spectral::{h_norm_sq, physical_power_mean, GridSpec, Trajectory};

/// Per-time invariants of a recorded trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantRow {
    pub t: f64,
    pub mean: f64,
    pub h0: f64,
    pub h1: f64,
    pub tail_fraction: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub rows: Vec<InvariantRow>,
    /// `max_t |û(t,0) − û(0,0)|`.
    pub mean_drift: f64,
    /// `max_t |H¹(t) − H¹(0)| / H¹(0)`, zero for the zero field.
    pub h1_relative_drift: f64,
    pub max_tail_fraction: f64,
}

/// `H⁰` and `H¹` are the functionals `Σ|û|²` and `Σ⟨n⟩²|û|²`.
pub fn invariant_report(traj: &Trajectory) -> InvariantReport {
    let rows: Vec<InvariantRow> = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(&t, u)| InvariantRow {
            t,
            mean: u.mode(0).re,
            h0: h_norm_sq(u, 0.0),
            h1: h_norm_sq(u, 1.0),
            tail_fraction: u.tail_fraction(),
            max_abs: u.max_abs(),
        })
        .collect();
    let (mean0, h10) = rows.first().map_or((0.0, 0.0), |r| (r.mean, r.h1));
    let mean_drift = rows.iter().map(|r| (r.mean - mean0).abs()).fold(0.0, f64::max);
    let h1_relative_drift = if h10 > 0.0 {
        rows.iter().map(|r| (r.h1 - h10).abs() / h10).fold(0.0, f64::max)
    } else {
        0.0
    };
    let max_tail_fraction = rows.iter().map(|r| r.tail_fraction).fold(0.0, f64::max);
    InvariantReport {
        rows,
        mean_drift,
        h1_relative_drift,
        max_tail_fraction,
    }
}

/// Implementation constant of the energy envelope.
pub const GRONWALL_CONSTANT: f64 = 8.0;

/// `(K₁t + ‖v₀‖²_{H¹}) e^{K₂t}` with `K₁ = c‖f‖⁴_{L⁴}`, `K₂ = c(1 + ‖f‖_{L²})`,
/// norms taken as suprema over `[0, t]` with respect to `dx/2π`.
pub fn gronwall_envelope(f_l4_pow4: f64, f_l2: f64, v0_h1_sq: f64, t: f64) -> f64 {
    let k1 = GRONWALL_CONSTANT * f_l4_pow4;
    let k2 = GRONWALL_CONSTANT * (1.0 + f_l2);
    (k1 * t + v0_h1_sq) * (k2 * t).exp()
}

/// `(sup ‖f‖⁴_{L⁴}, sup ‖f‖_{L²})` over the given times.
pub fn forcing_norms(forcing: &dyn ForcingProvider, grid: GridSpec, times: &[f64]) -> Result<(f64, f64)> {
    let mut l4 = 0.0f64;
    let mut l2 = 0.0f64;
    for &t in times {
        let f = forcing.forcing_at(t, grid)?;
        l4 = l4.max(physical_power_mean(&f, 4, 4 * grid.len()));
        l2 = l2.max(h_norm_sq(&f, 0.0).sqrt());
    }
    Ok((l4, l2))
}
