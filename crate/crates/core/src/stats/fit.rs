use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::spectral::{h_norm_sq, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingModel {
    /// `y = A·xᵇ`, fitted as `ln y = ln A + b ln x`.
    PowerLaw,
    /// `y = a + b ln x`.
    LogLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub slope: f64,
    /// `ln A` for a power law.
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `ys` against `xs` in the transformed coordinates.
pub fn scaling_fit(xs: &[f64], ys: &[f64], model: ScalingModel) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("scaling fit needs at least 2 points".into()));
    }
    if xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument("scaling fit needs positive abscissae".into()));
    }
    let u: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let v: Vec<f64> = match model {
        ScalingModel::PowerLaw => {
            if ys.iter().any(|&y| !(y > 0.0)) {
                return Err(Error::InvalidArgument("power-law fit needs positive values".into()));
            }
            ys.iter().map(|y| y.ln()).collect()
        }
        ScalingModel::LogLinear => ys.to_vec(),
    };
    let (slope, intercept, r_squared) = least_squares(&u, &v);
    if !slope.is_finite() {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    Ok(ScalingFit {
        model,
        slope,
        intercept,
        r_squared,
    })
}

fn least_squares(u: &[f64], v: &[f64]) -> (f64, f64, f64) {
    let n = u.len() as f64;
    let mu = pairwise_sum(u) / n;
    let mv = pairwise_sum(v) / n;
    let suu = pairwise_sum(&u.iter().map(|x| (x - mu).powi(2)).collect::<Vec<_>>());
    let svv = pairwise_sum(&v.iter().map(|y| (y - mv).powi(2)).collect::<Vec<_>>());
    let suv = pairwise_sum(&u.iter().zip(v).map(|(x, y)| (x - mu) * (y - mv)).collect::<Vec<_>>());
    let slope = suv / suu;
    let r2 = if svv > 0.0 { suv * suv / (suu * svv) } else { 1.0 };
    (slope, mv - slope * mu, r2)
}

/// Mean squared `Hˢ` increments by lag, with the fitted exponent `2θ`
/// of `E‖X(t+h) − X(t)‖² ∼ h^{2θ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementRegularity {
    pub s: f64,
    pub lags: Vec<f64>,
    pub mean_sq_increments: Vec<f64>,
    /// `None` when some increment moment vanishes.
    pub exponent: Option<f64>,
    pub r_squared: Option<f64>,
}

/// Averages `‖X(t+h) − X(t)‖²_{Hˢ}` over paths and over every recorded base
/// time `t` with `t + h` on the grid. Paths must share one uniform grid and
/// each lag must be a multiple of its step.
pub fn increment_regularity(paths: &[Trajectory], s: f64, lags: &[f64]) -> Result<IncrementRegularity> {
    let first = paths.first().ok_or_else(|| Error::InvalidArgument("no paths".into()))?;
    let dt = first.uniform_step()?;
    for p in paths {
        if p.times().len() != first.times().len()
            || p.times()
                .iter()
                .zip(first.times())
                .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
        {
            return Err(Error::InvalidArgument("paths do not share a time grid".into()));
        }
    }
    if lags.is_empty() {
        return Err(Error::InvalidArgument("no lags".into()));
    }
    let mut mean_sq = Vec::with_capacity(lags.len());
    for &h in lags {
        let k = (h / dt).round();
        if !(k >= 1.0) || (k * dt - h).abs() > 1e-9 * h.max(dt) {
            return Err(Error::InvalidArgument(format!(
                "lag {h} is not a multiple of the step {dt}"
            )));
        }
        let k = k as usize;
        if k >= first.len() {
            return Err(Error::InvalidArgument(format!("lag {h} exceeds the recorded horizon")));
        }
        let per_path: Vec<f64> = paths
            .iter()
            .map(|p| {
                let st = p.states();
                let terms: Vec<f64> = (0..st.len() - k)
                    .map(|i| h_norm_sq(&(&st[i + k] - &st[i]), s))
                    .collect();
                pairwise_sum(&terms) / terms.len() as f64
            })
            .collect();
        mean_sq.push(pairwise_sum(&per_path) / paths.len() as f64);
    }
    let fit = if lags.len() >= 2 && mean_sq.iter().all(|&m| m > 0.0) {
        Some(scaling_fit(lags, &mean_sq, ScalingModel::PowerLaw)?)
    } else {
        None
    };
    Ok(IncrementRegularity {
        s,
        lags: lags.to_vec(),
        mean_sq_increments: mean_sq,
        exponent: fit.map(|f| f.slope),
        r_squared: fit.map(|f| f.r_squared),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{SeedSpec, WienerIncrements};
    use crate::spectral::{GridSpec, SpectralField};
    use proptest::prelude::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.75)).collect();
        let f = scaling_fit(&xs, &ys, ScalingModel::PowerLaw).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let g = scaling_fit(
            &xs,
            &[1.0, 1.0 + 2f64.ln(), 1.0 + 4f64.ln(), 1.0 + 8f64.ln()],
            ScalingModel::LogLinear,
        )
        .unwrap();
        assert!((g.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(scaling_fit(&[1.0, 2.0], &[1.0, 0.0], ScalingModel::PowerLaw).is_err());
        assert!(scaling_fit(&[1.0, 2.0], &[1.0, 0.0], ScalingModel::LogLinear).is_ok());
        assert!(scaling_fit(&[0.0, 2.0], &[1.0, 2.0], ScalingModel::LogLinear).is_err());
        assert!(scaling_fit(&[1.0], &[1.0], ScalingModel::PowerLaw).is_err());
        assert!(scaling_fit(&[2.0, 2.0], &[1.0, 3.0], ScalingModel::PowerLaw).is_err());
    }

    fn linear_in_time(slope: f64) -> Trajectory {
        let grid = GridSpec::new(4);
        let times: Vec<f64> = (0..=32).map(|k| k as f64 / 32.0).collect();
        let states = times
            .iter()
            .map(|&t| &SpectralField::cosine(grid, 2) * (slope * t))
            .collect();
        Trajectory::new(times, states).unwrap()
    }

    #[test]
    fn smooth_paths_have_quadratic_increments() {
        let r = increment_regularity(
            &[linear_in_time(1.0), linear_in_time(2.0)],
            0.0,
            &[1.0 / 32.0, 1.0 / 8.0, 0.25],
        )
        .unwrap();
        assert!((r.exponent.unwrap() - 2.0).abs() < 1e-10);
        assert!(increment_regularity(&[linear_in_time(1.0)], 0.0, &[0.01]).is_err());
        assert!(increment_regularity(&[linear_in_time(1.0)], 0.0, &[2.0]).is_err());
        let flat = increment_regularity(&[linear_in_time(0.0)], 0.0, &[0.25, 0.5]).unwrap();
        assert_eq!(flat.exponent, None);
    }

    #[test]
    fn brownian_paths_have_linear_increments() {
        let times: Vec<f64> = (1..=256).map(|k| k as f64 / 256.0).collect();
        let grid = GridSpec::new(16);
        let paths: Vec<Trajectory> = (0..40)
            .map(|i| {
                WienerIncrements::sample(0.0, 8, &times, SeedSpec::new(9, i))
                    .unwrap()
                    .convolution_path(1.0, grid)
                    .unwrap()
            })
            .collect();
        let lags = [1.0 / 256.0, 1.0 / 64.0, 1.0 / 16.0];
        let r = increment_regularity(&paths, -1.0, &lags).unwrap();
        let e = r.exponent.unwrap();
        assert!((0.8..=1.2).contains(&e), "exponent {e}");
    }

    proptest! {
        #[test]
        fn power_law_slope_is_scale_free(b in -3.0f64..3.0, a in 0.01f64..100.0) {
            let xs = [0.5, 1.0, 3.0, 7.0, 20.0];
            let ys: Vec<f64> = xs.iter().map(|x: &f64| a * x.powf(b)).collect();
            let f = scaling_fit(&xs, &ys, ScalingModel::PowerLaw).unwrap();
            prop_assert!((f.slope - b).abs() < 1e-9);
        }
    }
}
