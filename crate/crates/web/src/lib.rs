//! Browser bindings. Each export wraps a plain function so the numerics can
//! be tested natively.

use bbm_core::picard::{contraction_norm, exact_excess_kurtosis, pairing_covariance_finite};
use bbm_core::random::{renorm_sum, sample_gaussian_coeffs, GaussianKind, SeedSpec};
use bbm_core::solvers::{solve_renormalized, solve_weak, SolveConfig};
use bbm_core::spectral::{GridSpec, SpectralField, TestFunction};
use bbm_core::{Error, Result};
use wasm_bindgen::prelude::*;

/// Largest truncation the page may request; keeps a solve under a second.
pub const MAX_TRUNCATION: usize = 128;

fn to_js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `u(x_j)` at `points` equispaced nodes.
pub fn physical_values(f: &SpectralField, points: usize) -> Vec<f64> {
    (0..points)
        .map(|j| {
            let x = 2.0 * std::f64::consts::PI * j as f64 / points as f64;
            let mut v = f.mode(0).re;
            for n in 1..=f.mode_bound() as i64 {
                let c = f.mode(n);
                let (s, co) = (n as f64 * x).sin_cos();
                v += 2.0 * (c.re * co - c.im * s);
            }
            v
        })
        .collect()
}

/// Frames of a truncated BBM solution, flattened row-major as
/// `frames × points`. `weak` selects the weakly interacting scaling instead
/// of renormalized data.
pub fn simulate_frames(
    alpha: f64,
    n_max: usize,
    seed: u64,
    t_final: f64,
    frames: usize,
    points: usize,
    weak: bool,
) -> Result<Vec<f64>> {
    if n_max == 0 || n_max > MAX_TRUNCATION {
        return Err(Error::InvalidArgument(format!(
            "truncation must be in 1..={MAX_TRUNCATION}"
        )));
    }
    if frames < 2 || points < 2 {
        return Err(Error::InvalidArgument("need at least 2 frames and 2 points".into()));
    }
    if !(t_final > 0.0 && t_final <= 20.0) {
        return Err(Error::InvalidArgument("t_final must be in (0, 20]".into()));
    }
    // Step at most 2e-3, rounded so that frames fall on steps.
    let per_frame = (t_final / 2e-3 / (frames - 1) as f64).ceil() as usize;
    let dt = t_final / (per_frame * (frames - 1)) as f64;
    let g = sample_gaussian_coeffs(
        GridSpec::new(2 * n_max),
        SeedSpec::new(seed, 0),
        GaussianKind::InitialData,
    );
    let cfg = SolveConfig::new(dt, t_final, GridSpec::new(4 * n_max)).recording_every(per_frame)?;
    let traj = if weak {
        solve_weak(&g, alpha, n_max, &cfg)?
    } else {
        solve_renormalized(&g, alpha, n_max, &cfg)?
    };
    Ok(traj.states().iter().flat_map(|u| physical_values(u, points)).collect())
}

/// Unrenormalized second-iterate variance against `cos x`.
pub fn blowup_variances(alpha: f64, t: f64, ns: &[u32]) -> Vec<f64> {
    let psi = TestFunction::cosine(1);
    ns.iter()
        .map(|&n| {
            let n = n as usize;
            pairing_covariance_finite(alpha, n, t, t, &psi, &psi) * renorm_sum(alpha, n)
        })
        .collect()
}

/// `[kurtosis, contraction]` pairs, flattened, for the renormalized second
/// iterate paired with `cos x`.
pub fn gaussianization_curve(alpha: f64, t: f64, ns: &[u32]) -> Result<Vec<f64>> {
    let psi = TestFunction::cosine(1);
    let mut out = Vec::with_capacity(2 * ns.len());
    for &n in ns {
        let n = n as usize;
        if n > MAX_TRUNCATION {
            return Err(Error::InvalidArgument(format!(
                "truncation must be at most {MAX_TRUNCATION}"
            )));
        }
        out.push(exact_excess_kurtosis(alpha, n, t, &psi)?);
        out.push(contraction_norm(alpha, n, t, &psi)?);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn simulate(
    alpha: f64,
    n_max: usize,
    seed: u64,
    t_final: f64,
    frames: usize,
    points: usize,
    weak: bool,
) -> std::result::Result<Vec<f64>, JsError> {
    simulate_frames(alpha, n_max, seed, t_final, frames, points, weak).map_err(to_js)
}

#[wasm_bindgen]
pub fn blowup(alpha: f64, t: f64, ns: Vec<u32>) -> Vec<f64> {
    blowup_variances(alpha, t, &ns)
}

#[wasm_bindgen]
pub fn gaussianization(alpha: f64, t: f64, ns: Vec<u32>) -> std::result::Result<Vec<f64>, JsError> {
    gaussianization_curve(alpha, t, &ns).map_err(to_js)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bbm_core::Complex64;

    #[test]
    fn physical_values_of_a_cosine() {
        let grid = GridSpec::new(4);
        let mut f = SpectralField::cosine(grid, 2);
        f.set_mode(1, Complex64::new(0.0, -0.5));
        let v = physical_values(&f, 8);
        for (j, &y) in v.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
            assert!((y - ((2.0 * x).cos() + x.sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn simulation_shapes_and_mean() {
        let v = simulate_frames(0.25, 8, 3, 0.2, 5, 64, false).unwrap();
        assert_eq!(v.len(), 5 * 64);
        assert!(v.iter().all(|x| x.is_finite()));
        // The spatial mean is conserved.
        let means: Vec<f64> = v.chunks(64).map(|c| c.iter().sum::<f64>() / 64.0).collect();
        assert!(means.iter().all(|m| (m - means[0]).abs() < 1e-12));
        assert_eq!(simulate_frames(0.25, 8, 3, 0.3, 7, 16, true).unwrap().len(), 7 * 16);
        assert!(simulate_frames(0.25, 8, 3, -1.0, 5, 64, false).is_err());
        assert!(simulate_frames(0.25, 0, 3, 0.2, 5, 64, true).is_err());
    }

    #[test]
    fn blowup_grows_for_rough_data() {
        let v = blowup_variances(0.0, 1.0, &[16, 64, 256]);
        assert!(v.windows(2).all(|w| w[1] > 1.5 * w[0]));
    }

    #[test]
    fn gaussianization_curve_contracts() {
        let v = gaussianization_curve(0.25, 1.0, &[4, 16, 64]).unwrap();
        let contractions: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
        assert!(contractions.windows(2).all(|w| w[1] < w[0]));
        assert!(gaussianization_curve(0.25, 1.0, &[512]).is_err());
    }
}
