use super::forcing::ForcingProvider;
use crate::error::{Error, Result};
use crate::spectral::{h_norm, semigroup_apply, square, GridSpec, SpectralField};

/// Result of Picard iteration on the Duhamel map.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    /// Final iterate at `t_short`.
    pub value: SpectralField,
    /// `sup_t ‖v^{k+1}(t) − v^k(t)‖_{H¹}` for each iteration.
    pub distances: Vec<f64>,
}

/// Iterates `v ↦ S(t)v₀ + ∫₀ᵗ S(t−s)φ(D)((v+f)²)(s) ds` on a uniform grid
/// of step `dt` over `[0, t_short]`, with trapezoidal time quadrature.
///
/// Aborts when an iterate's sup-in-time `H¹` norm more than doubles.
pub fn duhamel_fixed_point(
    v0: &SpectralField,
    forcing: &dyn ForcingProvider,
    t_short: f64,
    dt: f64,
    iterations: usize,
) -> Result<FixedPoint> {
    let steps = (t_short / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - t_short).abs() > 1e-9 * t_short.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "dt={dt} does not divide t_short={t_short}"
        )));
    }
    let grid: GridSpec = v0.grid();
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let f: Vec<SpectralField> = times
        .iter()
        .map(|&t| forcing.forcing_at(t, grid))
        .collect::<Result<_>>()?;
    let free: Vec<SpectralField> = times.iter().map(|&t| semigroup_apply(v0, t)).collect();
    let sup_norm = |path: &[SpectralField]| path.iter().map(|v| h_norm(v, 1.0)).fold(0.0, f64::max);

    let mut v = free.clone();
    let mut distances = Vec::with_capacity(iterations);
    let mut prev_norm = sup_norm(&v);
    let step_flow = |x: &SpectralField| semigroup_apply(x, dt);
    for it in 0..iterations {
        // Nonlinear integrand φ(D)((v+f)²) at each node.
        let g: Vec<SpectralField> = v
            .iter()
            .zip(&f)
            .map(|(vi, fi)| square(&(vi + fi)).apply_phi())
            .collect();
        // A_j = Σ_{i<j} c_i S(t_j − t_i) g_i with c_0 = 1/2, else 1.
        let mut next = Vec::with_capacity(v.len());
        next.push(free[0].clone());
        let mut acc = SpectralField::zeros(grid);
        for j in 1..=steps {
            let c = if j == 1 { 0.5 } else { 1.0 };
            acc.axpy(c, &g[j - 1]);
            acc = step_flow(&acc);
            let mut vj = free[j].clone();
            vj.axpy(dt, &acc);
            vj.axpy(0.5 * dt, &g[j]);
            next.push(vj);
        }
        let dist = next
            .iter()
            .zip(&v)
            .map(|(a, b)| h_norm(&(a - b), 1.0))
            .fold(0.0, f64::max);
        distances.push(dist);
        let norm = sup_norm(&next);
        if !norm.is_finite() || (prev_norm > 0.0 && norm > 2.0 * prev_norm && norm > 1e-12) {
            return Err(Error::Divergence { iterate: it + 1 });
        }
        prev_norm = norm;
        v = next;
    }
    Ok(FixedPoint {
        value: v.pop().expect("at least one node"),
        distances,
    })
}
