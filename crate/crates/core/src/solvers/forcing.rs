use crate::error::{Error, Result};
use crate::picard::limit_convolution;
use crate::spectral::{GridSpec, SpectralField, Trajectory};

/// Time-indexed source term evaluated at integrator stage times.
pub trait ForcingProvider: Sync {
    /// `f(t)` on `grid`.
    fn forcing_at(&self, t: f64, grid: GridSpec) -> Result<SpectralField>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroForcing;

impl ForcingProvider for ZeroForcing {
    fn forcing_at(&self, _t: f64, grid: GridSpec) -> Result<SpectralField> {
        Ok(SpectralField::zeros(grid))
    }
}

/// `t ↦ Z(t)` from a fixed white-noise sample, exact at any `t`.
#[derive(Debug, Clone)]
pub struct LimitForcing {
    zeta: SpectralField,
}

impl LimitForcing {
    pub fn new(zeta: SpectralField) -> Self {
        Self { zeta }
    }
}

impl ForcingProvider for LimitForcing {
    fn forcing_at(&self, t: f64, grid: GridSpec) -> Result<SpectralField> {
        Ok(limit_convolution(&self.zeta, t)?.regrid(grid))
    }
}

/// Any closed-form `t ↦ f(t)`.
pub struct ClosedFormForcing<F>(pub F);

impl<F> ForcingProvider for ClosedFormForcing<F>
where
    F: Fn(f64) -> SpectralField + Sync,
{
    fn forcing_at(&self, t: f64, grid: GridSpec) -> Result<SpectralField> {
        Ok((self.0)(t).regrid(grid))
    }
}

/// A recorded path; every requested time must coincide with a node, so
/// paths driving RK4 must be sampled at `dt/2` spacing.
#[derive(Debug, Clone)]
pub struct SampledForcing {
    path: Trajectory,
}

impl SampledForcing {
    pub fn new(path: Trajectory) -> Self {
        Self { path }
    }

    pub fn path(&self) -> &Trajectory {
        &self.path
    }
}

impl ForcingProvider for SampledForcing {
    fn forcing_at(&self, t: f64, grid: GridSpec) -> Result<SpectralField> {
        let i = self
            .path
            .nearest_index(t)
            .ok_or_else(|| Error::InvalidArgument("empty forcing path".into()))?;
        let node = self.path.times()[i];
        if (node - t).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "forcing path has no node at t={t} (nearest {node})"
            )));
        }
        Ok(self.path.states()[i].regrid(grid))
    }
}
