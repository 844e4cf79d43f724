//! Export formats for fields and trajectories.
//!
//! * Fields: mode-indexed rows `(n, re, im)` for `n = −M..M`.
//! * Trajectories: CSV rows `(t, n, re, im)`, or a little-endian binary
//!   layout:
//!
//! ```text
//! magic  b"BBMT"          4 bytes
//! version u32 = 1
//! M       u32             mode bound
//! steps   u32             number of recorded states
//! then per state: t: f64, followed by 2M+1 pairs (re: f64, im: f64)
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridSpec, SpectralField, Trajectory};
use crate::error::{Error, Result};

pub const TRAJECTORY_MAGIC: [u8; 4] = *b"BBMT";
const TRAJECTORY_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

pub fn field_rows(f: &SpectralField) -> Vec<ModeRow> {
    f.modes().map(|(n, c)| ModeRow { n, re: c.re, im: c.im }).collect()
}

/// Rebuilds a field from `(n, re, im)` rows; missing modes are zero.
pub fn field_from_rows(grid: GridSpec, rows: &[ModeRow]) -> Result<SpectralField> {
    let m = grid.mode_bound() as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for r in rows {
        if r.n.abs() > m {
            return Err(Error::GridTooSmall {
                needed: r.n.unsigned_abs() as usize,
                have: grid.mode_bound(),
            });
        }
        coeffs[(r.n + m) as usize] = Complex64::new(r.re, r.im);
    }
    SpectralField::from_coeffs(grid, coeffs)
}

pub fn write_field_csv<W: Write>(f: &SpectralField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in field_rows(f) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (&t, state) in traj.times().iter().zip(traj.states()) {
        for (n, c) in state.modes() {
            w.serialize(TrajectoryRow {
                t,
                n,
                re: c.re,
                im: c.im,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_binary<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let m = traj.states().first().map_or(0, |s| s.mode_bound());
    out.write_all(&TRAJECTORY_MAGIC)?;
    out.write_all(&TRAJECTORY_VERSION.to_le_bytes())?;
    out.write_all(&(m as u32).to_le_bytes())?;
    out.write_all(&(traj.len() as u32).to_le_bytes())?;
    for (&t, state) in traj.times().iter().zip(traj.states()) {
        out.write_all(&t.to_le_bytes())?;
        for c in state.coeffs() {
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_trajectory_binary<R: Read>(mut input: R) -> Result<Trajectory> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != TRAJECTORY_MAGIC {
        return Err(Error::InvalidArgument("bad trajectory magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != TRAJECTORY_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported trajectory version {version}"
        )));
    }
    let m = read_u32(&mut input)? as usize;
    let steps = read_u32(&mut input)? as usize;
    let grid = GridSpec::new(m);
    let mut times = Vec::with_capacity(steps);
    let mut states = Vec::with_capacity(steps);
    for _ in 0..steps {
        times.push(read_f64(&mut input)?);
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = read_f64(&mut input)?;
            let im = read_f64(&mut input)?;
            coeffs.push(Complex64::new(re, im));
        }
        states.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    Trajectory::new(times, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::semigroup_apply;

    fn sample_trajectory() -> Trajectory {
        let grid = GridSpec::new(3);
        let f = SpectralField::from_fn(grid, |n| Complex64::new(1.0 / (1 + n) as f64, 0.25 * n as f64));
        let times = vec![0.0, 0.5, 1.0];
        let states = times.iter().map(|&t| semigroup_apply(&f, t)).collect();
        Trajectory::new(times, states).unwrap()
    }

    #[test]
    fn binary_layout_round_trips() {
        let traj = sample_trajectory();
        let mut buf = Vec::new();
        write_trajectory_binary(&traj, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"BBMT");
        assert_eq!(buf.len(), 16 + 3 * (8 + 7 * 16));
        let back = read_trajectory_binary(buf.as_slice()).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn csv_has_one_row_per_mode_and_time() {
        let traj = sample_trajectory();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,n,re,im\n"));
        assert_eq!(text.lines().count(), 1 + 3 * 7);
    }

    #[test]
    fn field_rows_round_trip() {
        let f = sample_trajectory().states()[1].clone();
        let rows = field_rows(&f);
        assert_eq!(rows.first().unwrap().n, -3);
        let back = field_from_rows(f.grid(), &rows).unwrap();
        assert_eq!(back, f);
        assert!(field_from_rows(GridSpec::new(2), &rows).is_err());
    }
}
