//! FFT bridge between mode arrays `n = −M..M` and equispaced samples.
//!
//! Plans are cached per thread; there is no process-wide mutable state.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Evaluates `Σ_{|n|≤M} c_n e^{inx_j}` at `x_j = 2πj/len`.
///
/// `coeffs` is the dense `−M..M` array; `len` must be at least `2M+1`.
pub(crate) fn synthesize(coeffs: &[Complex64], len: usize) -> Vec<Complex64> {
    let m = coeffs.len() / 2;
    debug_assert!(len > 2 * m);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (i, &c) in coeffs.iter().enumerate() {
        let n = i as i64 - m as i64;
        buf[n.rem_euclid(len as i64) as usize] = c;
    }
    plan(len, true).process(&mut buf);
    buf
}

/// Inverse of [`synthesize`]: `ĉ_n = (1/len) Σ_j u_j e^{−inx_j}` for `|n| ≤ M`.
pub(crate) fn analyze(samples: &mut [Complex64], m: usize) -> Vec<Complex64> {
    let len = samples.len();
    debug_assert!(len > 2 * m);
    plan(len, false).process(samples);
    let scale = 1.0 / len as f64;
    (0..=2 * m)
        .map(|i| {
            let n = i as i64 - m as i64;
            samples[n.rem_euclid(len as i64) as usize] * scale
        })
        .collect()
}
