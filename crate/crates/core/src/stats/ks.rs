use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{moment_summary, ObservableSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic Kolmogorov tail with the small-sample correction
    /// `λ = (√nₑ + 0.12 + 0.11/√nₑ)·D`.
    pub p_value: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = -PI * PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=8).map(|j| ((2 * j - 1) as f64).powi(2) * y).map(f64::exp).sum();
        (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=20)
            .map(|j: i32| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (j * j) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn p_value(n_eff: f64, d: f64) -> f64 {
    let r = n_eff.sqrt();
    kolmogorov_q((r + 0.12 + 0.11 / r) * d)
}

fn sorted_finite(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { step: i });
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample test of `xs` against the continuous distribution function `cdf`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let v = sorted_finite(xs)?;
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic: d,
        p_value: p_value(n, d),
    })
}

/// Two-sample test; symmetric in its arguments.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = sorted_finite(a)?;
    let b = sorted_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: p_value(na * nb / (na + nb), d),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianizationTest {
    pub label: String,
    pub n: usize,
    pub excess_kurtosis: Option<f64>,
    pub kurtosis_se: Option<f64>,
    /// Against the normal law with the sample mean and variance. Fitting the
    /// parameters makes the reported p-value conservative.
    pub ks: Option<KsResult>,
}

pub fn gaussianization_test(sample: &ObservableSample) -> Result<GaussianizationTest> {
    let s = moment_summary(sample)?;
    let ks = if s.degenerate {
        None
    } else {
        let normal =
            Normal::new(s.mean, s.variance.sqrt()).map_err(|e| Error::InvalidArgument(format!("normal fit: {e}")))?;
        Some(ks_one_sample(&sample.values, |x| normal.cdf(x))?)
    };
    Ok(GaussianizationTest {
        label: sample.label.clone(),
        n: s.n,
        excess_kurtosis: s.excess_kurtosis,
        kurtosis_se: s.kurtosis_se,
        ks,
    })
}
