use serde::{Deserialize, Serialize};

use super::ObservableSample;
use crate::error::{Error, Result};
use crate::numerics::KahanSum;

/// Sample moments with standard errors.
///
/// `excess_kurtosis` is `m₄/m₂² − 3` with biased central moments. Its
/// `kurtosis_se` is the leave-one-out jackknife; `kurtosis_se_delta` is the
/// delta-method value, which involves moments up to order eight. Both are
/// `None` for a degenerate (constant) sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub mean_se: f64,
    /// Unbiased.
    pub variance: f64,
    pub variance_se: f64,
    pub fourth_central_moment: f64,
    pub excess_kurtosis: Option<f64>,
    pub kurtosis_se: Option<f64>,
    pub kurtosis_se_delta: Option<f64>,
    pub degenerate: bool,
}

struct Central {
    mean: f64,
    /// `Σ dᵏ` for `k = 1..4`, `d = x − mean`.
    s: [f64; 5],
}

fn central(xs: &[f64]) -> Central {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<KahanSum>().value() / n;
    let mut acc = [KahanSum::new(); 5];
    for &x in xs {
        let d = x - mean;
        let mut p = 1.0;
        for a in acc.iter_mut() {
            a.add(p);
            p *= d;
        }
    }
    Central {
        mean,
        s: acc.map(|a| a.value()),
    }
}

/// `(m₂, m₄)` from power sums about a reference point, re-centred.
fn recentred(n: f64, s1: f64, s2: f64, s3: f64, s4: f64) -> (f64, f64) {
    let d = s1 / n;
    let m2 = s2 / n - d * d;
    let m4 = s4 / n - 4.0 * d * s3 / n + 6.0 * d * d * s2 / n - 3.0 * d.powi(4);
    (m2, m4)
}

pub fn moment_summary(sample: &ObservableSample) -> Result<EnsembleSummary> {
    let xs = &sample.values;
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "sample '{}' has {} values, need at least 2",
            sample.label,
            xs.len()
        )));
    }
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { step: i });
    }
    let n = xs.len() as f64;
    let c = central(xs);
    let (m2, m4) = recentred(n, c.s[1], c.s[2], c.s[3], c.s[4]);
    let m3 = c.s[3] / n;
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let degenerate = m2 <= (8.0 * f64::EPSILON * scale).powi(2);

    let variance = m2 * n / (n - 1.0);
    let mean_se = (variance / n).sqrt();
    let variance_se = ((m4 - m2 * m2).max(0.0) / n).sqrt();

    let (excess_kurtosis, kurtosis_se, kurtosis_se_delta) = if degenerate {
        (None, None, None)
    } else {
        let k = m4 / (m2 * m2) - 3.0;
        // Influence function of m₄/m₂².
        let inf2: KahanSum = xs
            .iter()
            .map(|&x| {
                let d = x - c.mean;
                let d2 = d * d;
                let v = (d2 * d2 - m4 - 4.0 * m3 * d) / (m2 * m2) - 2.0 * m4 / m2.powi(3) * (d2 - m2);
                v * v
            })
            .collect();
        let delta = inf2.value().sqrt() / n;
        let jack = if xs.len() >= 3 {
            let loo: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let d = x - c.mean;
                    let (a2, a4) = recentred(
                        n - 1.0,
                        c.s[1] - d,
                        c.s[2] - d * d,
                        c.s[3] - d.powi(3),
                        c.s[4] - d.powi(4),
                    );
                    a4 / (a2 * a2) - 3.0
                })
                .collect();
            let bar = loo.iter().copied().collect::<KahanSum>().value() / n;
            let ss: KahanSum = loo.iter().map(|v| (v - bar).powi(2)).collect();
            let se = ((n - 1.0) / n * ss.value()).sqrt();
            se.is_finite().then_some(se)
        } else {
            None
        };
        (Some(k), jack, Some(delta))
    };

    Ok(EnsembleSummary {
        label: sample.label.clone(),
        n: xs.len(),
        mean: c.mean,
        mean_se,
        variance,
        variance_se,
        fourth_central_moment: m4,
        excess_kurtosis,
        kurtosis_se,
        kurtosis_se_delta,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{SeedSpec, Substream};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SeedSpec::new(seed, 0).rng(Substream::Synthetic);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn normal_sample() {
        let n = 100_000;
        let s = moment_summary(&ObservableSample::new("g", normals(n, 11))).unwrap();
        assert!(s.mean.abs() < 4.0 * s.mean_se);
        assert!((s.variance - 1.0).abs() < 4.0 * s.variance_se);
        let k = s.excess_kurtosis.unwrap();
        let se = s.kurtosis_se.unwrap();
        assert!(k.abs() < 4.0 * se, "k={k} se={se}");
        // Asymptotic SE for a Gaussian is √(24/n).
        let oracle = (24.0 / n as f64).sqrt();
        assert!((se / oracle - 1.0).abs() < 0.1, "{se} vs {oracle}");
        assert!((s.kurtosis_se_delta.unwrap() / oracle - 1.0).abs() < 0.1);
    }

    #[test]
    fn chi_square_sample() {
        // (g²−1)/√2: E X⁴ = (E g⁸ − 4E g⁶ + 6E g⁴ − 4E g² + 1)/4 = 60/4, excess 12.
        let xs: Vec<f64> = normals(200_000, 5)
            .into_iter()
            .map(|g| (g * g - 1.0) / 2f64.sqrt())
            .collect();
        let s = moment_summary(&ObservableSample::new("chi", xs)).unwrap();
        let k = s.excess_kurtosis.unwrap();
        assert!((k - 12.0).abs() < 4.0 * s.kurtosis_se.unwrap(), "k={k}");
        assert!((s.fourth_central_moment - 15.0).abs() < 1.5);
    }

    #[test]
    fn jackknife_matches_direct_leave_one_out() {
        let xs = vec![0.3, -1.2, 2.5, 0.7, -0.1, 1.9, -2.2];
        let s = moment_summary(&ObservableSample::new("x", xs.clone())).unwrap();
        let kurt = |v: &[f64]| {
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
            let m4 = v.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
            m4 / (m2 * m2) - 3.0
        };
        let loo: Vec<f64> = (0..xs.len())
            .map(|j| {
                let v: Vec<f64> = xs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, x)| *x)
                    .collect();
                kurt(&v)
            })
            .collect();
        let n = xs.len() as f64;
        let bar = loo.iter().sum::<f64>() / n;
        let se = ((n - 1.0) / n * loo.iter().map(|v| (v - bar).powi(2)).sum::<f64>()).sqrt();
        assert!((s.excess_kurtosis.unwrap() - kurt(&xs)).abs() < 1e-12);
        assert!((s.kurtosis_se.unwrap() - se).abs() < 1e-10);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let s = moment_summary(&ObservableSample::new("c", vec![0.1; 50])).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.excess_kurtosis, None);
        assert!(moment_summary(&ObservableSample::new("c", vec![1.0])).is_err());
    }

    proptest! {
        #[test]
        fn kurtosis_is_affine_invariant(
            xs in prop::collection::vec(-10.0f64..10.0, 8..60),
            a in 0.1f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let s = moment_summary(&ObservableSample::new("x", xs.clone())).unwrap();
            prop_assume!(!s.degenerate);
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let t = moment_summary(&ObservableSample::new("y", ys)).unwrap();
            prop_assert!((s.excess_kurtosis.unwrap() - t.excess_kurtosis.unwrap()).abs() < 1e-8);
            prop_assert!(s.excess_kurtosis.unwrap() >= -2.0 - 1e-12);
        }
    }
}
