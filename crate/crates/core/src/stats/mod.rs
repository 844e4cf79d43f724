//! Monte Carlo orchestration and the estimators used to compare laws.

mod fit;
mod ks;
mod moments;

pub use fit::{increment_regularity, scaling_fit, IncrementRegularity, ScalingFit, ScalingModel};
pub use ks::{gaussianization_test, kolmogorov_q, ks_one_sample, ks_two_sample, GaussianizationTest, KsResult};
pub use moments::{moment_summary, EnsembleSummary};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{ModelParams, SeedSpec};

/// Provenance attached to every observable array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SampleMetadata {
    pub params: Option<ModelParams>,
    pub config_digest: Option<String>,
    pub master_seed: u64,
    pub first_stream: u64,
    pub members: usize,
}

/// One scalar observable evaluated on every ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub label: String,
    pub values: Vec<f64>,
    pub metadata: SampleMetadata,
}

impl ObservableSample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
            metadata: SampleMetadata::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rows `(member_index, value)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["member_index", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Observables from a completed ensemble plus the members that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    pub samples: Vec<ObservableSample>,
    pub failures: Vec<(usize, String)>,
}

/// Largest tolerated share of failed members.
pub const MAX_FAILURE_FRACTION: f64 = 1e-3;

/// Runs `member` for stream ids `seed.stream_id .. seed.stream_id + members`.
///
/// `member` returns one value per label. Results are ordered by member index
/// and do not depend on `workers`. Failed members are dropped and listed;
/// the run errors when more than 0.1% fail.
pub fn run_ensemble<F>(
    labels: &[&str],
    members: usize,
    seed: SeedSpec,
    workers: usize,
    member: F,
) -> Result<EnsembleOutput>
where
    F: Fn(SeedSpec) -> Result<Vec<f64>> + Sync + Send,
{
    if members < 2 {
        return Err(Error::InvalidArgument(format!(
            "ensemble needs at least 2 members, got {members}"
        )));
    }
    let last = seed
        .stream_id
        .checked_add(members as u64 - 1)
        .filter(|&s| s <= SeedSpec::MAX_STREAM_ID)
        .ok_or_else(|| Error::InvalidArgument("stream ids overflow".into()))?;
    log::debug!("ensemble streams {}..={last} on {workers} workers", seed.stream_id);
    let eval = |i: usize| -> Result<Vec<f64>> {
        let values = member(seed.with_stream(seed.stream_id + i as u64))?;
        if values.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: labels.len(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: bad });
        }
        Ok(values)
    };
    let results = execute(members, workers, eval)?;

    let mut columns = vec![Vec::with_capacity(members); labels.len()];
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(values) => {
                for (col, v) in columns.iter_mut().zip(values) {
                    col.push(v);
                }
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * members as f64 {
        return Err(Error::EnsembleFailure {
            failed: failures.len(),
            total: members,
        });
    }
    for (i, msg) in &failures {
        log::warn!("ensemble member {i} failed: {msg}");
    }
    let metadata = SampleMetadata {
        params: None,
        config_digest: None,
        master_seed: seed.master_seed,
        first_stream: seed.stream_id,
        members,
    };
    let samples = labels
        .iter()
        .zip(columns)
        .map(|(label, values)| ObservableSample {
            label: label.to_string(),
            values,
            metadata: metadata.clone(),
        })
        .collect();
    Ok(EnsembleOutput { samples, failures })
}

#[cfg(feature = "parallel")]
fn execute<T, F>(members: usize, workers: usize, eval: F) -> Result<Vec<Result<T>>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    Ok(pool.install(|| (0..members).into_par_iter().map(eval).collect()))
}

#[cfg(not(feature = "parallel"))]
fn execute<T, F>(members: usize, _workers: usize, eval: F) -> Result<Vec<Result<T>>>
where
    F: Fn(usize) -> Result<T>,
{
    Ok((0..members).map(eval).collect())
}

/// `μ ± k·SE` contains `target`.
pub fn within_se(estimate: f64, se: f64, target: f64, k: f64) -> bool {
    (estimate - target).abs() <= k * se
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Substream;
    use rand::Rng;
    use std::collections::HashSet;
    use std::sync::Mutex;

    #[test]
    fn trivial_observable() {
        let out = run_ensemble(&["one"], 2, SeedSpec::new(0, 0), 1, |_| Ok(vec![1.0])).unwrap();
        assert_eq!(out.samples[0].values, vec![1.0, 1.0]);
        assert!(out.failures.is_empty());
        assert!(run_ensemble(&["one"], 1, SeedSpec::new(0, 0), 1, |_| Ok(vec![1.0])).is_err());
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let f = |s: SeedSpec| {
            let mut rng = s.rng(Substream::Synthetic);
            Ok(vec![rng.random::<f64>(), rng.random::<f64>()])
        };
        let a = run_ensemble(&["x", "y"], 500, SeedSpec::new(3, 10), 1, f).unwrap();
        let b = run_ensemble(&["x", "y"], 500, SeedSpec::new(3, 10), 8, f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn member_streams_are_distinct() {
        let seen = Mutex::new(HashSet::new());
        run_ensemble(&["s"], 1000, SeedSpec::new(1, 5), 4, |s| {
            assert!(seen.lock().unwrap().insert(s.stream_id));
            Ok(vec![s.stream_id as f64])
        })
        .unwrap();
        assert_eq!(seen.lock().unwrap().len(), 1000);
    }

    #[test]
    fn failures_are_tolerated_up_to_threshold() {
        let fail_one = |s: SeedSpec| {
            if s.stream_id == 7 {
                Err(Error::NonFinite { step: 3 })
            } else {
                Ok(vec![0.0])
            }
        };
        let out = run_ensemble(&["v"], 2000, SeedSpec::new(0, 0), 2, fail_one).unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.samples[0].len(), 1999);
        let fail_many = |s: SeedSpec| {
            if s.stream_id % 100 == 0 {
                Err(Error::NonFinite { step: 0 })
            } else {
                Ok(vec![0.0])
            }
        };
        assert!(matches!(
            run_ensemble(&["v"], 2000, SeedSpec::new(0, 0), 2, fail_many),
            Err(Error::EnsembleFailure {
                failed: 20,
                total: 2000
            })
        ));
    }

    #[test]
    fn csv_rows() {
        let s = ObservableSample::new("x", vec![0.5, -1.0]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "member_index,value\n0,0.5\n1,-1.0\n");
    }
}
