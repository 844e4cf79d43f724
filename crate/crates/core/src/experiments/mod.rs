//! Canned experiments: config schema, execution and result files.
//!
//! Every run writes `results.csv`, `summary.json`, `report.json` and the
//! frozen `config.toml` into its output directory. Those four files depend
//! only on the config; wall-clock data goes to `metadata.json`.

mod config;
mod runners;

pub use config::{apply_override, ExperimentConfig, GateConfig, SeedConfig, Sweep};

use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Invariants,
    PicardCheck,
    Blowup,
    Gaussianize,
    CovarianceLimit,
    Thm13,
    Thm15,
    AppendixNoise,
    AppendixThm,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        Self::Invariants,
        Self::PicardCheck,
        Self::Blowup,
        Self::Gaussianize,
        Self::CovarianceLimit,
        Self::Thm13,
        Self::Thm15,
        Self::AppendixNoise,
        Self::AppendixThm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Invariants => "invariants",
            Self::PicardCheck => "picard-check",
            Self::Blowup => "blowup",
            Self::Gaussianize => "gaussianize",
            Self::CovarianceLimit => "covariance-limit",
            Self::Thm13 => "thm13",
            Self::Thm15 => "thm15",
            Self::AppendixNoise => "appendix-noise",
            Self::AppendixThm => "appendix-thm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }

    /// One-line description of the computation.
    pub fn description(self) -> &'static str {
        match self {
            Self::Invariants => "unforced BBM: mean and H1 conservation, RK4 order",
            Self::PicardCheck => "closed-form second iterate vs Duhamel quadrature; Z_N increment regularity",
            Self::Blowup => "exact variance growth of the unrenormalized second iterate",
            Self::Gaussianize => "contraction norms and kurtosis of <Z_N(1), cos x>",
            Self::CovarianceLimit => "Monte Carlo vs exact covariance of Z_N; finite-N gap to the limit; c_alpha",
            Self::Thm13 => "renormalized-data BBM vs its white-noise forced limit; z_N vanishing",
            Self::Thm15 => "weakly interacting BBM vs the linear two-noise limit",
            Self::AppendixNoise => "covariance of the quadratic in the noise convolution; Ito isometry",
            Self::AppendixThm => "weakly interacting space-time-noise BBM vs its linear limit",
        }
    }

    /// The mathematical statement the experiment exercises.
    pub fn statement(self) -> &'static str {
        match self {
            Self::Invariants => "conservation of the mean and of the H1 functional",
            Self::PicardCheck => "closed form of the second Picard iterate",
            Self::Blowup => "variance of the truncated second iterate diverges for alpha <= 1/4",
            Self::Gaussianize => "Gaussian limit of Z_N via the fourth moment theorem",
            Self::CovarianceLimit => "covariance of Z_N converges to that of the limit process Z",
            Self::Thm13 => "convergence in law of renormalized BBM to the white-noise forced equation",
            Self::Thm15 => "convergence in law of weakly interacting BBM to the linear two-noise equation",
            Self::AppendixNoise => "space-time covariance of the renormalized noise quadratic",
            Self::AppendixThm => "convergence in law of the weakly interacting space-time-noise equation",
        }
    }

    /// Keys of `[sweep]` the experiment reads.
    pub fn sweep_keys(self) -> &'static [&'static str] {
        match self {
            Self::Invariants => &["amplitude", "decay", "order_dts"],
            Self::PicardCheck => &[
                "n_values",
                "alphas",
                "times",
                "paths",
                "path_dt",
                "lags",
                "regularity_n",
            ],
            Self::Blowup => &["n_values", "alphas", "times"],
            Self::Gaussianize => &["n_values", "small_n", "times"],
            Self::CovarianceLimit => &["alphas", "times", "limit_n", "modes", "c_alpha_n", "c_alpha_alphas"],
            Self::Thm13 => &["zn_n", "zn_alphas", "sobolev_s"],
            Self::Thm15 => &[],
            Self::AppendixNoise => &["time_pairs", "modes", "paths", "path_dt", "lags", "regularity_n"],
            Self::AppendixThm => &[],
        }
    }

    pub fn uses_ensemble(self) -> bool {
        !matches!(self, Self::Blowup)
    }

    pub fn uses_solver(self) -> bool {
        matches!(self, Self::Invariants | Self::Thm13 | Self::Thm15 | Self::AppendixThm)
    }
}

/// `(id, description, statement)` in a fixed order.
pub fn list_experiments() -> Vec<(&'static str, &'static str, &'static str)> {
    ExperimentId::ALL
        .iter()
        .map(|id| (id.as_str(), id.description(), id.statement()))
        .collect()
}

/// One line of `results.csv`. `anchor` names the checked statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub anchor: String,
    pub quantity: String,
    pub alpha: Option<f64>,
    #[serde(rename = "N")]
    pub n_max: Option<usize>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub value: f64,
    pub se: Option<f64>,
    pub reference: Option<f64>,
}

impl ResultRow {
    pub fn new(anchor: &str, quantity: impl Into<String>, value: f64) -> Self {
        Self {
            anchor: anchor.to_string(),
            quantity: quantity.into(),
            alpha: None,
            n_max: None,
            t: None,
            s: None,
            value,
            se: None,
            reference: None,
        }
    }

    pub fn alpha(mut self, a: f64) -> Self {
        self.alpha = Some(a);
        self
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n_max = Some(n);
        self
    }

    pub fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn se(mut self, se: f64) -> Self {
        self.se = Some(se);
        self
    }

    pub fn reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }
}

/// A pass/fail check with the measured quantity and its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub detail: String,
}

impl Gate {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= bound,
            measured,
            bound,
            detail: format!("{measured:.6e} <= {bound:.6e}"),
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured >= bound,
            measured,
            bound,
            detail: format!("{measured:.6e} >= {bound:.6e}"),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: f64::from(u8::from(passed)),
            bound: 1.0,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: ExperimentId,
    pub rows: Vec<ResultRow>,
    pub summary: Map<String, Json>,
    pub gates: Vec<Gate>,
}

impl ExperimentResult {
    fn new(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            rows: Vec::new(),
            summary: Map::new(),
            gates: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    fn put(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Json::Null));
    }
}

/// Runs the configured experiment. `workers` sizes the ensemble pool and has
/// no effect on the result.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut res = ExperimentResult::new(cfg.experiment);
    runners::run(cfg, workers, &mut res)?;
    res.put("experiment", cfg.experiment.as_str());
    res.put("config_digest", cfg.digest()?);
    res.put("master_seed", cfg.seed.master_seed);
    res.put("first_stream", cfg.seed.first_stream);
    Ok(res)
}

#[derive(Debug, Clone, Serialize)]
struct Report<'a> {
    experiment: &'a str,
    config_digest: String,
    master_seed: u64,
    passed: bool,
    gates: &'a [Gate],
}

/// Writes the deterministic result files into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, res: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    for row in &res.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&res.summary)? + "\n",
    )?;
    let report = Report {
        experiment: cfg.experiment.as_str(),
        config_digest: cfg.digest()?,
        master_seed: cfg.seed.master_seed,
        passed: res.passed(),
        gates: &res.gates,
    };
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(())
}

/// Process exit status of a CLI run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Runtime = 1,
    Schema = 2,
    Gate = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub result: Option<ExperimentResult>,
    pub message: Option<String>,
}

/// Loads, runs and writes one experiment. A schema violation writes nothing.
///
/// `out_dir`, when given, replaces the configured output directory (and the
/// frozen config records it).
pub fn run_from_text(text: &str, overrides: &[String], out_dir: Option<&Path>, workers: usize) -> RunOutcome {
    let mut cfg = match ExperimentConfig::load(text, overrides) {
        Ok(c) => c,
        Err(e) => {
            return RunOutcome {
                status: ExitStatus::Schema,
                result: None,
                message: Some(e.to_string()),
            }
        }
    };
    if let Some(dir) = out_dir {
        cfg.out_dir = dir.to_path_buf();
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let res = match run_experiment(&cfg, workers) {
        Ok(r) => r,
        Err(e) => {
            let status = if matches!(e, Error::Config(_)) {
                ExitStatus::Schema
            } else {
                ExitStatus::Runtime
            };
            return RunOutcome {
                status,
                result: None,
                message: Some(e.to_string()),
            };
        }
    };
    let elapsed = clock.elapsed().as_secs_f64();
    let written = write_outputs(&cfg, &res, &cfg.out_dir).and_then(|_| {
        let unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let meta = serde_json::json!({
            "started_unix": unix(started),
            "finished_unix": unix(SystemTime::now()),
            "elapsed_seconds": elapsed,
            "workers": workers,
            "version": env!("CARGO_PKG_VERSION"),
        });
        fs::write(
            cfg.out_dir.join("metadata.json"),
            serde_json::to_string_pretty(&meta)? + "\n",
        )?;
        Ok(())
    });
    if let Err(e) = written {
        return RunOutcome {
            status: ExitStatus::Runtime,
            result: Some(res),
            message: Some(e.to_string()),
        };
    }
    let status = if res.passed() { ExitStatus::Ok } else { ExitStatus::Gate };
    RunOutcome {
        status,
        result: Some(res),
        message: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_is_stable_and_complete() {
        let a = list_experiments();
        assert_eq!(a, list_experiments());
        assert_eq!(a.len(), 9);
        let ids: Vec<&str> = a.iter().map(|r| r.0).collect();
        assert_eq!(ids[5], "thm13");
        assert!(a[5].2.contains("convergence in law"));
        assert!(ids.contains(&"appendix-noise"));
        for id in ExperimentId::ALL {
            assert_eq!(ExperimentId::parse(id.as_str()), Some(id));
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
        }
    }

    #[test]
    fn malformed_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let r = run_from_text("experiment = \"blowup\"\nbogus = 1\n", &[], Some(&out), 1);
        assert_eq!(r.status, ExitStatus::Schema);
        assert!(!out.exists());
    }

    #[test]
    fn blowup_run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("b");
        let r = run_from_text(
            "experiment = \"blowup\"\n",
            &["sweep.alphas=[0.0]".into()],
            Some(&out),
            2,
        );
        assert_eq!(r.status, ExitStatus::Ok, "{:?}", r.result.map(|x| x.gates));
        for f in [
            "results.csv",
            "summary.json",
            "report.json",
            "config.toml",
            "metadata.json",
        ] {
            assert!(out.join(f).exists(), "{f}");
        }
        let csv = fs::read_to_string(out.join("results.csv")).unwrap();
        assert!(csv.starts_with("anchor,quantity,alpha,N,t,s,value,se,reference\n"));
        let summary: Json = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert!(summary["config_digest"].as_str().unwrap().len() == 64);
    }
}
