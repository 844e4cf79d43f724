use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use super::ExperimentId;
use crate::error::{Error, Result};
use crate::random::{ModelParams, SeedSpec, Variant};
use crate::solvers::SolveConfig;
use crate::spectral::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub master_seed: u64,
    pub first_stream: u64,
}

impl SeedConfig {
    pub fn spec(&self) -> SeedSpec {
        SeedSpec::new(self.master_seed, self.first_stream)
    }
}

/// Experiment-specific knobs. Each experiment reads only the keys listed by
/// [`ExperimentId::sweep_keys`]; the rest stay absent from its config.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_pairs: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_dts: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_alpha_n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_alpha_alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zn_n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zn_alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lags: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity_n: Option<usize>,
}

/// Tolerances of the pass/fail gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    pub se_multiplier: f64,
    pub kurtosis_se_multiplier: f64,
    pub ks_p_min: f64,
    pub slope_tol: f64,
    pub r2_min: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub mean_drift_max: f64,
    pub h1_drift_max: f64,
    pub min_order: f64,
    pub regularity_smooth: [f64; 2],
    pub regularity_rough: [f64; 2],
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            se_multiplier: 3.0,
            kurtosis_se_multiplier: 4.0,
            ks_p_min: 0.01,
            slope_tol: 0.1,
            r2_min: 0.99,
            rel_tol: 0.02,
            abs_tol: 1e-9,
            mean_drift_max: 1e-13,
            h1_drift_max: 1e-7,
            min_order: 3.8,
            regularity_smooth: [1.8, 2.2],
            regularity_rough: [0.8, 1.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub out_dir: PathBuf,
    pub seed: SeedConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_size: Option<usize>,
    pub model: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveConfig>,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub gates: GateConfig,
}

fn schema(msg: impl std::fmt::Display) -> Error {
    Error::Config(msg.to_string())
}

pub(crate) fn required<T: Clone>(field: &Option<T>, name: &str) -> Result<T> {
    field.clone().ok_or_else(|| schema(format!("missing sweep.{name}")))
}

impl ExperimentConfig {
    /// Full default configuration of `id`, sized for the acceptance gates.
    pub fn defaults(id: ExperimentId) -> Self {
        let model = ModelParams::default();
        let mut cfg = Self {
            experiment: id,
            out_dir: PathBuf::from(format!("out/{}", id.as_str())),
            seed: SeedConfig {
                master_seed: 20_240_601,
                first_stream: 0,
            },
            ensemble_size: None,
            model,
            solve: None,
            sweep: Sweep::default(),
            gates: GateConfig::default(),
        };
        let s = &mut cfg.sweep;
        match id {
            ExperimentId::Invariants => {
                cfg.ensemble_size = Some(4);
                let records = (1..=20).map(|k| 0.5 * k as f64).collect();
                cfg.solve = Some(SolveConfig::new(1e-3, 10.0, GridSpec::new(128)).with_records(records));
                s.amplitude = Some(0.5);
                s.decay = Some(8.0);
                s.order_dts = Some(vec![0.2, 0.1, 0.05]);
            }
            ExperimentId::PicardCheck => {
                cfg.ensemble_size = Some(3);
                s.n_values = Some(vec![1, 2, 4, 8]);
                s.alphas = Some(vec![0.25, 0.0, -0.5]);
                s.times = Some(vec![1.7]);
                s.paths = Some(20);
                s.path_dt = Some(1.0 / 64.0);
                s.lags = Some(vec![1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0]);
                s.regularity_n = Some(32);
            }
            ExperimentId::Blowup => {
                s.n_values = Some(vec![16, 32, 64, 128, 256, 512, 1024]);
                s.alphas = Some(vec![0.0, -0.25, 0.25]);
                s.times = Some(vec![1.0]);
            }
            ExperimentId::Gaussianize => {
                cfg.ensemble_size = Some(50_000);
                cfg.model.alpha = 0.25;
                cfg.model.truncation = 128;
                s.n_values = Some(vec![8, 16, 32, 64, 128]);
                s.small_n = Some(4);
                s.times = Some(vec![1.0]);
            }
            ExperimentId::CovarianceLimit => {
                cfg.ensemble_size = Some(10_000);
                cfg.model.truncation = 16;
                s.alphas = Some(vec![0.25, 0.0]);
                s.times = Some(vec![0.5, 1.0]);
                s.limit_n = Some(1024);
                s.modes = Some(vec![1, 2, 5]);
                s.c_alpha_n = Some(vec![100, 1000, 10_000, 100_000]);
                s.c_alpha_alphas = Some(vec![0.25, 0.0, -0.5]);
            }
            ExperimentId::Thm13 => {
                cfg.ensemble_size = Some(400);
                cfg.solve = Some(SolveConfig::new(2e-3, 1.0, GridSpec::new(256)));
                s.zn_n = Some(vec![10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000]);
                s.zn_alphas = Some(vec![0.25, 0.0]);
                s.sobolev_s = Some(-0.3);
            }
            ExperimentId::Thm15 => {
                cfg.ensemble_size = Some(400);
                cfg.model.variant = Variant::WeakNonlinearity;
                cfg.solve = Some(SolveConfig::new(2e-3, 1.0, GridSpec::new(256)));
            }
            ExperimentId::AppendixNoise => {
                cfg.ensemble_size = Some(20_000);
                cfg.model.truncation = 128;
                cfg.model.variant = Variant::NoiseRenormalizedAppendix;
                s.time_pairs = Some(vec![[1.0, 1.0], [1.0, 2.0], [2.0, 3.0]]);
                s.modes = Some(vec![1, 2, 5, 20, 128]);
                s.paths = Some(40);
                s.path_dt = Some(1.0 / 256.0);
                s.lags = Some(vec![1.0 / 256.0, 1.0 / 64.0, 1.0 / 16.0]);
                s.regularity_n = Some(8);
            }
            ExperimentId::AppendixThm => {
                cfg.ensemble_size = Some(400);
                cfg.model.truncation = 32;
                cfg.model.variant = Variant::WeakAppendix;
                cfg.solve = Some(SolveConfig::new(1e-2, 1.0, GridSpec::new(64)));
            }
        }
        cfg
    }

    /// Parses a user config, applies `key=value` overrides and fills in every
    /// default. All failures are [`Error::Config`].
    pub fn load(text: &str, overrides: &[String]) -> Result<Self> {
        let mut user: Table = toml::from_str(text).map_err(schema)?;
        for o in overrides {
            apply_override(&mut user, o)?;
        }
        let id: ExperimentId = user
            .get("experiment")
            .ok_or_else(|| schema("missing key 'experiment'"))?
            .clone()
            .try_into()
            .map_err(schema)?;
        let mut base = Value::try_from(Self::defaults(id)).map_err(schema)?;
        merge(&mut base, Value::Table(user));
        let cfg: Self = base.try_into().map_err(schema)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let keys = self.experiment.sweep_keys();
        let present = Value::try_from(&self.sweep).map_err(schema)?;
        let present = present.as_table().cloned().unwrap_or_default();
        for k in keys {
            if !present.contains_key(*k) {
                return Err(schema(format!("{} needs sweep.{k}", self.experiment.as_str())));
            }
        }
        for k in present.keys() {
            if !keys.contains(&k.as_str()) {
                return Err(schema(format!("{} does not use sweep.{k}", self.experiment.as_str())));
            }
        }
        if self.experiment.uses_ensemble() {
            match self.ensemble_size {
                Some(m) if m >= 2 => {}
                _ => return Err(schema("ensemble_size must be at least 2")),
            }
        }
        if self.experiment.uses_solver() {
            let solve = self.solve.as_ref().ok_or_else(|| schema("missing [solve] section"))?;
            solve.steps().map_err(schema)?;
            solve.record_steps().map_err(schema)?;
            self.model.validate(None).map_err(schema)?;
        }
        if self.seed.first_stream > SeedSpec::MAX_STREAM_ID / 4 {
            return Err(schema("seed.first_stream too large"));
        }
        Ok(())
    }

    pub fn ensemble(&self) -> usize {
        self.ensemble_size.unwrap_or(0)
    }

    pub fn solve_config(&self) -> Result<&SolveConfig> {
        self.solve.as_ref().ok_or_else(|| schema("missing [solve] section"))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(schema)
    }

    /// SHA-256 of the frozen TOML text with `out_dir` blanked, hex encoded;
    /// where results are written does not change them.
    pub fn digest(&self) -> Result<String> {
        let mut bare = self.clone();
        bare.out_dir = PathBuf::new();
        let text = bare.to_toml()?;
        Ok(Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `a.b.c=value`, where `value` is TOML (bare words are taken as strings).
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| schema(format!("override '{assignment}' is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(schema(format!("bad override key '{path}'")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("nonempty");
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| schema(format!("override path '{path}' crosses a non-table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
