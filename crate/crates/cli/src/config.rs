//! JSON experiment configuration. Every field is optional; missing fields
//! take the defaults below.

use std::fmt;
use std::path::{Path, PathBuf};

use paging_core::rbf::{self, MseUnits};
use paging_core::traffic::TrafficSpec;
use paging_core::{SchemeConfig, StrategyConfig, TrafficLabel, TrainOptions};
use serde::{Deserialize, Serialize};

/// Bad configuration file or option. Maps to its own exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed. Traffic without its own seed and every simulation derive from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub schemes: SchemePair,
    pub curves: CurvesSection,
    pub traffic: Vec<TrafficSection>,
    pub predictor: PredictorSection,
    pub strategy: StrategySection,
    pub validation: ValidationSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: PathBuf::from("out"),
            schemes: SchemePair::default(),
            curves: CurvesSection::default(),
            traffic: TrafficLabel::GENERATED.iter().map(|&kind| TrafficSection::new(kind)).collect(),
            predictor: PredictorSection::default(),
            strategy: StrategySection::default(),
            validation: ValidationSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub channels: u32,
    pub mean_service_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemePair {
    pub sequential: SchemeSection,
    pub concurrent: SchemeSection,
}

impl Default for SchemePair {
    fn default() -> Self {
        Self {
            sequential: SchemeSection { channels: 7, mean_service_time: 1.0 },
            concurrent: SchemeSection { channels: 14, mean_service_time: 1.5 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvesSection {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
}

impl Default for CurvesSection {
    fn default() -> Self {
        Self { lambda_min: 0.1, lambda_max: 6.9, lambda_step: 0.1 }
    }
}

/// Unset fields fall back to the defaults for `kind`, the seed to the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_period: Option<f64>,
}

impl TrafficSection {
    pub fn new(kind: TrafficLabel) -> Self {
        Self {
            kind: kind.to_string(),
            amplitude: None,
            baseline: None,
            period_samples: None,
            noise_std: None,
            seed: None,
            length: None,
            sample_period: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorSection {
    pub window: usize,
    pub bias: f64,
    pub mse_goal: f64,
    /// `erlang` or `normalized`.
    pub mse_units: String,
    pub max_neurons: usize,
    pub ridge: f64,
    pub train_fraction: f64,
}

impl Default for PredictorSection {
    fn default() -> Self {
        Self {
            window: rbf::DEFAULT_WINDOW,
            bias: rbf::DEFAULT_BIAS,
            mse_goal: rbf::DEFAULT_MSE_GOAL,
            mse_units: MseUnits::default().to_string(),
            max_neurons: rbf::DEFAULT_MAX_NEURONS,
            ridge: rbf::DEFAULT_RIDGE,
            train_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    /// Overrides the computed crossover.
    pub threshold: Option<f64>,
    pub hysteresis: f64,
    pub swap_penalty: f64,
    /// Decide from the actual load instead of the trained model.
    pub perfect_oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    pub channels: u32,
    pub mean_service_time: f64,
    pub arrival_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSection {
    pub cells: Vec<CellSection>,
    /// Expected post-warmup arrivals per run; ignored when `horizon` is set.
    pub arrivals: u64,
    pub horizon: Option<f64>,
    pub warmup_fraction: f64,
    pub batches: usize,
    pub replications: usize,
    pub relative_tolerance: f64,
}

impl Default for ValidationSection {
    fn default() -> Self {
        let mut cells = Vec::new();
        for (channels, mean_service_time) in [(7, 1.0), (14, 1.5)] {
            for arrival_rate in [2.0, 4.0, 6.0] {
                cells.push(CellSection { channels, mean_service_time, arrival_rate });
            }
        }
        cells.push(CellSection { channels: 1, mean_service_time: 1.0, arrival_rate: 0.5 });
        Self {
            cells,
            arrivals: 205_000,
            horizon: None,
            warmup_fraction: 0.1,
            batches: 20,
            replications: 1,
            relative_tolerance: 0.02,
        }
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    /// Errors name the offending field and its line and column.
    pub fn parse(text: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| format!("field `{}`: {}", e.path(), e.inner()))
    }

    pub fn schemes(&self) -> anyhow::Result<(SchemeConfig, SchemeConfig)> {
        let build = |name: &str, s: &SchemeSection| {
            SchemeConfig::new(name, s.channels, s.mean_service_time)
                .map_err(|e| invalid(format!("schemes.{name}: {e}")))
        };
        Ok((build("sequential", &self.schemes.sequential)?, build("concurrent", &self.schemes.concurrent)?))
    }

    /// `λ_min, λ_min + step, …, λ_max`, rounded to 12 decimals so the grid prints cleanly.
    pub fn lambda_grid(&self) -> anyhow::Result<Vec<f64>> {
        let CurvesSection { lambda_min: lo, lambda_max: hi, lambda_step: step } = self.curves;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
            return Err(invalid("curves: need 0 <= lambda_min <= lambda_max"));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("curves.lambda_step must be positive"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
    }

    pub fn traffic_specs(&self) -> anyhow::Result<Vec<TrafficSpec>> {
        let (seq, conc) = self.schemes()?;
        self.traffic
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let kind: TrafficLabel = t.kind.parse().map_err(|e| invalid(format!("traffic[{i}].kind: {e}")))?;
                let d = TrafficSpec::default_for(kind);
                let spec = TrafficSpec {
                    kind,
                    amplitude: t.amplitude.unwrap_or(d.amplitude),
                    baseline: t.baseline.unwrap_or(d.baseline),
                    period_samples: t.period_samples.unwrap_or(d.period_samples),
                    noise_std: t.noise_std.unwrap_or(d.noise_std),
                    seed: t.seed.unwrap_or(self.seed),
                    length: t.length.unwrap_or(d.length),
                    sample_period: t.sample_period.unwrap_or(d.sample_period),
                };
                spec.validate_for(&[seq.clone(), conc.clone()]).map_err(|e| invalid(format!("traffic[{i}]: {e}")))?;
                Ok(spec)
            })
            .collect()
    }

    pub fn train_options(&self) -> anyhow::Result<TrainOptions> {
        let p = &self.predictor;
        let goal_units = match p.mse_units.as_str() {
            "erlang" => MseUnits::Erlang,
            "normalized" => MseUnits::Normalized,
            other => return Err(invalid(format!("predictor.mse_units: expected erlang or normalized, got {other:?}"))),
        };
        if p.window == 0 || p.max_neurons == 0 {
            return Err(invalid("predictor: window and max_neurons must be positive"));
        }
        if !(p.bias > 0.0 && p.mse_goal >= 0.0 && p.ridge >= 0.0) {
            return Err(invalid("predictor: need bias > 0, mse_goal >= 0, ridge >= 0"));
        }
        if !(p.train_fraction > 0.0 && p.train_fraction < 1.0) {
            return Err(invalid("predictor.train_fraction must lie in (0, 1)"));
        }
        Ok(TrainOptions {
            window: p.window,
            bias: p.bias,
            mse_goal: p.mse_goal,
            goal_units,
            max_neurons: p.max_neurons,
            ridge: p.ridge,
        })
    }

    pub fn strategy_config(&self) -> anyhow::Result<StrategyConfig> {
        let (seq, conc) = self.schemes()?;
        let s = &self.strategy;
        StrategyConfig::new(seq, conc, s.threshold)
            .and_then(|c| c.with_hysteresis(s.hysteresis))
            .and_then(|c| c.with_swap_penalty(s.swap_penalty))
            .map_err(|e| invalid(format!("strategy: {e}")))
    }

    pub fn check_validation(&self) -> anyhow::Result<()> {
        let v = &self.validation;
        if v.cells.is_empty() {
            return Err(invalid("validation.cells is empty"));
        }
        if !(v.warmup_fraction >= 0.0 && v.warmup_fraction < 1.0) {
            return Err(invalid("validation.warmup_fraction must lie in [0, 1)"));
        }
        if v.replications == 0 {
            return Err(invalid("validation.replications must be positive"));
        }
        if !(v.relative_tolerance >= 0.0) {
            return Err(invalid("validation.relative_tolerance must be nonnegative"));
        }
        for (i, c) in v.cells.iter().enumerate() {
            if !(c.arrival_rate > 0.0) {
                return Err(invalid(format!("validation.cells[{i}].arrival_rate must be positive")));
            }
            if f64::from(c.channels) <= c.arrival_rate * c.mean_service_time {
                return Err(invalid(format!("validation.cells[{i}] is unstable")));
            }
        }
        Ok(())
    }
}
