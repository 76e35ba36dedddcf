use std::fmt;
use std::path::{Path, PathBuf};

use plumenav_core::analysis::DEFAULT_BIN_RADIUS;
use plumenav_core::{GaConfig, LabelConvention, Scenario};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

/// Flow condition of a batch of flights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// Low turbulence, no cylinder wake.
    Undisturbed,
    /// High turbulence plus the wake crossflow near the source.
    Disturbed,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Undisturbed, Condition::Disturbed];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Undisturbed => "undisturbed",
            Condition::Disturbed => "disturbed",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Turbulence intensity used for each condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbulenceLevels {
    pub undisturbed: f64,
    pub disturbed: f64,
}

impl Default for TurbulenceLevels {
    fn default() -> Self {
        Self {
            undisturbed: 0.1,
            disturbed: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Half-width of the distance bins, m.
    pub bin_radius: f64,
    /// Distances beyond this are left out of the profile, m.
    pub max_distance: f64,
    /// The last `holdout_runs` flights of a condition are the references for
    /// the mean-path fit; the rest build the mean path.
    pub holdout_runs: usize,
    /// Width of the per-flight EER histogram bins.
    pub histogram_width: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            bin_radius: DEFAULT_BIN_RADIUS,
            max_distance: 2.0,
            holdout_runs: 20,
            histogram_width: 0.05,
        }
    }
}

/// Everything one batch run needs. Every field has a default, so an empty
/// file is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Flights per condition.
    pub runs: usize,
    /// Flight `i` uses seed `base_seed + i` in every condition.
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub conditions: Vec<Condition>,
    /// Shared scenario; its turbulence intensity and wake flag are set per
    /// condition from `turbulence`.
    pub scenario: Scenario,
    pub turbulence: TurbulenceLevels,
    #[serde(deserialize_with = "experiment_ga")]
    pub ga: GaConfig,
    pub analysis: AnalysisOptions,
}

/// Segmentation defaults for simulated flights: casting is the
/// high-variance phase there, so exploration takes the positive score.
pub fn experiment_ga_defaults() -> GaConfig {
    GaConfig {
        label_convention: LabelConvention::RewardExploration,
        ..GaConfig::default()
    }
}

// a partial [ga] table falls back to the experiment defaults, not the
// library ones
fn experiment_ga<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<GaConfig, D::Error> {
    let mut value = serde_json::Value::deserialize(d)?;
    if let serde_json::Value::Object(table) = &mut value {
        let defaults = serde_json::to_value(experiment_ga_defaults()).map_err(serde::de::Error::custom)?;
        if let serde_json::Value::Object(defaults) = defaults {
            for (key, v) in defaults {
                table.entry(key).or_insert(v);
            }
        }
    }
    serde_json::from_value(value).map_err(serde::de::Error::custom)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            base_seed: 0,
            out_dir: PathBuf::from("plumenav-out"),
            conditions: Condition::ALL.to_vec(),
            scenario: Scenario::default(),
            turbulence: TurbulenceLevels::default(),
            ga: experiment_ga_defaults(),
            analysis: AnalysisOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        if self.conditions.is_empty() {
            return Err(CliError::Config("at least one condition is required".into()));
        }
        let mut seen = self.conditions.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.conditions.len() {
            return Err(CliError::Config("conditions must not repeat".into()));
        }
        if self.base_seed.checked_add(self.runs as u64 - 1).is_none() {
            return Err(CliError::Config("base_seed + runs overflows u64".into()));
        }
        for level in [self.turbulence.undisturbed, self.turbulence.disturbed] {
            if !(level.is_finite() && level >= 0.0) {
                return Err(CliError::Config(format!(
                    "turbulence intensity must be >= 0, got {level}"
                )));
            }
        }
        let a = &self.analysis;
        if !(a.bin_radius > 0.0 && a.bin_radius.is_finite()) {
            return Err(CliError::Config("analysis.bin_radius must be positive".into()));
        }
        if !(a.max_distance > 0.0 && a.max_distance.is_finite()) {
            return Err(CliError::Config("analysis.max_distance must be positive".into()));
        }
        if !(a.histogram_width > 0.0 && a.histogram_width <= 1.0) {
            return Err(CliError::Config("analysis.histogram_width must be in (0, 1]".into()));
        }
        self.ga.validate()?;
        for c in &self.conditions {
            self.scenario_for(*c).validate()?;
        }
        Ok(())
    }

    /// The scenario flown under `condition`.
    pub fn scenario_for(&self, condition: Condition) -> Scenario {
        let mut s = self.scenario.clone();
        s.id = condition.name().to_string();
        match condition {
            Condition::Undisturbed => {
                s.wind.turbulence_intensity = self.turbulence.undisturbed;
                s.wind.disturbed = false;
            }
            Condition::Disturbed => {
                s.wind.turbulence_intensity = self.turbulence.disturbed;
                s.wind.disturbed = true;
            }
        }
        s
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.runs as u64).map(move |i| self.base_seed + i)
    }
}
