//! Experiment configs: one TOML file per run.

use disintegration::rng::parse_seed;
use disintegration::slln::{checkpoints_for, DecayGuard};
use disintegration::{Model, ModelId, ModelSpec, Observable, ProductDisintegration};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Seeds may be written as TOML integers or as strings (`"0x5eed"`,
/// `"1_000"`). Strings are the only way to spell seeds above `i64::MAX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Int(u64),
    Text(String),
}

impl SeedValue {
    pub fn resolve(&self) -> Result<u64, CliError> {
        match self {
            SeedValue::Int(v) => Ok(*v),
            SeedValue::Text(s) => parse_seed(s).map_err(|e| CliError::Parse(e.to_string())),
        }
    }

    pub fn hex(seed: u64) -> Self {
        SeedValue::Text(format!("{seed:#x}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "yes")]
    pub traces: bool,
    /// Number of leading replications whose full paths go to `paths.csv`.
    #[serde(default)]
    pub paths: usize,
    #[serde(default = "yes")]
    pub summary: bool,
    /// Writes `figure.csv` and `figure.svg` from replication 0. Submartingale model only.
    #[serde(default)]
    pub figure: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            traces: true,
            paths: 0,
            summary: true,
            figure: false,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    /// Run the decade decay guard on the gaps; needs three decades of checkpoints.
    #[serde(default)]
    pub decay: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_guard: Option<DecayGuard>,
    /// Regime model: allowed distance between terminal mean and the ergodic limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ergodic_tolerance: Option<f64>,
    /// Submartingale model: allowed distance between terminal mean and `ϑ_N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_tolerance: Option<f64>,
    /// Fraction of replications that must fall within a tolerance.
    #[serde(default = "default_coverage")]
    pub coverage: f64,
}

fn default_coverage() -> f64 {
    0.95
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            decay: false,
            decay_guard: None,
            ergodic_tolerance: None,
            limit_tolerance: None,
            coverage: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationBlock {
    pub n: usize,
    pub t: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: SeedValue,
    pub horizon: usize,
    pub replications: usize,
    /// Defaults to powers of ten from 100 below the horizon, then the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default)]
    pub strict: bool,
    pub model: ModelSpec,
    pub observable: Observable,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationBlock>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub horizon: Option<usize>,
    pub strict: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    /// Applies overrides, fills defaults and checks every invariant. The
    /// result is what a run actually uses and what gets echoed.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<Resolved, CliError> {
        let seed = match overrides.seed {
            Some(s) => s,
            None => self.seed.resolve()?,
        };
        if let Some(r) = overrides.replications {
            self.replications = r;
        }
        if let Some(h) = overrides.horizon {
            self.horizon = h;
            // keep explicit checkpoints that still fit and always end at the new horizon
            if let Some(points) = &mut self.checkpoints {
                points.retain(|n| *n < h);
                points.push(h);
            }
        }
        self.strict |= overrides.strict;
        self.seed = SeedValue::hex(seed);
        self.model = self
            .model
            .normalized()
            .map_err(|e| CliError::Invariant(e.to_string()))?;
        if self.horizon == 0 {
            return Err(CliError::Invariant("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(CliError::Invariant(
                "replications must be at least 1".into(),
            ));
        }
        let checkpoints = self
            .checkpoints
            .take()
            .unwrap_or_else(|| checkpoints_for(self.horizon));
        let increasing = checkpoints.windows(2).all(|w| w[0] < w[1]);
        if checkpoints.is_empty()
            || checkpoints[0] == 0
            || !increasing
            || checkpoints.last() > Some(&self.horizon)
        {
            return Err(CliError::Invariant(format!(
                "checkpoints must be positive, strictly increasing and at most the horizon {}",
                self.horizon
            )));
        }
        self.checkpoints = Some(checkpoints);
        self.observable
            .validate()
            .map_err(|e| CliError::Invariant(format!("observable: {e}")))?;
        if !(self.checks.coverage > 0.0 && self.checks.coverage <= 1.0) {
            return Err(CliError::Invariant(format!(
                "coverage must lie in (0, 1], got {}",
                self.checks.coverage
            )));
        }
        if let Some(c) = &self.concentration {
            if !(c.t.is_finite() && c.t > 0.0) || c.n == 0 {
                return Err(CliError::Invariant(
                    "concentration needs n >= 1 and t > 0".into(),
                ));
            }
        }
        let model = self
            .model
            .build()
            .map_err(|e| CliError::Invariant(e.to_string()))?;
        if self.outputs.figure && model.id() != ModelId::SubmartingaleCoin {
            return Err(CliError::Invariant(format!(
                "figure output needs the submartingale_coin model, got {}",
                model.id()
            )));
        }
        Ok(Resolved {
            seed,
            model,
            config: self,
        })
    }
}

/// A validated config together with what it resolves to.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub model: Model,
    pub config: ExperimentConfig,
}

impl Resolved {
    pub fn checkpoints(&self) -> &[usize] {
        self.config
            .checkpoints
            .as_deref()
            .expect("filled by resolve")
    }
}
