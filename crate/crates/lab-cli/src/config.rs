use std::path::Path;

use cat_teleport::coherent::C64;
use cat_teleport::protocol::{HomodyneSettings, ProtocolPath, TargetState};
use cat_teleport::quasi_bell::QuantizationRule;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    #[default]
    Enumerate,
    Sample,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Eigen-residual of the combined operators at `α = β = a`.
    Residual,
    /// Protocol average fidelity at `α = β = γ = a`.
    #[default]
    Fidelity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub kind: SweepKind,
    pub amplitudes: Vec<f64>,
}

/// Parameters shared by every subcommand. Every key is optional; unknown keys
/// are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Logical coefficients as `[re, im]`; normalized on load.
    pub c_a: C64,
    pub c_b: C64,
    pub path: ProtocolPath,
    pub mode: SampleMode,
    pub rule: QuantizationRule,
    pub homodyne: HomodyneSettings,
    /// Number-basis cutoff override for Fock-backed computations.
    pub truncation: Option<usize>,
    pub sweep: Option<SweepConfig>,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<String>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: 3.0,
            beta: 3.0,
            gamma: 3.0,
            c_a: C64::new(h, 0.0),
            c_b: C64::new(h, 0.0),
            path: ProtocolPath::Ideal,
            mode: SampleMode::Enumerate,
            rule: QuantizationRule::Exact,
            homodyne: HomodyneSettings::default(),
            truncation: None,
            sweep: None,
            trials: 1,
            seed: 0,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("{name} must be a finite amplitude >= 0, got {v}")));
            }
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        let n = self.c_a.norm_sqr() + self.c_b.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(CliError::Config("c_a and c_b must not both vanish".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.amplitudes.is_empty() {
                return Err(CliError::Config("sweep.amplitudes must not be empty".into()));
            }
            if let Some(bad) = sweep.amplitudes.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
                return Err(CliError::Config(format!("sweep amplitudes must be positive, got {bad}")));
            }
        }
        if self.truncation == Some(0) || self.homodyne.dims == Some(0) {
            return Err(CliError::Config("truncation must be at least 1".into()));
        }
        Ok(())
    }

    /// Target with the logical coefficients rescaled to unit norm.
    #[cfg(test)]
    pub fn target(&self) -> Result<TargetState, CliError> {
        self.target_at(self.gamma)
    }

    pub fn target_at(&self, gamma: f64) -> Result<TargetState, CliError> {
        let n = (self.c_a.norm_sqr() + self.c_b.norm_sqr()).sqrt();
        TargetState::new(self.c_a / n, self.c_b / n, gamma).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn homodyne_settings(&self) -> HomodyneSettings {
        HomodyneSettings { dims: self.truncation.or(self.homodyne.dims), ..self.homodyne }
    }
}
