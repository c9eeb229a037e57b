use std::path::Path;

use dpsqkd_core::protocol::DEFAULT_PUBLISH_FRACTION;
use dpsqkd_core::OverlapConvention;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Parameters shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub n_pulses: usize,
    pub n_blocks: usize,
    pub alpha: f64,
    pub eta: f64,
    pub seed: u64,
    pub overlap_convention: OverlapConvention,
    pub publish_fraction: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_pulses: 1000,
            n_blocks: 10_000,
            alpha: 0.338,
            eta: 1.0,
            seed: 0,
            overlap_convention: OverlapConvention::Paper,
            publish_fraction: DEFAULT_PUBLISH_FRACTION,
        }
    }
}

/// A partial configuration, as read from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub n_pulses: Option<usize>,
    pub n_blocks: Option<usize>,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub overlap_convention: Option<OverlapConvention>,
    pub publish_fraction: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::InvalidConfig(format!("malformed config {}: {e}", path.display()))
        })
    }

    pub fn apply(&self, config: &mut SimulationConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    config.$field = v;
                }
            )*};
        }
        set!(
            n_pulses,
            n_blocks,
            alpha,
            eta,
            seed,
            overlap_convention,
            publish_fraction
        );
    }
}

impl SimulationConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(
        file: Option<&Path>,
        flags: &ConfigOverrides,
    ) -> Result<SimulationConfig, CliError> {
        let mut config = SimulationConfig::default();
        if let Some(path) = file {
            ConfigOverrides::from_file(path)?.apply(&mut config);
        }
        flags.apply(&mut config);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::InvalidConfig(msg));
        if self.n_pulses < 2 {
            return fail(format!(
                "n_pulses must be at least 2, got {}",
                self.n_pulses
            ));
        }
        if self.n_blocks < 1 {
            return fail("n_blocks must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return fail(format!("eta must lie in [0, 1], got {}", self.eta));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail(format!(
                "alpha must be a finite non-negative number, got {}",
                self.alpha
            ));
        }
        if !(self.publish_fraction > 0.0 && self.publish_fraction <= 1.0) {
            return fail(format!(
                "publish_fraction must lie in (0, 1], got {}",
                self.publish_fraction
            ));
        }
        Ok(())
    }
}
