//! Run configuration: one TOML file (JSON accepted when the file name ends in
//! `.json`), unknown keys rejected.
//!
//! ```toml
//! seed = 7
//! out = "results/convergence"
//!
//! [lp]
//! tol_feas = 1e-9
//!
//! [[experiment]]
//! kind = "convergence"
//! cost = "gaussian:s=0.7071067811865476"
//! n_range = [2, 10]
//! mu = { points = [0.0, 1.0] }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use mmot_core::experiments::{ExperimentSpec, RunOptions};
use mmot_core::lp::LpOptions;
use mmot_core::mmot::DEFAULT_BUDGET;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Record wall times in result tables (breaks byte-for-byte
    /// reproducibility).
    #[serde(default)]
    pub timing: bool,
    /// Tolerance overrides.
    #[serde(default)]
    pub lp: LpOptions,
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentSpec>,
}

impl RunConfig {
    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        let cfg: RunConfig = if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?
        };
        if cfg.experiments.is_empty() {
            return Err(CliError::Config("config lists no experiments".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e == "json");
        Self::parse(&text, json)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            budget: self.budget,
            lp: self.lp.clone(),
            timing: self.timing,
        }
    }
}
