use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::reward::RewardKind;

/// Episode parameters. Parsed from `key = value` run-config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Mean job inter-arrival time in clocks.
    pub scale: f64,
    /// Episode length in clocks.
    pub sim_length: u64,
    /// Maximum number of jobs in the system at once.
    pub capacity: usize,
    /// Size of the workload set jobs are drawn from.
    pub num_workloads: usize,
    /// Start with `capacity` jobs queued and refill on every completion.
    pub quasi_steady: bool,
    pub seed: u64,
    pub reward_kind: RewardKind,
    pub c1: f64,
    pub c2: f64,
    /// Trailing window (clocks) during which the `sparse` reward is paid.
    pub sparse_window: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scale: 25.0,
            sim_length: 10_000,
            capacity: 3,
            num_workloads: 200,
            quasi_steady: true,
            seed: 0,
            reward_kind: RewardKind::Dense,
            c1: 50.0,
            c2: -0.5,
            sparse_window: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("run config: {0}")]
    Parse(String),
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        if self.sim_length == 0 {
            return bad("sim_length must be positive".into());
        }
        if self.capacity == 0 {
            return bad("capacity must be positive".into());
        }
        if self.num_workloads == 0 {
            return bad("num_workloads must be positive".into());
        }
        if self.quasi_steady && self.num_workloads < self.capacity {
            return bad(format!(
                "quasi-steady start needs num_workloads ({}) >= capacity ({})",
                self.num_workloads, self.capacity
            ));
        }
        if !(self.c1.is_finite() && self.c2.is_finite()) {
            return bad("reward weights must be finite".into());
        }
        if self.sparse_window == 0 {
            return bad("sparse_window must be positive".into());
        }
        Ok(())
    }

    /// Parses a run-config file; missing keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
