//! Versioned experiment configuration.
//!
//! The file is TOML with a fixed schema; unknown keys are rejected. The
//! digest is taken over the canonical re-serialization, so two files that
//! differ only in comments or key order share a digest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use vanlam_core::construct::{SlackPolicy, StageSchedule};
use vanlam_core::kolmo::WITNESS_LEN_CAP;
use vanlam_core::machine::{Decoder, ExecBudget, MachineConfig, ENUMERATION_CAP};
use vanlam_core::martingale::{FAIRNESS_CAP, PROJECTION_CAP};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest bettor pool the suite will build.
pub const POOL_CAP_MAX: usize = 12;
pub const STAGES_MAX: usize = 8;
pub const KRAFT_LEN_MAX: usize = 32;
pub const KRAFT_REQUESTS_MAX: usize = 256;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    Version { found: u32 },
    #[error("{key} = {value} exceeds the maximum {max}")]
    Cap {
        key: &'static str,
        value: usize,
        max: usize,
    },
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub machine: MachineSection,
    pub caps: Caps,
    pub schedule: ScheduleSection,
    pub slack: SlackSection,
    pub suite: SuiteSection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSection {
    pub decoders: Vec<Decoder>,
    /// Budget of complexity witnesses and plain bettors, `name*c`.
    pub budget: String,
    /// Window of honest oracle strategies, `name*c`.
    pub honesty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    /// Longest code enumerated by the Kraft check and the complexity command.
    pub enumeration: usize,
    pub fairness_depth: usize,
    /// Longest code in the bettor pool.
    pub pool: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub stages: usize,
    pub alpha: usize,
    /// Explicit gaps; the minimal separating gaps when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlackMode {
    Minimal,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlackSection {
    pub policy: SlackMode,
    /// Upper end of the search for `minimal`, the value for `fixed`.
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    pub kraft_sets: usize,
    pub kraft_max_requests: usize,
    pub kraft_max_len: usize,
    pub transfer_strategies: usize,
    pub transfer_len: usize,
    pub savings_strategies: usize,
    pub savings_depth: usize,
    /// Lookahead corpus: every string up to this length.
    pub lookahead_len: usize,
}

pub const DEFAULT_CONFIG: &str = r#"version = 1

[machine]
decoders = ["interleave-tail", "conditional-interleave"]
budget = "n2*4"
honesty = "n2*1"

[caps]
enumeration = 14
fairness_depth = 8
pool = 10

[schedule]
stages = 4
alpha = 2

[slack]
policy = "minimal"
value = 4

[suite]
kraft_sets = 500
kraft_max_requests = 64
kraft_max_len = 16
transfer_strategies = 100
transfer_len = 4
savings_strategies = 200
savings_depth = 12
lookahead_len = 8
"#;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("built-in config is valid")
    }
}

fn cap(key: &'static str, value: usize, max: usize) -> Result<(), ConfigError> {
    if value > max {
        return Err(ConfigError::Cap { key, value, max });
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != SCHEMA_VERSION {
            return Err(ConfigError::Version {
                found: self.version,
            });
        }
        self.machine()?;
        self.budget()?;
        self.honesty()?;
        cap("caps.enumeration", self.caps.enumeration, ENUMERATION_CAP)?;
        cap(
            "caps.fairness_depth",
            self.caps.fairness_depth,
            FAIRNESS_CAP,
        )?;
        cap("caps.pool", self.caps.pool, POOL_CAP_MAX)?;
        cap("schedule.stages", self.schedule.stages, STAGES_MAX)?;
        cap(
            "suite.kraft_max_len",
            self.suite.kraft_max_len,
            KRAFT_LEN_MAX,
        )?;
        cap(
            "suite.kraft_max_requests",
            self.suite.kraft_max_requests,
            KRAFT_REQUESTS_MAX,
        )?;
        cap(
            "suite.transfer_len",
            self.suite.transfer_len,
            PROJECTION_CAP / 2,
        )?;
        cap(
            "suite.savings_depth",
            self.suite.savings_depth,
            FAIRNESS_CAP,
        )?;
        cap(
            "suite.lookahead_len",
            self.suite.lookahead_len,
            FAIRNESS_CAP,
        )?;
        if self.suite.kraft_max_len == 0 {
            return Err(ConfigError::Invalid {
                key: "suite.kraft_max_len",
                message: "must be positive".into(),
            });
        }
        let sched = self.schedule()?;
        cap(
            "schedule (length of b)",
            sched.b_len(sched.stages()),
            WITNESS_LEN_CAP,
        )?;
        sched.audit().map_err(|e| ConfigError::Invalid {
            key: "schedule",
            message: e.to_string(),
        })
    }

    pub fn machine(&self) -> Result<MachineConfig, ConfigError> {
        MachineConfig::with_decoders(&self.machine.decoders).map_err(|e| ConfigError::Invalid {
            key: "machine.decoders",
            message: e.to_string(),
        })
    }

    pub fn budget(&self) -> Result<ExecBudget, ConfigError> {
        ExecBudget::parse(&self.machine.budget).map_err(|e| ConfigError::Invalid {
            key: "machine.budget",
            message: e.to_string(),
        })
    }

    pub fn honesty(&self) -> Result<ExecBudget, ConfigError> {
        ExecBudget::parse(&self.machine.honesty).map_err(|e| ConfigError::Invalid {
            key: "machine.honesty",
            message: e.to_string(),
        })
    }

    pub fn schedule(&self) -> Result<StageSchedule, ConfigError> {
        let honesty = self.honesty()?;
        let s = &self.schedule;
        Ok(match &s.beta {
            None => StageSchedule::minimal_gap(s.stages, s.alpha, honesty),
            Some(beta) => StageSchedule {
                alpha: vec![s.alpha; s.stages],
                beta: beta.clone(),
                honesty,
            },
        })
    }

    pub fn slack(&self) -> SlackPolicy {
        match self.slack.policy {
            SlackMode::Minimal => SlackPolicy::Minimal {
                max: self.slack.value,
            },
            SlackMode::Fixed => SlackPolicy::Fixed(self.slack.value),
        }
    }

    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        hex::encode(&Sha256::digest(self.canonical().as_bytes())[..8])
    }
}
