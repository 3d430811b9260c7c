//! System and experiment configuration.
//!
//! [`SystemConfig`] is what the policies and the simulator consume: per-user
//! codes, grids, bounds and success tables. [`ExperimentConfig`] is the JSON
//! document the CLI reads; it holds the symmetric defaults plus run controls
//! and is expanded into a [`SystemConfig`] once a table is available.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policies::PrrParams;
use crate::sim::SimMode;
use crate::tables::{DistortionModel, ErrorTable, TableError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("at least one user is required")]
    NoUsers,
    #[error("user {user}: block length n = {n} exceeds slot capacity N = {slot_symbols}")]
    BlockTooLong {
        user: usize,
        n: usize,
        slot_symbols: usize,
    },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: String, value: f64 },
    #[error("user {user}: {what} grid is empty")]
    EmptyGrid { user: usize, what: &'static str },
    #[error("user {user}: table does not cover {what} = {value}")]
    GridNotCovered {
        user: usize,
        what: &'static str,
        value: String,
    },
    #[error("user {user}: table block length {table_n} != configured n = {n}")]
    TableBlockMismatch {
        user: usize,
        table_n: usize,
        n: usize,
    },
    #[error("expected {expected} per-user values for {name}, got {got}")]
    BadLength {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Which scheduler an episode runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Srp,
    Dpp,
    Prr,
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Policy::Srp => "srp",
            Policy::Dpp => "dpp",
            Policy::Prr => "prr",
        })
    }
}

/// One user's code, grids, bounds and success table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserConfig {
    /// Codeword length in symbols.
    pub n: usize,
    pub k_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub weight: f64,
    /// Average distortion bound d̄.
    pub d_bar: f64,
    /// Age weight in the drift-plus-penalty score.
    pub beta: f64,
    pub distortion: DistortionModel,
    pub table: ErrorTable,
}

impl UserConfig {
    pub fn distortion_at(&self, k: usize) -> f64 {
        self.distortion.distortion(k)
    }
}

/// Full multi-user system: what `solveSrp`, `dppStep` and `runEpisode` need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Slot capacity N in symbols; a user's age resets to `n / N`.
    pub slot_symbols: usize,
    /// Average power bound P̄.
    pub p_bar: f64,
    pub v1: f64,
    pub v2: f64,
    /// Give the randomized policy a synthetic idle cell (off by default).
    #[serde(default)]
    pub allow_idle: bool,
    pub users: Vec<UserConfig>,
}

impl SystemConfig {
    pub fn m(&self) -> usize {
        self.users.len()
    }

    /// Age value after a confirmed delivery for user `i`, in slots.
    pub fn reset_age(&self, i: usize) -> f64 {
        self.users[i].n as f64 / self.slot_symbols as f64
    }

    /// Success probability the scheduler uses for cell `(i, ki, pi)`
    /// (indices into the user's grids), per the table's detection mode.
    pub fn success(&self, i: usize, ki: usize, pi: usize) -> f64 {
        let u = &self.users[i];
        let tki = u
            .table
            .k_index(u.k_values[ki])
            .expect("validated: table covers k grid");
        let tpi = u
            .table
            .p_index(u.p_values[pi])
            .expect("validated: table covers P grid");
        u.table.policy_success(tki, tpi)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.users.is_empty() {
            return Err(ConfigError::NoUsers);
        }
        for (name, value) in [
            ("P̄", self.p_bar),
            ("V₁", self.v1),
            ("V₂", self.v2),
        ] {
            if !(value > 0.0) {
                return Err(ConfigError::NonPositive {
                    name: name.to_string(),
                    value,
                });
            }
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.n > self.slot_symbols {
                return Err(ConfigError::BlockTooLong {
                    user: i,
                    n: u.n,
                    slot_symbols: self.slot_symbols,
                });
            }
            if u.k_values.is_empty() {
                return Err(ConfigError::EmptyGrid { user: i, what: "k" });
            }
            if u.p_values.is_empty() {
                return Err(ConfigError::EmptyGrid { user: i, what: "P" });
            }
            for (name, value) in [
                (format!("weight w_{i}"), u.weight),
                (format!("d̄_{i}"), u.d_bar),
                (format!("β_{i}"), u.beta),
            ] {
                if !(value > 0.0) {
                    return Err(ConfigError::NonPositive { name, value });
                }
            }
            u.table.validate()?;
            if u.table.n != u.n {
                return Err(ConfigError::TableBlockMismatch {
                    user: i,
                    table_n: u.table.n,
                    n: u.n,
                });
            }
            for &k in &u.k_values {
                if u.table.k_index(k).is_none() {
                    return Err(ConfigError::GridNotCovered {
                        user: i,
                        what: "k",
                        value: k.to_string(),
                    });
                }
            }
            for &p in &u.p_values {
                if !(p > 0.0) {
                    return Err(ConfigError::NonPositive {
                        name: format!("P value for user {i}"),
                        value: p,
                    });
                }
                if u.table.p_index(p).is_none() {
                    return Err(ConfigError::GridNotCovered {
                        user: i,
                        what: "P",
                        value: p.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn default_m() -> usize {
    2
}
fn default_n() -> usize {
    15
}
fn default_k_values() -> Vec<usize> {
    (4..=11).collect()
}
fn default_p_values() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0]
}
fn default_weight() -> f64 {
    1.0
}
fn default_p_bar() -> f64 {
    2.0
}
fn default_d_bar() -> f64 {
    (2.0f64).powf(-0.1)
}
fn default_beta() -> f64 {
    100.0
}
fn default_v() -> f64 {
    1.0
}
fn default_t_slots() -> u64 {
    1_000_000
}
fn default_trials() -> u64 {
    100_000
}
fn default_seed() -> u64 {
    1
}
fn default_policy() -> Policy {
    Policy::Dpp
}

/// The CLI-facing JSON document: symmetric system parameters plus run
/// controls. Every field has a documented default, so `{}` is a valid
/// config describing the reference two-user setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub slot_symbols: usize,
    pub k_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub weight: f64,
    /// Optional per-user weights overriding `weight` (length M).
    pub weights: Option<Vec<f64>>,
    pub p_bar: f64,
    pub d_bar: f64,
    pub beta: f64,
    pub v1: f64,
    pub v2: f64,
    pub distortion: DistortionModel,
    pub allow_idle: bool,
    pub policy: Policy,
    pub t_slots: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub prr: PrrParams,
    /// P̄ grid for `sweep`; empty means "not swept".
    pub sweep_p_bar: Vec<f64>,
    /// d̄ grid for `sweep`; empty means "not swept".
    pub sweep_d_bar: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: default_m(),
            n: default_n(),
            slot_symbols: default_n(),
            k_values: default_k_values(),
            p_values: default_p_values(),
            weight: default_weight(),
            weights: None,
            p_bar: default_p_bar(),
            d_bar: default_d_bar(),
            beta: default_beta(),
            v1: default_v(),
            v2: default_v(),
            distortion: DistortionModel::default(),
            allow_idle: false,
            policy: default_policy(),
            t_slots: default_t_slots(),
            trials: default_trials(),
            seed: default_seed(),
            mode: SimMode::FastTable,
            prr: PrrParams::default(),
            sweep_p_bar: Vec::new(),
            sweep_d_bar: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn weight_of(&self, i: usize) -> f64 {
        self.weights
            .as_ref()
            .map(|w| w[i])
            .unwrap_or(self.weight)
    }

    /// Expand into a [`SystemConfig`] sharing one success table across all
    /// users (the symmetric setup).
    pub fn build_system(&self, table: &ErrorTable) -> Result<SystemConfig, ConfigError> {
        if let Some(w) = &self.weights {
            if w.len() != self.m {
                return Err(ConfigError::BadLength {
                    name: "weights",
                    expected: self.m,
                    got: w.len(),
                });
            }
        }
        let users = (0..self.m)
            .map(|i| UserConfig {
                n: self.n,
                k_values: self.k_values.clone(),
                p_values: self.p_values.clone(),
                weight: self.weight_of(i),
                d_bar: self.d_bar,
                beta: self.beta,
                distortion: self.distortion.clone(),
                table: table.clone(),
            })
            .collect();
        let sys = SystemConfig {
            slot_symbols: self.slot_symbols,
            p_bar: self.p_bar,
            v1: self.v1,
            v2: self.v2,
            allow_idle: self.allow_idle,
            users,
        };
        sys.validate()?;
        Ok(sys)
    }
}
