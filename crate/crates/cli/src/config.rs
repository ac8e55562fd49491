//! Run configuration files: flat `key = value` text.
//!
//! A config names the register, the gate vocabulary, the initial and
//! target states, the training hyperparameters and the penalty toggles.
//! Parsing is strict: unknown or repeated keys are errors, so a typo
//! cannot silently fall back to a default. States are term lists like
//! `0:0110 1:1010` (phase index, then the basis string with qubit 0
//! leftmost), or the word `plus` for the uniform superposition. The
//! target may instead reference a graph edge-list file, resolved
//! relative to the config file's directory.

use std::path::{Path, PathBuf};

use thiserror::Error;

use sweetq::qlearn::TrainConfig;
use sweetq::reward::{PenaltyConfig, StaticRewardConfig};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line_no} is not `key = value`: {text:?}")]
    MalformedLine { line_no: usize, text: String },
    #[error("line {line_no}: unknown key {key:?}")]
    UnknownKey { line_no: usize, key: String },
    #[error("line {line_no}: key {key:?} given twice")]
    DuplicateKey { line_no: usize, key: String },
    #[error("line {line_no}: bad value for {key}: {reason}")]
    BadValue {
        line_no: usize,
        key: &'static str,
        reason: String,
    },
    #[error("missing required key {key:?}")]
    MissingKey { key: &'static str },
    #[error("exactly one of target_state and graph must be set")]
    TargetChoice,
}

/// An initial or target state as written in the config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateSpec {
    /// `plus`: every basis string with phase index 0.
    Plus,
    /// Explicit `m:x` terms; `x` kept as the written bit string.
    Terms(Vec<(u32, String)>),
}

/// Where the target comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetSpec {
    State(StateSpec),
    /// Edge-list file; the state is the corresponding graph state.
    Graph(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub p: u32,
    pub gate_set: Vec<String>,
    pub initial_state: StateSpec,
    pub target: TargetSpec,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub r_max: f64,
    pub k_max: u32,
    pub episodes_per_batch: u32,
    pub episode_length: u32,
    pub max_batches: u32,
    pub rollout_cap: u32,
    pub penalty_revisit: bool,
    pub penalty_noop: bool,
    pub penalty_congestion: bool,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Parses config text; `base` is the directory the file lives in,
    /// used to resolve a relative graph path.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut b = Builder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let line_no = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::MalformedLine {
                    line_no,
                    text: line.to_string(),
                }
            })?;
            b.assign(key.trim(), value.trim(), line_no, base)?;
        }
        b.finish()
    }

    /// The penalty block as the trainer consumes it; coefficients are
    /// fixed fractions of r_max.
    pub fn penalties(&self) -> PenaltyConfig {
        PenaltyConfig {
            revisit_enabled: self.penalty_revisit,
            noop_enabled: self.penalty_noop,
            congestion_enabled: self.penalty_congestion,
            ..PenaltyConfig::default()
        }
    }

    /// The training configuration this file describes, with the seed
    /// possibly overridden from the command line.
    pub fn train_config(&self, seed_override: Option<u64>) -> TrainConfig {
        TrainConfig {
            epsilon: self.epsilon,
            alpha: self.alpha,
            gamma: self.gamma,
            episodes_per_batch: self.episodes_per_batch,
            episode_length: self.episode_length,
            max_batches: self.max_batches,
            rollout_cap: self.rollout_cap,
            seed: seed_override.unwrap_or(self.seed),
            penalties: self.penalties(),
            static_reward: StaticRewardConfig {
                r_max: self.r_max,
                k_max: self.k_max,
            },
        }
    }
}

/// Accumulates assignments, rejecting repeats, then checks completeness.
#[derive(Default)]
struct Builder {
    n: Option<usize>,
    p: Option<u32>,
    gate_set: Option<Vec<String>>,
    initial_state: Option<StateSpec>,
    target_state: Option<StateSpec>,
    graph: Option<PathBuf>,
    epsilon: Option<f64>,
    alpha: Option<f64>,
    gamma: Option<f64>,
    r_max: Option<f64>,
    k_max: Option<u32>,
    episodes_per_batch: Option<u32>,
    episode_length: Option<u32>,
    max_batches: Option<u32>,
    rollout_cap: Option<u32>,
    penalty_revisit: Option<bool>,
    penalty_noop: Option<bool>,
    penalty_congestion: Option<bool>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

fn parse_num<T: std::str::FromStr>(
    value: &str,
    key: &'static str,
    line_no: usize,
) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        line_no,
        key,
        reason: e.to_string(),
    })
}

fn parse_bool(value: &str, key: &'static str, line_no: usize) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ConfigError::BadValue {
            line_no,
            key,
            reason: format!("expected true or false, got {other:?}"),
        }),
    }
}

fn parse_state(value: &str, key: &'static str, line_no: usize) -> Result<StateSpec, ConfigError> {
    if value == "plus" {
        return Ok(StateSpec::Plus);
    }
    let mut terms = Vec::new();
    for field in value.split_whitespace() {
        let bad = |reason: String| ConfigError::BadValue {
            line_no,
            key,
            reason,
        };
        let (m, x) = field
            .split_once(':')
            .ok_or_else(|| bad(format!("term {field:?} is not m:bits")))?;
        let m: u32 = m
            .parse()
            .map_err(|_| bad(format!("phase index {m:?} is not an integer")))?;
        if x.is_empty() || !x.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(bad(format!("basis string {x:?} is not a 0/1 string")));
        }
        terms.push((m, x.to_string()));
    }
    if terms.is_empty() {
        return Err(ConfigError::BadValue {
            line_no,
            key,
            reason: "state has no terms".to_string(),
        });
    }
    Ok(StateSpec::Terms(terms))
}

impl Builder {
    fn assign(
        &mut self,
        key: &str,
        value: &str,
        line_no: usize,
        base: &Path,
    ) -> Result<(), ConfigError> {
        // Checked before assignment so a repeated key is reported even
        // when the new value would not parse.
        macro_rules! set {
            ($field:ident, $parsed:expr) => {{
                if self.$field.is_some() {
                    return Err(ConfigError::DuplicateKey {
                        line_no,
                        key: key.to_string(),
                    });
                }
                self.$field = Some($parsed);
            }};
        }
        match key {
            "n" => set!(n, parse_num(value, "n", line_no)?),
            "p" => set!(p, parse_num(value, "p", line_no)?),
            "gate_set" => set!(
                gate_set,
                value.split_whitespace().map(str::to_string).collect()
            ),
            "initial_state" => set!(
                initial_state,
                parse_state(value, "initial_state", line_no)?
            ),
            "target_state" => set!(target_state, parse_state(value, "target_state", line_no)?),
            "graph" => set!(graph, base.join(value)),
            "epsilon" => set!(epsilon, parse_num(value, "epsilon", line_no)?),
            "alpha" => set!(alpha, parse_num(value, "alpha", line_no)?),
            "gamma" => set!(gamma, parse_num(value, "gamma", line_no)?),
            "r_max" => set!(r_max, parse_num(value, "r_max", line_no)?),
            "k_max" => set!(k_max, parse_num(value, "k_max", line_no)?),
            "episodes_per_batch" => set!(
                episodes_per_batch,
                parse_num(value, "episodes_per_batch", line_no)?
            ),
            "episode_length" => set!(
                episode_length,
                parse_num(value, "episode_length", line_no)?
            ),
            "max_batches" => set!(max_batches, parse_num(value, "max_batches", line_no)?),
            "rollout_cap" => set!(rollout_cap, parse_num(value, "rollout_cap", line_no)?),
            "penalty_revisit" => set!(
                penalty_revisit,
                parse_bool(value, "penalty_revisit", line_no)?
            ),
            "penalty_noop" => set!(penalty_noop, parse_bool(value, "penalty_noop", line_no)?),
            "penalty_congestion" => set!(
                penalty_congestion,
                parse_bool(value, "penalty_congestion", line_no)?
            ),
            "seed" => set!(seed, parse_num(value, "seed", line_no)?),
            "out" => set!(out, PathBuf::from(value)),
            other => {
                return Err(ConfigError::UnknownKey {
                    line_no,
                    key: other.to_string(),
                })
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, ConfigError> {
        let target = match (self.target_state, self.graph) {
            (Some(state), None) => TargetSpec::State(state),
            (None, Some(path)) => TargetSpec::Graph(path),
            _ => return Err(ConfigError::TargetChoice),
        };
        let require = |key| ConfigError::MissingKey { key };
        Ok(RunConfig {
            n: self.n.ok_or(require("n"))?,
            p: self.p.ok_or(require("p"))?,
            gate_set: self.gate_set.ok_or(require("gate_set"))?,
            initial_state: self.initial_state.ok_or(require("initial_state"))?,
            target,
            epsilon: self.epsilon.unwrap_or(0.8),
            alpha: self.alpha.unwrap_or(0.8),
            gamma: self.gamma.unwrap_or(0.5),
            r_max: self.r_max.unwrap_or(10_000.0),
            k_max: self.k_max.unwrap_or(2),
            episodes_per_batch: self.episodes_per_batch.unwrap_or(10_000),
            episode_length: self.episode_length.unwrap_or(50),
            max_batches: self.max_batches.unwrap_or(10),
            rollout_cap: self.rollout_cap.unwrap_or(50),
            penalty_revisit: self.penalty_revisit.unwrap_or(true),
            penalty_noop: self.penalty_noop.unwrap_or(true),
            penalty_congestion: self.penalty_congestion.unwrap_or(false),
            seed: self.seed.unwrap_or(0),
            out: self.out,
        })
    }
}
