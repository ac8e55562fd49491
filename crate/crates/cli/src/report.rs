//! The structured run report written next to each synthesis.
//!
//! The report captures everything a harness needs to judge a run:
//! the hyperparameters it was launched with, how many batches it took,
//! whether the greedy rollout reached the target, the circuit and its
//! metrics when it did, the final windowed mean Bellman error, and the
//! nonzero entry counts of the three tables. It deliberately carries
//! no timestamps or host paths, so repeating a run with the same seed
//! reproduces the file byte for byte.

use serde::{Deserialize, Serialize};

use sweetq::qlearn::Synthesis;
use sweetq::CircuitMetrics;

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub revisit: bool,
    pub noop: bool,
    pub congestion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub r_max: f64,
    pub k_max: u32,
    pub episodes_per_batch: u32,
    pub episode_length: u32,
    pub max_batches: u32,
    pub rollout_cap: u32,
    pub penalties: PenaltyReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub gate_count: usize,
    pub t_count: usize,
    pub entangling_count: usize,
    pub depth: usize,
}

impl From<CircuitMetrics> for MetricsReport {
    fn from(m: CircuitMetrics) -> Self {
        MetricsReport {
            gate_count: m.gate_count,
            t_count: m.t_count,
            entangling_count: m.entangling_count,
            depth: m.depth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntries {
    pub q: usize,
    pub r_static: usize,
    pub r_dynamic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub p: u32,
    pub gate_set: Vec<String>,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
    pub converged: bool,
    pub batches_run: u32,
    pub episodes: u64,
    pub steps: u64,
    pub mean_bellman_error: f64,
    pub rollout_success: bool,
    pub rollout_steps: u32,
    /// Gate lines of the synthesized circuit, present only on success.
    pub circuit: Option<String>,
    pub metrics: Option<MetricsReport>,
    pub table_entries: TableEntries,
}

impl RunReport {
    /// Summarizes a finished synthesis; `seed` is the seed actually
    /// used, which may differ from the config's when overridden.
    pub fn new(cfg: &RunConfig, seed: u64, syn: &Synthesis) -> Self {
        RunReport {
            n: cfg.n,
            p: cfg.p,
            gate_set: cfg.gate_set.clone(),
            seed,
            hyperparameters: Hyperparameters {
                epsilon: cfg.epsilon,
                alpha: cfg.alpha,
                gamma: cfg.gamma,
                r_max: cfg.r_max,
                k_max: cfg.k_max,
                episodes_per_batch: cfg.episodes_per_batch,
                episode_length: cfg.episode_length,
                max_batches: cfg.max_batches,
                rollout_cap: cfg.rollout_cap,
                penalties: PenaltyReport {
                    revisit: cfg.penalty_revisit,
                    noop: cfg.penalty_noop,
                    congestion: cfg.penalty_congestion,
                },
            },
            converged: syn.converged,
            batches_run: syn.batches_run,
            episodes: syn.stats.episodes,
            steps: syn.stats.steps,
            mean_bellman_error: syn.stats.mean_bellman_error(),
            rollout_success: syn.rollout.success,
            rollout_steps: syn.rollout.steps,
            circuit: syn.circuit.as_ref().map(|c| c.to_text()),
            metrics: syn.circuit.as_ref().map(|c| c.metrics().into()),
            table_entries: TableEntries {
                q: syn.q.len(),
                r_static: syn.r_sta.len(),
                r_dynamic: syn.r_dyn.len(),
            },
        }
    }

    /// Pretty JSON with a trailing newline; field order is fixed by
    /// the struct, so equal reports serialize identically.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
