//! Tabular Q-learning over sparse tables, plus the greedy test phase.
//!
//! Training runs fixed-length episodes from a fixed start state. Each
//! step picks an action ε-greedily, applies the gate, charges dynamic
//! penalties, and performs one temporal-difference update on the sparse
//! Q table. Episodes never stop early at the target; reaching it only
//! matters in the testing phase, where a greedy rollout from the start
//! defines success and yields the synthesized circuit. Batches of
//! episodes alternate with rollouts until one succeeds or the batch
//! budget runs out.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::action::{enumerate_actions, Action, GateSet};
use crate::circuit::Circuit;
use crate::reward::{
    build_static_reward, dynamic_penalty, total_reward, EpisodeContext, PenaltyConfig,
    RewardError, SparseTable, StaticRewardConfig,
};
use crate::sweet::{StateKey, SweetState};

/// Sliding-window length, in steps, for the reported mean |δ|.
pub const BELLMAN_WINDOW: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("invalid training configuration: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("inconsistent problem: {reason}")]
    MismatchedProblem { reason: &'static str },
    #[error(transparent)]
    Reward(#[from] RewardError),
}

/// Hyperparameters and budgets for one synthesis run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub episodes_per_batch: u32,
    /// Steps per episode; every episode runs exactly this long.
    pub episode_length: u32,
    pub max_batches: u32,
    /// Step cap for the greedy rollout.
    pub rollout_cap: u32,
    pub seed: u64,
    pub penalties: PenaltyConfig,
    pub static_reward: StaticRewardConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epsilon: 0.8,
            alpha: 0.8,
            gamma: 0.5,
            episodes_per_batch: 10_000,
            episode_length: 50,
            max_batches: 10,
            rollout_cap: 50,
            seed: 0,
            penalties: PenaltyConfig::default(),
            static_reward: StaticRewardConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(unit(self.epsilon) && unit(self.alpha) && unit(self.gamma)) {
            return Err(TrainError::InvalidConfig {
                reason: "epsilon, alpha and gamma must lie in [0, 1]",
            });
        }
        if self.episodes_per_batch == 0 || self.max_batches == 0 {
            return Err(TrainError::InvalidConfig {
                reason: "episodes_per_batch and max_batches must be at least 1",
            });
        }
        if self.episode_length == 0 || self.rollout_cap == 0 {
            return Err(TrainError::InvalidConfig {
                reason: "episode_length and rollout_cap must be at least 1",
            });
        }
        Ok(())
    }
}

/// What to synthesize: a start state, a target and the gates allowed.
#[derive(Clone, Debug)]
pub struct Problem {
    pub start: SweetState,
    pub target: SweetState,
    pub set: GateSet,
}

impl Problem {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.start.grid() != self.target.grid() {
            return Err(TrainError::MismatchedProblem {
                reason: "start and target use different phase grids",
            });
        }
        if self.start.n() != self.target.n() {
            return Err(TrainError::MismatchedProblem {
                reason: "start and target have different qubit counts",
            });
        }
        if self.set.n() != self.start.n() {
            return Err(TrainError::MismatchedProblem {
                reason: "gate set is over a different qubit count than the states",
            });
        }
        Ok(())
    }
}

/// Running counters for a training run.
#[derive(Clone, Debug)]
pub struct TrainStats {
    pub episodes: u64,
    pub steps: u64,
    /// Nonzero Q entries at the time the stats were reported.
    pub q_entries: usize,
    window: VecDeque<f64>,
    window_sum: f64,
    window_cap: usize,
}

impl TrainStats {
    pub fn new(window_cap: usize) -> Self {
        TrainStats {
            episodes: 0,
            steps: 0,
            q_entries: 0,
            window: VecDeque::with_capacity(window_cap.min(1 << 20)),
            window_sum: 0.0,
            window_cap,
        }
    }

    fn record(&mut self, delta: f64) {
        self.steps += 1;
        self.window.push_back(delta.abs());
        self.window_sum += delta.abs();
        if self.window.len() > self.window_cap {
            // Dropped element must be defensible against drift; the sum
            // only drifts by rounding, which stays far below the scale
            // of any threshold read off this number.
            self.window_sum -= self.window.pop_front().unwrap();
        }
    }

    /// Mean |δ| over the most recent window of steps; zero before any
    /// step has run.
    pub fn mean_bellman_error(&self) -> f64 {
        if self.window.is_empty() {
            0.0
        } else {
            self.window_sum / self.window.len() as f64
        }
    }
}

/// Outcome of one greedy rollout.
#[derive(Clone, Debug)]
pub struct RolloutResult {
    pub success: bool,
    pub actions: Vec<Action>,
    pub final_state: SweetState,
    pub steps: u32,
}

/// Everything a finished synthesis run produced.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub converged: bool,
    pub batches_run: u32,
    /// Last rollout attempted; the successful one when converged.
    pub rollout: RolloutResult,
    /// Synthesized circuit, present only when converged.
    pub circuit: Option<Circuit>,
    pub stats: TrainStats,
    pub q: SparseTable,
    pub r_sta: SparseTable,
    pub r_dyn: SparseTable,
}

fn greedy_action<'a>(q: &SparseTable, s: &StateKey, actions: &'a [Action]) -> &'a Action {
    let mut best = &actions[0];
    let mut best_value = q.get(s, best.index);
    for action in &actions[1..] {
        let value = q.get(s, action.index);
        if value > best_value {
            best = action;
            best_value = value;
        }
    }
    best
}

/// ε-greedy action choice: uniformly random with probability ε, else
/// the greedy action with ties broken toward the lowest index.
pub fn select_action<'a>(
    q: &SparseTable,
    s: &StateKey,
    actions: &'a [Action],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> &'a Action {
    if rng.gen::<f64>() < epsilon {
        &actions[rng.gen_range(0..actions.len())]
    } else {
        greedy_action(q, s, actions)
    }
}

/// One temporal-difference update; returns the error term δ.
///
/// δ = r + γ·max over next-state values − Q(s, a), and Q(s, a) moves by
/// α·δ. An update landing exactly on zero leaves no stored entry, which
/// keeps the table's support to pairs that actually picked up signal.
pub fn q_update(
    q: &mut SparseTable,
    s: &StateKey,
    action: u32,
    r: f64,
    s_next: &StateKey,
    n_actions: u32,
    alpha: f64,
    gamma: f64,
) -> f64 {
    let delta = r + gamma * q.max_over_actions(s_next, n_actions) - q.get(s, action);
    q.add(s, action, alpha * delta);
    delta
}

/// Greedy walk from `s0`, capped at `l_c` steps; success means the walk
/// stands on `target` at or before the cap. Reads the Q table only.
pub fn greedy_rollout(
    q: &SparseTable,
    s0: &SweetState,
    target: &SweetState,
    actions: &[Action],
    l_c: u32,
) -> RolloutResult {
    let mut state = s0.clone();
    let mut taken = Vec::new();
    let mut steps = 0u32;
    while state != *target && steps < l_c {
        let action = greedy_action(q, &state.key(), actions);
        state = state
            .apply_action(action)
            .expect("enumerated actions apply to in-range states")
            .state;
        taken.push(action.clone());
        steps += 1;
    }
    RolloutResult {
        success: state == *target,
        actions: taken,
        final_state: state,
        steps,
    }
}

/// The training loop's mutable pieces, kept together so batches can be
/// interleaved with rollouts and inspections.
pub struct Trainer {
    problem: Problem,
    cfg: TrainConfig,
    actions: Vec<Action>,
    q: SparseTable,
    r_sta: SparseTable,
    r_dyn: SparseTable,
    stats: TrainStats,
    episodes_done: u64,
}

impl Trainer {
    /// Validates the problem and config and precomputes the static
    /// reward table.
    pub fn new(problem: Problem, cfg: TrainConfig) -> Result<Self, TrainError> {
        let r_sta = build_static_reward(&problem.target, &problem.set, &cfg.static_reward)?;
        Trainer::with_static_reward(problem, cfg, r_sta)
    }

    /// As `new`, but reuses an already-built static table; the caller
    /// vouches that it was built for this target and gate set.
    pub fn with_static_reward(
        problem: Problem,
        cfg: TrainConfig,
        r_sta: SparseTable,
    ) -> Result<Self, TrainError> {
        cfg.validate()?;
        problem.validate()?;
        let actions = enumerate_actions(&problem.set);
        Ok(Trainer {
            problem,
            cfg,
            actions,
            q: SparseTable::new(),
            r_sta,
            r_dyn: SparseTable::new(),
            stats: TrainStats::new(BELLMAN_WINDOW),
            episodes_done: 0,
        })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn q(&self) -> &SparseTable {
        &self.q
    }

    pub fn r_sta(&self) -> &SparseTable {
        &self.r_sta
    }

    pub fn r_dyn(&self) -> &SparseTable {
        &self.r_dyn
    }

    pub fn stats(&self) -> &TrainStats {
        &self.stats
    }

    pub fn episodes_done(&self) -> u64 {
        self.episodes_done
    }

    /// Runs one episode of exactly `episode_length` steps.
    ///
    /// Each global episode gets its own counter-derived stream of the
    /// seeded generator, so a run is reproducible regardless of how
    /// episodes are grouped into batches.
    pub fn run_episode(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(self.episodes_done + 1);
        let n_actions = self.actions.len() as u32;
        let mut state = self.problem.start.clone();
        let mut key = state.key();
        let mut ctx = EpisodeContext::new(state.n(), key.clone());
        for _ in 0..self.cfg.episode_length {
            let action =
                select_action(&self.q, &key, &self.actions, self.cfg.epsilon, &mut rng).clone();
            let next = state
                .apply_action(&action)
                .expect("enumerated actions apply to in-range states")
                .state;
            let next_key = next.key();
            dynamic_penalty(
                &ctx,
                &key,
                &action,
                &next_key,
                self.r_sta.get(&key, action.index),
                &self.cfg.penalties,
                self.cfg.static_reward.r_max,
                &mut self.r_dyn,
            );
            let r = total_reward(&self.r_sta, &self.r_dyn, &key, action.index);
            let delta = q_update(
                &mut self.q,
                &key,
                action.index,
                r,
                &next_key,
                n_actions,
                self.cfg.alpha,
                self.cfg.gamma,
            );
            self.stats.record(delta);
            ctx.commit_action(&action);
            ctx.note_arrival(next_key.clone());
            state = next;
            key = next_key;
        }
        self.episodes_done += 1;
        self.stats.episodes += 1;
    }

    pub fn run_batch(&mut self) {
        for _ in 0..self.cfg.episodes_per_batch {
            self.run_episode();
        }
    }

    pub fn rollout(&self) -> RolloutResult {
        greedy_rollout(
            &self.q,
            &self.problem.start,
            &self.problem.target,
            &self.actions,
            self.cfg.rollout_cap,
        )
    }

    /// Consumes the trainer into a result around the given rollout.
    pub fn finish(mut self, batches_run: u32, rollout: RolloutResult) -> Synthesis {
        self.stats.q_entries = self.q.len();
        let circuit = if rollout.success {
            Some(
                Circuit::from_actions(self.problem.start.n(), &rollout.actions)
                    .expect("rollout actions fit the problem register"),
            )
        } else {
            None
        };
        Synthesis {
            converged: rollout.success,
            batches_run,
            rollout,
            circuit,
            stats: self.stats,
            q: self.q,
            r_sta: self.r_sta,
            r_dyn: self.r_dyn,
        }
    }
}

/// Alternates training batches with greedy rollouts until one succeeds
/// or the trainer's batch budget is exhausted. An exhausted budget is
/// reported, not an error.
pub fn run_to_convergence(mut trainer: Trainer) -> Synthesis {
    let max_batches = trainer.cfg.max_batches;
    let mut batches_run = 0u32;
    let mut rollout = None;
    while batches_run < max_batches {
        trainer.run_batch();
        batches_run += 1;
        let attempt = trainer.rollout();
        let success = attempt.success;
        rollout = Some(attempt);
        if success {
            break;
        }
    }
    let rollout = rollout.expect("max_batches is validated to be at least 1");
    trainer.finish(batches_run, rollout)
}

/// Full synthesis: build the static reward, then train to convergence.
pub fn synthesize(problem: &Problem, cfg: &TrainConfig) -> Result<Synthesis, TrainError> {
    Ok(run_to_convergence(Trainer::new(problem.clone(), cfg.clone())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::GateKind;
    use crate::sweet::PhaseGrid;

    fn key(bytes: &[u8]) -> StateKey {
        StateKey::from_bytes(bytes.to_vec())
    }

    fn one_qubit_actions() -> Vec<Action> {
        enumerate_actions(&GateSet::parse("H T TDG", 1).unwrap())
    }

    #[test]
    fn select_action_exploits_with_index_tiebreak() {
        let actions = one_qubit_actions();
        let q = SparseTable::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // All zeros: the lowest index wins.
        let a = select_action(&q, &key(&[0]), &actions, 0.0, &mut rng);
        assert_eq!(a.index, 0);

        let mut q = SparseTable::new();
        q.set(&key(&[0]), 2, 7.0);
        let a = select_action(&q, &key(&[0]), &actions, 0.0, &mut rng);
        assert_eq!(a.index, 2);
        // A negative best still loses to an absent zero.
        let mut q = SparseTable::new();
        q.set(&key(&[0]), 0, -3.0);
        let a = select_action(&q, &key(&[0]), &actions, 0.0, &mut rng);
        assert_eq!(a.index, 1);
    }

    #[test]
    fn select_action_explores_uniformly() {
        let actions = one_qubit_actions();
        let q = SparseTable::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000usize;
        let mut counts = [0u32; 3];
        for _ in 0..draws {
            let a = select_action(&q, &key(&[0]), &actions, 1.0, &mut rng);
            counts[a.index as usize] += 1;
        }
        let expected = draws as f64 / actions.len() as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 2 degrees of freedom; 13.8 is the 0.1% tail. The seed is
        // fixed, so this is a regression check, not a flaky gamble.
        assert!(chi2 < 13.8, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn q_update_follows_the_rule() {
        let mut q = SparseTable::new();
        let delta = q_update(&mut q, &key(&[0]), 0, 10_000.0, &key(&[1]), 3, 0.8, 0.5);
        assert_eq!(delta, 10_000.0);
        assert_eq!(q.get(&key(&[0]), 0), 8_000.0);

        // Zero learning rate computes δ but stores nothing.
        let mut q = SparseTable::new();
        let delta = q_update(&mut q, &key(&[0]), 0, 5.0, &key(&[1]), 3, 0.0, 0.5);
        assert_eq!(delta, 5.0);
        assert_eq!(q.len(), 0);

        // Full learning rate and no lookahead copies the reward.
        let mut q = SparseTable::new();
        q.set(&key(&[0]), 0, 123.0);
        q_update(&mut q, &key(&[0]), 0, -7.5, &key(&[1]), 3, 1.0, 0.0);
        assert_eq!(q.get(&key(&[0]), 0), -7.5);
    }

    #[test]
    fn q_update_bootstraps_from_the_next_state() {
        let mut q = SparseTable::new();
        q.set(&key(&[1]), 2, 100.0);
        q.set(&key(&[1]), 0, -50.0);
        let delta = q_update(&mut q, &key(&[0]), 1, 0.0, &key(&[1]), 3, 0.5, 0.5);
        assert_eq!(delta, 50.0);
        assert_eq!(q.get(&key(&[0]), 1), 25.0);
    }

    #[test]
    fn q_update_removes_entries_that_land_on_zero() {
        let mut q = SparseTable::new();
        q.set(&key(&[0]), 0, 4.0);
        // δ = −4 + 0 − 4 = −8; half of that cancels the entry exactly.
        q_update(&mut q, &key(&[0]), 0, -4.0, &key(&[1]), 3, 0.5, 0.0);
        assert_eq!(q.len(), 0);
    }

    #[test]
    fn bellman_window_evicts_old_steps() {
        let mut stats = TrainStats::new(3);
        assert_eq!(stats.mean_bellman_error(), 0.0);
        stats.record(10.0);
        stats.record(-10.0);
        assert_eq!(stats.mean_bellman_error(), 10.0);
        stats.record(1.0);
        stats.record(1.0);
        assert_eq!(stats.steps, 4);
        assert_eq!(stats.mean_bellman_error(), 4.0);
    }

    fn toy_problem() -> Problem {
        let grid = PhaseGrid::new(3);
        Problem {
            start: SweetState::basis_state(0, 1, grid).unwrap(),
            target: SweetState::uniform_superposition(1, grid).unwrap(),
            set: GateSet::parse("H T TDG", 1).unwrap(),
        }
    }

    fn toy_config() -> TrainConfig {
        TrainConfig {
            episodes_per_batch: 1_000,
            max_batches: 1,
            rollout_cap: 10,
            static_reward: StaticRewardConfig {
                r_max: 10_000.0,
                k_max: 1,
            },
            ..TrainConfig::default()
        }
    }

    #[test]
    fn episodes_run_to_full_length() {
        let mut trainer = Trainer::new(toy_problem(), toy_config()).unwrap();
        trainer.run_episode();
        assert_eq!(trainer.stats().steps, 50);
        assert_eq!(trainer.stats().episodes, 1);
        trainer.run_episode();
        assert_eq!(trainer.stats().steps, 100);
    }

    #[test]
    fn toy_problem_converges_to_one_gate() {
        let synth = synthesize(&toy_problem(), &toy_config()).unwrap();
        assert!(synth.converged);
        assert_eq!(synth.batches_run, 1);
        let rollout = &synth.rollout;
        assert!(rollout.success);
        assert_eq!(rollout.actions.len(), 1);
        assert_eq!(rollout.actions[0].kind, GateKind::H);
        let circuit = synth.circuit.expect("converged runs carry a circuit");
        assert_eq!(circuit.metrics().gate_count, 1);
        // Sparsity: every Q entry traces back to some update.
        assert!(synth.q.len() as u64 <= synth.stats.steps);
        assert_eq!(synth.stats.q_entries, synth.q.len());
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let problem = toy_problem();
        let mut cfg = toy_config();
        cfg.episodes_per_batch = 50;
        let a = synthesize(&problem, &cfg).unwrap();
        let b = synthesize(&problem, &cfg).unwrap();
        let bits = |t: &SparseTable| {
            t.sorted_entries()
                .into_iter()
                .map(|(k, a, v)| (k, a, v.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a.q), bits(&b.q));
        assert_eq!(bits(&a.r_dyn), bits(&b.r_dyn));
        assert_eq!(a.rollout.actions, b.rollout.actions);

        cfg.seed = 99;
        let c = synthesize(&problem, &cfg).unwrap();
        assert_ne!(bits(&a.q), bits(&c.q));
    }

    #[test]
    fn rollout_with_empty_table_loops_on_action_zero() {
        // CZ fixes |00>, so the only action loops in place until the cap.
        let grid = PhaseGrid::new(1);
        let start = SweetState::basis_state(0, 2, grid).unwrap();
        let target = SweetState::basis_state(3, 2, grid).unwrap();
        let actions = enumerate_actions(&GateSet::parse("CZ", 2).unwrap());
        let q = SparseTable::new();
        let result = greedy_rollout(&q, &start, &target, &actions, 6);
        assert!(!result.success);
        assert_eq!(result.steps, 6);
        assert!(result.actions.iter().all(|a| a.index == 0));
        assert_eq!(result.final_state, start);
    }

    #[test]
    fn rollout_from_the_target_is_an_empty_success() {
        let problem = toy_problem();
        let actions = enumerate_actions(&problem.set);
        let q = SparseTable::new();
        let result = greedy_rollout(&q, &problem.target, &problem.target, &actions, 6);
        assert!(result.success);
        assert_eq!(result.steps, 0);
        assert!(result.actions.is_empty());
    }

    #[test]
    fn unreachable_target_exhausts_the_budget() {
        let grid = PhaseGrid::new(1);
        let problem = Problem {
            start: SweetState::basis_state(0, 2, grid).unwrap(),
            // CZ fixes |00>, so |11> is unreachable from it.
            target: SweetState::basis_state(3, 2, grid).unwrap(),
            set: GateSet::parse("CZ", 2).unwrap(),
        };
        let cfg = TrainConfig {
            episodes_per_batch: 20,
            episode_length: 5,
            max_batches: 2,
            rollout_cap: 5,
            ..TrainConfig::default()
        };
        let synth = synthesize(&problem, &cfg).unwrap();
        assert!(!synth.converged);
        assert_eq!(synth.batches_run, 2);
        assert!(synth.circuit.is_none());
        assert!(!synth.rollout.success);
        // Every step was a no-op on the single available action.
        assert!(synth.r_dyn.get(&problem.start.key(), 0) < 0.0);
    }

    #[test]
    fn config_validation_rejects_bad_ranges() {
        let bad = TrainConfig {
            epsilon: 1.5,
            ..TrainConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(TrainError::InvalidConfig { .. })
        ));
        let bad = TrainConfig {
            episode_length: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(TrainError::InvalidConfig { .. })
        ));
        let bad = TrainConfig {
            rollout_cap: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(TrainError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn problem_validation_rejects_mismatches() {
        let grid = PhaseGrid::new(3);
        let problem = Problem {
            start: SweetState::basis_state(0, 1, grid).unwrap(),
            target: SweetState::basis_state(0, 1, PhaseGrid::new(2)).unwrap(),
            set: GateSet::parse("H", 1).unwrap(),
        };
        assert!(matches!(
            problem.validate(),
            Err(TrainError::MismatchedProblem { .. })
        ));
        let problem = Problem {
            start: SweetState::basis_state(0, 2, grid).unwrap(),
            target: SweetState::basis_state(0, 2, grid).unwrap(),
            set: GateSet::parse("H", 1).unwrap(),
        };
        assert!(matches!(
            problem.validate(),
            Err(TrainError::MismatchedProblem { .. })
        ));
    }
}
