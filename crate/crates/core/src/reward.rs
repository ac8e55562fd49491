//! Reward tables: a precomputed static layer and accumulating penalties.
//!
//! The static table is built once per target by walking gate inverses
//! outward from it. A pair `(s, a)` whose shortest path to the target
//! starts with `a` and takes `k + 1` steps earns `r_max / 2^k`, for
//! `k` below the configured horizon; everything else reads zero. The
//! table is a breadcrumb trail: training only has to random-walk into
//! its support, after which bootstrapping can propagate value.
//!
//! Dynamic penalties are charged during training for no-op moves,
//! revisits that earn no static reward, and qubit congestion. They
//! accumulate in a second table that persists across episodes and
//! batches, so repeat offences sink ever lower; the total reward of a
//! pair is the sum of its static and accumulated dynamic entries.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::action::{enumerate_actions, inverse_action, Action, GateKind, GateSet};
use crate::sweet::{StateKey, SweetState};

/// Sparse map from (state key, action index) to a value.
///
/// Absent entries read as zero and an update that lands exactly on zero
/// removes the entry, so the table never stores explicit zeros.
#[derive(Clone, Debug, Default)]
pub struct SparseTable {
    rows: HashMap<StateKey, Vec<(u32, f64)>>,
    entries: usize,
}

impl SparseTable {
    pub fn new() -> Self {
        SparseTable::default()
    }

    /// Number of stored (state, action) entries.
    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    pub fn get(&self, key: &StateKey, action: u32) -> f64 {
        self.rows
            .get(key)
            .and_then(|row| row.iter().find(|&&(a, _)| a == action))
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn set(&mut self, key: &StateKey, action: u32, value: f64) {
        match self.rows.get_mut(key) {
            None => {
                if value != 0.0 {
                    self.rows.insert(key.clone(), vec![(action, value)]);
                    self.entries += 1;
                }
            }
            Some(row) => {
                match row.iter_mut().find(|&&mut (a, _)| a == action) {
                    Some(slot) => {
                        if value != 0.0 {
                            slot.1 = value;
                        } else {
                            row.retain(|&(a, _)| a != action);
                            self.entries -= 1;
                            if row.is_empty() {
                                self.rows.remove(key);
                            }
                        }
                    }
                    None => {
                        if value != 0.0 {
                            row.push((action, value));
                            self.entries += 1;
                        }
                    }
                }
            }
        }
    }

    /// Adds `delta` to an entry and returns the new value.
    pub fn add(&mut self, key: &StateKey, action: u32, delta: f64) -> f64 {
        let value = self.get(key, action) + delta;
        self.set(key, action, value);
        value
    }

    /// Raises an entry to `value` when that is an increase; the static
    /// sweep uses this to keep the best (shallowest) assignment.
    pub fn raise(&mut self, key: &StateKey, action: u32, value: f64) {
        if value > self.get(key, action) {
            self.set(key, action, value);
        }
    }

    /// Largest value across `n_actions` action slots, absent slots
    /// reading zero.
    pub fn max_over_actions(&self, key: &StateKey, n_actions: u32) -> f64 {
        match self.rows.get(key) {
            None => 0.0,
            Some(row) => {
                let mut best = f64::NEG_INFINITY;
                let mut stored = 0u32;
                for &(a, v) in row {
                    if a < n_actions {
                        stored += 1;
                        if v > best {
                            best = v;
                        }
                    }
                }
                if stored < n_actions && best < 0.0 {
                    0.0
                } else {
                    best
                }
            }
        }
    }

    /// Stored entries for one state, in no particular order.
    pub fn row(&self, key: &StateKey) -> &[(u32, f64)] {
        self.rows.get(key).map_or(&[], |row| row.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, u32, f64)> + '_ {
        self.rows
            .iter()
            .flat_map(|(key, row)| row.iter().map(move |&(a, v)| (key, a, v)))
    }

    /// All entries sorted by (key, action); the canonical order for
    /// persistence and export.
    pub fn sorted_entries(&self) -> Vec<(StateKey, u32, f64)> {
        let mut entries: Vec<(StateKey, u32, f64)> = self
            .iter()
            .map(|(key, a, v)| (key.clone(), a, v))
            .collect();
        entries.sort_unstable_by(|x, y| (&x.0, x.1).cmp(&(&y.0, y.1)));
        entries
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RewardError {
    #[error("invalid reward configuration: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("{gate} needs a phase grid of at least {needed} but the target uses {got}")]
    GridMismatch {
        gate: GateKind,
        needed: u32,
        got: u32,
    },
    #[error("gate set is over {set_n} qubits but the target has {state_n}")]
    RegisterMismatch { set_n: usize, state_n: usize },
}

/// Shape of the static reward layer.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StaticRewardConfig {
    /// Reward of a pair one step from the target; deeper strata halve it.
    pub r_max: f64,
    /// Number of strata swept outward from the target.
    pub k_max: u32,
}

impl Default for StaticRewardConfig {
    fn default() -> Self {
        StaticRewardConfig {
            r_max: 10_000.0,
            k_max: 2,
        }
    }
}

/// Builds the static reward table for a target state.
///
/// Stratum `k` walks every gate inverse from the previous stratum's
/// states. A candidate predecessor counts only if it differs from the
/// state it came from (no-op inverses at the target would otherwise earn
/// full reward) and the forward gate actually reproduces that state,
/// which class projection can break. Entries keep the largest value ever
/// assigned, and strata are swept shallow to deep, so each pair records
/// its shortest usable path.
pub fn build_static_reward(
    target: &SweetState,
    set: &GateSet,
    cfg: &StaticRewardConfig,
) -> Result<SparseTable, RewardError> {
    if !(cfg.r_max > 0.0 && cfg.r_max.is_finite()) {
        return Err(RewardError::InvalidConfig {
            reason: "r_max must be positive and finite",
        });
    }
    if cfg.k_max < 1 || cfg.k_max > 32 {
        return Err(RewardError::InvalidConfig {
            reason: "k_max must lie in 1..=32",
        });
    }
    if set.n() != target.n() {
        return Err(RewardError::RegisterMismatch {
            set_n: set.n(),
            state_n: target.n(),
        });
    }
    let got = target.grid().size();
    for &kind in set.kinds() {
        if kind.min_grid() > got {
            return Err(RewardError::GridMismatch {
                gate: kind,
                needed: kind.min_grid(),
                got,
            });
        }
    }

    let actions = enumerate_actions(set);
    let mut table = SparseTable::new();
    // States already expanded in any stratum; re-expanding one can only
    // rediscover pairs at greater depth, which keep-max would discard.
    let mut expanded: HashSet<StateKey> = HashSet::new();
    expanded.insert(target.key());
    let mut frontier = vec![target.clone()];
    for k in 0..cfg.k_max {
        let value = cfg.r_max / (1u64 << k) as f64;
        let mut next = Vec::new();
        for state in &frontier {
            for action in &actions {
                let inv = inverse_action(action);
                let prev = state
                    .apply(inv.kind, &inv.qubits)
                    .expect("enumerated actions apply to in-range states")
                    .state;
                if prev == *state {
                    continue;
                }
                let forward = prev
                    .apply(action.kind, &action.qubits)
                    .expect("enumerated actions apply to in-range states")
                    .state;
                if forward != *state {
                    continue;
                }
                let key = prev.key();
                table.raise(&key, action.index, value);
                if k + 1 < cfg.k_max && !expanded.contains(&key) {
                    expanded.insert(key);
                    next.push(prev);
                }
            }
        }
        frontier = next;
    }
    Ok(table)
}

/// Which penalties are live and their sizes as fractions of `r_max`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PenaltyConfig {
    pub revisit_enabled: bool,
    pub noop_enabled: bool,
    pub congestion_enabled: bool,
    pub revisit_coeff: f64,
    pub noop_coeff: f64,
    pub congestion_coeff: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            revisit_enabled: true,
            noop_enabled: true,
            congestion_enabled: false,
            revisit_coeff: 1e-4,
            noop_coeff: 1e-3,
            congestion_coeff: 1e-4,
        }
    }
}

/// Per-episode bookkeeping the penalties consult: states seen so far,
/// per-qubit usage counters and the step index.
#[derive(Clone, Debug)]
pub struct EpisodeContext {
    visited: HashSet<StateKey>,
    counters: Vec<u32>,
    step: u32,
}

impl EpisodeContext {
    pub fn new(n: usize, start: StateKey) -> Self {
        let mut visited = HashSet::new();
        visited.insert(start);
        EpisodeContext {
            visited,
            counters: vec![0; n],
            step: 0,
        }
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    pub fn visited(&self, key: &StateKey) -> bool {
        self.visited.contains(key)
    }

    /// Records the state an executed step arrived at.
    pub fn note_arrival(&mut self, key: StateKey) {
        self.visited.insert(key);
    }

    /// Charges an executed action to its qubits and advances the step
    /// index. Call after computing this step's penalty: the congestion
    /// level of an action excludes the action itself.
    pub fn commit_action(&mut self, action: &Action) {
        for &q in &action.qubits {
            self.counters[q] += 1;
        }
        self.step += 1;
    }
}

/// Highest usage counter among the action's operand qubits.
pub fn congestion_level(ctx: &EpisodeContext, action: &Action) -> u32 {
    action
        .qubits
        .iter()
        .map(|&q| ctx.counters[q])
        .max()
        .unwrap_or(0)
}

/// Charges this step's penalties to `r_dyn` and returns the (nonpositive)
/// amount charged.
///
/// A step that does not change the state is a no-op and takes precedence
/// over the revisit case; a step onto an already-visited state is
/// penalised only when its static reward is zero, so backtracking along
/// the breadcrumb trail stays free. Congestion is independent of both: an
/// action whose busiest qubit has been used more than `t/2` times by step
/// `t` is charged.
#[allow(clippy::too_many_arguments)]
pub fn dynamic_penalty(
    ctx: &EpisodeContext,
    state: &StateKey,
    action: &Action,
    next: &StateKey,
    r_sta_value: f64,
    pcfg: &PenaltyConfig,
    r_max: f64,
    r_dyn: &mut SparseTable,
) -> f64 {
    let mut delta = 0.0;
    if next == state {
        if pcfg.noop_enabled {
            delta -= r_max * pcfg.noop_coeff;
        }
    } else if ctx.visited(next) && r_sta_value == 0.0 && pcfg.revisit_enabled {
        delta -= r_max * pcfg.revisit_coeff;
    }
    if pcfg.congestion_enabled
        && (congestion_level(ctx, action) as f64) > ctx.step() as f64 / 2.0
    {
        delta -= r_max * pcfg.congestion_coeff;
    }
    if delta != 0.0 {
        r_dyn.add(state, action.index, delta);
    }
    delta
}

/// Total reward of a pair: static layer plus accumulated penalties.
pub fn total_reward(
    r_sta: &SparseTable,
    r_dyn: &SparseTable,
    key: &StateKey,
    action: u32,
) -> f64 {
    r_sta.get(key, action) + r_dyn.get(key, action)
}
