//! Shared helpers for integration tests.
//!
//! `brute_force_static_reward` is a deliberately naive reference for the
//! static reward builder. It expands every backward path from the target
//! level by level, deduplicating only within a level, and keeps the
//! shortest depth found per (state, first action) pair; values follow
//! from the depth alone. It shares no code with the production builder
//! beyond the state and action primitives.

use std::collections::BTreeMap;

use sweetq::action::{enumerate_actions, inverse_action, GateSet};
use sweetq::sweet::SweetState;

pub type TripletMap = BTreeMap<(Vec<u8>, u32), f64>;

pub fn brute_force_static_reward(
    target: &SweetState,
    set: &GateSet,
    r_max: f64,
    k_max: u32,
) -> TripletMap {
    let actions = enumerate_actions(set);
    let mut shortest: BTreeMap<(Vec<u8>, u32), u32> = BTreeMap::new();
    let mut frontier = vec![target.clone()];
    for depth in 0..k_max {
        let mut next = Vec::new();
        for state in &frontier {
            for action in &actions {
                let inv = inverse_action(action);
                let prev = state
                    .apply(inv.kind, &inv.qubits)
                    .expect("enumerated actions apply")
                    .state;
                if prev == *state {
                    continue;
                }
                let forward = prev
                    .apply(action.kind, &action.qubits)
                    .expect("enumerated actions apply")
                    .state;
                if forward != *state {
                    continue;
                }
                let key = (prev.key().as_bytes().to_vec(), action.index);
                let entry = shortest.entry(key).or_insert(depth);
                if *entry > depth {
                    *entry = depth;
                }
                next.push(prev);
            }
        }
        next.sort_unstable_by(|a, b| a.slots().cmp(b.slots()));
        next.dedup();
        frontier = next;
    }
    shortest
        .into_iter()
        .map(|(key, depth)| (key, r_max / (1u64 << depth) as f64))
        .collect()
}
