//! Quantum circuit synthesis by tabular Q-learning over SWEET states.
//!
//! A SWEET state is a superposition in which every term carries the same
//! magnitude and a phase drawn from a fixed grid of `2^p` roots of unity.
//! Closing a gate vocabulary over such states (projecting back onto the
//! class when a Hadamard breaks equal magnitudes) turns circuit synthesis
//! into a discrete search problem: states are finite bit patterns, actions
//! are gate placements, and a sparse Q-table ranks them.
//!
//! The crate is organised around that loop:
//!
//! * [`sweet`] — the state representation and exact gate semantics;
//! * [`action`] — gate kinds and deterministic action enumeration;
//! * [`reward`] — the precomputed static reward and dynamic penalties;
//! * [`qlearn`] — the training loop, greedy rollout and synthesis driver;
//! * [`circuit`] — circuit metrics, text format and a dense simulator;
//! * [`graph`] — graph-state targets and edge-colouring depth bounds;
//! * [`store`] — snapshot persistence and CSV export for the tables.

pub mod action;
pub mod circuit;
pub mod graph;
pub mod qlearn;
pub mod reward;
pub mod store;
pub mod sweet;

pub use num_complex::Complex64;

pub use action::{enumerate_actions, inverse_action, Action, GateKind, GateSet};
pub use circuit::{simulate_full, Circuit, CircuitMetrics, Gate};
pub use graph::{graph_state_target, vizing_depth_bound, Graph};
pub use qlearn::{greedy_rollout, run_to_convergence, synthesize, Problem, Synthesis, Trainer, TrainConfig};
pub use reward::{build_static_reward, PenaltyConfig, SparseTable, StaticRewardConfig};
pub use sweet::{is_class_representative, state_space_size, PhaseGrid, StateKey, SweetState};
