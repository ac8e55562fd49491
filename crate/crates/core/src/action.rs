//! Gate vocabulary and the deterministic action catalogue.
//!
//! An action is a gate kind bound to concrete qubit operands. The catalogue
//! enumerated by [`enumerate_actions`] is what the learner indexes its
//! tables by, so its order is part of the on-disk contract: gate kinds in
//! the order the set lists them, operand tuples in lexicographic order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Gate kinds understood by the synthesizer.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    T,
    Tdg,
    Cnot,
    Cz,
}

impl GateKind {
    /// Number of qubit operands the gate takes.
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::T | GateKind::Tdg => 1,
            GateKind::Cnot | GateKind::Cz => 2,
        }
    }

    /// True when the operand order is irrelevant. CZ acts on a pair
    /// symmetrically, so `(i, j)` and `(j, i)` denote one action.
    pub fn symmetric(self) -> bool {
        matches!(self, GateKind::Cz)
    }

    /// Kind realising the inverse unitary.
    pub fn inverse(self) -> Self {
        match self {
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            other => other,
        }
    }

    /// Smallest phase-grid size on which the gate's phase arithmetic is
    /// representable: T rotates by an eighth of a turn, CZ by half a turn.
    pub fn min_grid(self) -> u32 {
        match self {
            GateKind::T | GateKind::Tdg => 8,
            GateKind::Cz => 2,
            GateKind::H | GateKind::Cnot => 1,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for GateKind {
    type Err = ActionError;

    fn from_str(s: &str) -> Result<Self, ActionError> {
        match s {
            "H" => Ok(GateKind::H),
            "T" => Ok(GateKind::T),
            "TDG" => Ok(GateKind::Tdg),
            "CNOT" => Ok(GateKind::Cnot),
            "CZ" => Ok(GateKind::Cz),
            other => Err(ActionError::UnknownGate(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("unknown gate token `{0}`")]
    UnknownGate(String),
    #[error("gate {0} listed twice in the gate set")]
    DuplicateGate(GateKind),
    #[error("gate set is empty")]
    EmptyGateSet,
    #[error("gate {gate} takes {arity} operands but the register has {n} qubits")]
    TooFewQubits {
        gate: GateKind,
        arity: usize,
        n: usize,
    },
}

/// A gate kind bound to operand qubits, addressable by its position in the
/// enumerated catalogue.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Position in the catalogue this action was enumerated from.
    pub index: u32,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// An ordered, duplicate-free list of gate kinds over a register of `n`
/// qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSet {
    kinds: Vec<GateKind>,
    n: usize,
}

impl GateSet {
    pub fn new(kinds: Vec<GateKind>, n: usize) -> Result<Self, ActionError> {
        if kinds.is_empty() {
            return Err(ActionError::EmptyGateSet);
        }
        for (i, kind) in kinds.iter().enumerate() {
            if kinds[..i].contains(kind) {
                return Err(ActionError::DuplicateGate(*kind));
            }
            if kind.arity() > n {
                return Err(ActionError::TooFewQubits {
                    gate: *kind,
                    arity: kind.arity(),
                    n,
                });
            }
        }
        Ok(GateSet { kinds, n })
    }

    /// Parses a whitespace-separated token list such as `"H T TDG CNOT"`.
    pub fn parse(tokens: &str, n: usize) -> Result<Self, ActionError> {
        let kinds = tokens
            .split_whitespace()
            .map(GateKind::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        GateSet::new(kinds, n)
    }

    pub fn kinds(&self) -> &[GateKind] {
        &self.kinds
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Smallest phase-grid size every gate in the set can act on.
    pub fn min_grid(&self) -> u32 {
        self.kinds.iter().map(|k| k.min_grid()).max().unwrap_or(1)
    }
}

/// Enumerates the full action catalogue for a gate set.
///
/// Kinds appear in the order the set lists them; within a kind, operand
/// tuples are lexicographic. Symmetric gates contribute each unordered pair
/// once, asymmetric two-qubit gates every ordered pair.
pub fn enumerate_actions(set: &GateSet) -> Vec<Action> {
    let n = set.n;
    let mut actions = Vec::new();
    for &kind in &set.kinds {
        match kind.arity() {
            1 => {
                for q in 0..n {
                    push(&mut actions, kind, vec![q]);
                }
            }
            2 if kind.symmetric() => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        push(&mut actions, kind, vec![i, j]);
                    }
                }
            }
            2 => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            push(&mut actions, kind, vec![i, j]);
                        }
                    }
                }
            }
            _ => unreachable!("gate arity is 1 or 2"),
        }
    }
    actions
}

fn push(actions: &mut Vec<Action>, kind: GateKind, qubits: Vec<usize>) {
    let index = actions.len() as u32;
    actions.push(Action {
        kind,
        qubits,
        index,
    });
}

/// The action realising the inverse unitary of `action`.
///
/// Operands and `index` are preserved; the index keeps naming the forward
/// action, which is what reward construction records when it walks gates
/// backwards. The returned action's kind need not belong to the configured
/// gate set (T's inverse is TDG whether or not TDG was enumerated).
pub fn inverse_action(action: &Action) -> Action {
    Action {
        kind: action.kind.inverse(),
        qubits: action.qubits.clone(),
        index: action.index,
    }
}
