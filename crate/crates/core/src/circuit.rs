//! Circuits, their metrics, a plain-text format and a dense simulator.
//!
//! The simulator tracks the full complex state vector and exists to check
//! the SWEET semantics against ground truth: it is exact up to floating
//! point and does not know about phase grids or class projection.

use num_complex::Complex64;
use thiserror::Error;

use crate::action::{Action, GateKind};

/// Largest register [`simulate_full`] accepts; the vector has `2^n`
/// amplitudes.
pub const SIM_QUBIT_CAP: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {qubit} repeated in operand list")]
    DuplicateQubit { qubit: usize },
    #[error("simulating {n} qubits exceeds the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("state vector length {len} is not a power of two")]
    BadVectorLength { len: usize },
    #[error("malformed circuit line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
}

/// One gate application inside a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    fn validate(&self, n: usize) -> Result<(), CircuitError> {
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n });
            }
            if self.qubits[..i].contains(&q) {
                return Err(CircuitError::DuplicateQubit { qubit: q });
            }
        }
        Ok(())
    }
}

impl From<&Action> for Gate {
    fn from(action: &Action) -> Self {
        Gate {
            kind: action.kind,
            qubits: action.qubits.clone(),
        }
    }
}

/// An ordered gate list over a register of `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

/// Size and shape counters for a circuit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CircuitMetrics {
    pub gate_count: usize,
    /// T plus T† applications.
    pub t_count: usize,
    /// CNOT plus CZ applications.
    pub entangling_count: usize,
    /// Layers under as-soon-as-possible scheduling that preserves gate
    /// order; two gates conflict when they share a qubit.
    pub depth: usize,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        for gate in &gates {
            gate.validate(n)?;
        }
        Ok(Circuit { n, gates })
    }

    pub fn from_actions(n: usize, actions: &[Action]) -> Result<Self, CircuitError> {
        Circuit::new(n, actions.iter().map(Gate::from).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn metrics(&self) -> CircuitMetrics {
        let mut t_count = 0;
        let mut entangling_count = 0;
        let mut last_layer = vec![0usize; self.n];
        let mut depth = 0;
        for gate in &self.gates {
            match gate.kind {
                GateKind::T | GateKind::Tdg => t_count += 1,
                GateKind::Cnot | GateKind::Cz => entangling_count += 1,
                GateKind::H => {}
            }
            let layer = 1 + gate
                .qubits
                .iter()
                .map(|&q| last_layer[q])
                .max()
                .unwrap_or(0);
            for &q in &gate.qubits {
                last_layer[q] = layer;
            }
            depth = depth.max(layer);
        }
        CircuitMetrics {
            gate_count: self.gates.len(),
            t_count,
            entangling_count,
            depth,
        }
    }

    /// Text form: one gate per line, token followed by operand indices.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            out.push_str(gate.kind.token());
            for q in &gate.qubits {
                out.push(' ');
                out.push_str(&q.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form. The register size is taken as one past the
    /// highest operand index. CZ operands are normalised to ascending
    /// order, matching how CZ actions are enumerated.
    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let mut gates = Vec::new();
        let mut n = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("line is nonempty");
            let kind: GateKind = token.parse().map_err(|_| CircuitError::MalformedLine {
                line: lineno,
                reason: format!("unknown gate token `{token}`"),
            })?;
            let qubits = parts
                .map(|t| {
                    t.parse::<usize>().map_err(|_| CircuitError::MalformedLine {
                        line: lineno,
                        reason: format!("bad qubit index `{t}`"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if qubits.len() != kind.arity() {
                return Err(CircuitError::MalformedLine {
                    line: lineno,
                    reason: format!(
                        "{kind} takes {} operands, got {}",
                        kind.arity(),
                        qubits.len()
                    ),
                });
            }
            let mut qubits = qubits;
            if kind.symmetric() {
                qubits.sort_unstable();
            }
            if qubits.len() == 2 && qubits[0] == qubits[1] {
                return Err(CircuitError::MalformedLine {
                    line: lineno,
                    reason: "operands repeat a qubit".to_string(),
                });
            }
            for &q in &qubits {
                n = n.max(q + 1);
            }
            gates.push(Gate { kind, qubits });
        }
        Ok(Circuit { n: n.max(1), gates })
    }
}

/// Runs a circuit on a dense state vector and returns the final vector.
///
/// `initial` must have power-of-two length `2^n` with `n` at most
/// [`SIM_QUBIT_CAP`]; qubit 0 addresses the most significant bit of the
/// amplitude index.
pub fn simulate_full(
    circuit: &Circuit,
    initial: &[Complex64],
) -> Result<Vec<Complex64>, CircuitError> {
    simulate_full_with_cap(circuit, initial, SIM_QUBIT_CAP)
}

pub fn simulate_full_with_cap(
    circuit: &Circuit,
    initial: &[Complex64],
    cap: usize,
) -> Result<Vec<Complex64>, CircuitError> {
    let len = initial.len();
    if !len.is_power_of_two() {
        return Err(CircuitError::BadVectorLength { len });
    }
    let n = len.trailing_zeros() as usize;
    if n > cap {
        return Err(CircuitError::CapExceeded { n, cap });
    }
    for gate in &circuit.gates {
        gate.validate(n)?;
    }

    let mut amps = initial.to_vec();
    let bit = |q: usize| 1usize << (n - 1 - q);
    for gate in &circuit.gates {
        match gate.kind {
            GateKind::H => {
                let b = bit(gate.qubits[0]);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..len {
                    if i & b == 0 {
                        let (a0, a1) = (amps[i], amps[i | b]);
                        amps[i] = s * (a0 + a1);
                        amps[i | b] = s * (a0 - a1);
                    }
                }
            }
            GateKind::T | GateKind::Tdg => {
                let b = bit(gate.qubits[0]);
                let angle = if gate.kind == GateKind::T {
                    std::f64::consts::FRAC_PI_4
                } else {
                    -std::f64::consts::FRAC_PI_4
                };
                let phase = Complex64::from_polar(1.0, angle);
                for (i, amp) in amps.iter_mut().enumerate() {
                    if i & b != 0 {
                        *amp *= phase;
                    }
                }
            }
            GateKind::Cnot => {
                let (bc, bt) = (bit(gate.qubits[0]), bit(gate.qubits[1]));
                for i in 0..len {
                    if i & bc != 0 && i & bt == 0 {
                        amps.swap(i, i | bt);
                    }
                }
            }
            GateKind::Cz => {
                let (bi, bj) = (bit(gate.qubits[0]), bit(gate.qubits[1]));
                for (i, amp) in amps.iter_mut().enumerate() {
                    if i & bi != 0 && i & bj != 0 {
                        *amp = -*amp;
                    }
                }
            }
        }
    }
    Ok(amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gate(kind: GateKind, qubits: &[usize]) -> Gate {
        Gate {
            kind,
            qubits: qubits.to_vec(),
        }
    }

    fn basis(n: usize, x: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
        v[x] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn metrics_count_gates_by_kind() {
        let c = Circuit::new(
            3,
            vec![
                gate(GateKind::H, &[0]),
                gate(GateKind::T, &[1]),
                gate(GateKind::Tdg, &[1]),
                gate(GateKind::Cnot, &[0, 1]),
                gate(GateKind::Cz, &[1, 2]),
            ],
        )
        .unwrap();
        let m = c.metrics();
        assert_eq!(m.gate_count, 5);
        assert_eq!(m.t_count, 2);
        assert_eq!(m.entangling_count, 2);
    }

    #[test]
    fn depth_packs_disjoint_gates_into_one_layer() {
        // H 0 and H 1 share no qubit: depth 1. The CNOT touches both: 2.
        let c = Circuit::new(
            2,
            vec![
                gate(GateKind::H, &[0]),
                gate(GateKind::H, &[1]),
                gate(GateKind::Cnot, &[0, 1]),
            ],
        )
        .unwrap();
        assert_eq!(c.metrics().depth, 2);
    }

    #[test]
    fn depth_respects_gate_order() {
        // Four CZs on a square: opposite edges pack, adjacent serialise.
        let parallel = Circuit::new(
            4,
            vec![
                gate(GateKind::Cz, &[0, 1]),
                gate(GateKind::Cz, &[2, 3]),
                gate(GateKind::Cz, &[1, 2]),
                gate(GateKind::Cz, &[0, 3]),
            ],
        )
        .unwrap();
        assert_eq!(parallel.metrics().depth, 2);
        let serial = Circuit::new(
            4,
            vec![
                gate(GateKind::Cz, &[0, 1]),
                gate(GateKind::Cz, &[1, 2]),
                gate(GateKind::Cz, &[2, 3]),
                gate(GateKind::Cz, &[0, 3]),
            ],
        )
        .unwrap();
        assert_eq!(serial.metrics().depth, 4);
    }

    #[test]
    fn empty_circuit_has_zero_metrics() {
        let c = Circuit::new(2, vec![]).unwrap();
        let m = c.metrics();
        assert_eq!(m.gate_count, 0);
        assert_eq!(m.depth, 0);
    }

    #[test]
    fn simulator_applies_h() {
        let c = Circuit::new(1, vec![gate(GateKind::H, &[0])]).unwrap();
        let out = simulate_full(&c, &basis(1, 0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - s).norm() < 1e-12);
        assert!((out[1] - s).norm() < 1e-12);
    }

    #[test]
    fn simulator_conventions_qubit_zero_is_msb() {
        // CNOT(0, 1) on |10>: control is qubit 0 = high bit, so it fires.
        let c = Circuit::new(2, vec![gate(GateKind::Cnot, &[0, 1])]).unwrap();
        let out = simulate_full(&c, &basis(2, 0b10)).unwrap();
        assert!((out[0b11] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn simulator_t_and_cz_phases() {
        let c = Circuit::new(1, vec![gate(GateKind::T, &[0])]).unwrap();
        let out = simulate_full(&c, &basis(1, 1)).unwrap();
        let expect = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!((out[1] - expect).norm() < 1e-12);

        let c = Circuit::new(2, vec![gate(GateKind::Cz, &[0, 1])]).unwrap();
        let out = simulate_full(&c, &basis(2, 0b11)).unwrap();
        assert!((out[0b11] + 1.0).norm() < 1e-12);
    }

    #[test]
    fn simulator_preserves_norm() {
        let c = Circuit::new(
            3,
            vec![
                gate(GateKind::H, &[0]),
                gate(GateKind::Cnot, &[0, 2]),
                gate(GateKind::T, &[2]),
                gate(GateKind::Cz, &[1, 2]),
                gate(GateKind::H, &[2]),
            ],
        )
        .unwrap();
        let out = simulate_full(&c, &basis(3, 0b101)).unwrap();
        let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simulator_enforces_cap_and_shape() {
        let c = Circuit::new(1, vec![]).unwrap();
        assert_eq!(
            simulate_full(&c, &vec![Complex64::new(0.0, 0.0); 3]),
            Err(CircuitError::BadVectorLength { len: 3 })
        );
        let big = vec![Complex64::new(0.0, 0.0); 1 << 13];
        assert_eq!(
            simulate_full(&c, &big),
            Err(CircuitError::CapExceeded { n: 13, cap: 12 })
        );
    }

    #[test]
    fn text_round_trips() {
        let c = Circuit::new(
            3,
            vec![
                gate(GateKind::H, &[1]),
                gate(GateKind::Cnot, &[1, 2]),
                gate(GateKind::Cz, &[0, 2]),
                gate(GateKind::Tdg, &[0]),
            ],
        )
        .unwrap();
        let text = c.to_text();
        assert_eq!(text, "H 1\nCNOT 1 2\nCZ 0 2\nTDG 0\n");
        let parsed = Circuit::parse(&text).unwrap();
        assert_eq!(parsed.gates(), c.gates());
    }

    #[test]
    fn parse_normalises_cz_operands() {
        let c = Circuit::parse("CZ 2 1\n").unwrap();
        assert_eq!(c.gates(), &[gate(GateKind::Cz, &[1, 2])]);
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(matches!(
            Circuit::parse("H 0\nNOPE 1\n"),
            Err(CircuitError::MalformedLine { line: 2, .. })
        ));
        assert!(matches!(
            Circuit::parse("CNOT 0\n"),
            Err(CircuitError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            Circuit::parse("CNOT 1 1\n"),
            Err(CircuitError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            Circuit::parse("H x\n"),
            Err(CircuitError::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn circuit_validates_operands() {
        assert_eq!(
            Circuit::new(2, vec![gate(GateKind::H, &[2])]),
            Err(CircuitError::QubitOutOfRange { qubit: 2, n: 2 })
        );
        assert_eq!(
            Circuit::new(2, vec![gate(GateKind::Cz, &[1, 1])]),
            Err(CircuitError::DuplicateQubit { qubit: 1 })
        );
    }
}
