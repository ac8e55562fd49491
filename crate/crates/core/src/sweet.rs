//! SWEET states and exact gate semantics.
//!
//! A SWEET state over `n` qubits and phase grid `M = 2^p` is a set of
//! terms, each a basis string `x` paired with a phase index `m`: the
//! represented vector is `sum_j zeta^{m_j} |x_j>` up to normalisation,
//! where `zeta = exp(2*pi*i/M)`. Every term carries the same magnitude,
//! so a state is fully described by its sorted slot list, one slot per
//! term: `slot = m * 2^n + x`. Qubit 0 is the leftmost (most significant)
//! bit of `x`.
//!
//! CZ, CNOT, T and T† permute slots and are always exact. H accumulates
//! integer coefficients of grid phases per output basis string; when the
//! survivors all carry one common magnitude and on-grid phases the result
//! is exact, otherwise the state is projected back onto the class (equal
//! magnitudes, phases snapped to the grid) and the outcome is flagged
//! inexact.
//!
//! Phase arithmetic for H happens in `Z[zeta]` reduced by the relation
//! `zeta^(M/2) = -1`, which for power-of-two `M` is the minimal polynomial
//! of `zeta`: a reduced coefficient vector is zero exactly when the
//! amplitude cancels. An inexact coefficient is always a sum of exactly
//! two unit grid phases, so its argument lies either on the grid or
//! exactly halfway between two adjacent grid angles; the snap is computed
//! in integer arithmetic, and halfway ties resolve to the smaller index.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_complex::Complex64;
use thiserror::Error;

use crate::action::{Action, GateKind};

/// Phase grid of `M = 2^p` evenly spaced unit phases.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseGrid {
    p: u32,
}

impl PhaseGrid {
    pub fn new(p: u32) -> Self {
        PhaseGrid { p }
    }

    pub fn p(self) -> u32 {
        self.p
    }

    /// Grid size `M`.
    pub fn size(self) -> u32 {
        1 << self.p
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SweetError {
    #[error("state has no terms")]
    EmptyState,
    #[error("basis string {basis:b} appears with two different phases")]
    ConflictingPhase { basis: u32 },
    #[error("term {m}:{x:b} lies outside the phase grid or register")]
    TermOutOfRange { m: u32, x: u32 },
    #[error("register of {n} qubits with {p} phase qubits is too large")]
    RegisterTooLarge { n: usize, p: u32 },
    #[error("{gate} takes {expected} operands, got {got}")]
    WrongArity {
        gate: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {qubit} repeated in operand list")]
    DuplicateQubit { qubit: usize },
    #[error("{gate} needs a phase grid of at least {needed}, got {got}")]
    PhaseGridTooCoarse {
        gate: GateKind,
        needed: u32,
        got: u32,
    },
    #[error("all terms cancelled; input was not a valid state")]
    AllTermsCancelled,
    #[error("malformed state key: {reason}")]
    MalformedKey { reason: &'static str },
    #[error("malformed state text at line {line}: {reason}")]
    MalformedText { line: usize, reason: &'static str },
}

/// Byte encoding of a state's slot list; the table key for that state.
///
/// Slots are serialised in ascending order as fixed-width big-endian
/// integers of `ceil((n + p) / 8)` bytes, so byte order equals slot order
/// and equal states produce equal keys.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<u8>);

impl StateKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        StateKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for b in &self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey({})", self.to_hex())
    }
}

/// Result of applying one gate: the successor state and whether the gate
/// acted exactly or the result was projected back onto the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApplyOutcome {
    pub state: SweetState,
    pub exact: bool,
}

/// Canonical SWEET state: a strictly ascending slot list with no basis
/// string repeated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SweetState {
    n: usize,
    grid: PhaseGrid,
    terms: Vec<u32>,
}

impl SweetState {
    /// Canonicalises a raw `(m, x)` term list: sorts by slot, drops exact
    /// duplicates, rejects conflicting phases and out-of-range terms.
    pub fn new(terms: &[(u32, u32)], n: usize, grid: PhaseGrid) -> Result<Self, SweetError> {
        check_shape(n, grid)?;
        if terms.is_empty() {
            return Err(SweetError::EmptyState);
        }
        let m_grid = grid.size();
        let mut slots = Vec::with_capacity(terms.len());
        for &(m, x) in terms {
            if m >= m_grid || x >= (1u32 << n) {
                return Err(SweetError::TermOutOfRange { m, x });
            }
            slots.push(m << n | x);
        }
        slots.sort_unstable();
        slots.dedup();
        let x_mask = (1u32 << n) - 1;
        for w in slots.windows(2) {
            if w[0] & x_mask == w[1] & x_mask {
                return Err(SweetError::ConflictingPhase {
                    basis: w[0] & x_mask,
                });
            }
        }
        Ok(SweetState { n, grid, terms: slots })
    }

    /// Single basis string with phase index 0.
    pub fn basis_state(x: u32, n: usize, grid: PhaseGrid) -> Result<Self, SweetError> {
        SweetState::new(&[(0, x)], n, grid)
    }

    /// Every basis string with phase index 0: the uniform superposition.
    pub fn uniform_superposition(n: usize, grid: PhaseGrid) -> Result<Self, SweetError> {
        check_shape(n, grid)?;
        let terms = (0u32..1 << n).collect();
        Ok(SweetState { n, grid, terms })
    }

    fn from_slots(mut slots: Vec<u32>, n: usize, grid: PhaseGrid) -> Self {
        slots.sort_unstable();
        debug_assert!(!slots.is_empty());
        SweetState { n, grid, terms: slots }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    /// Ascending slot list; `slot = m * 2^n + x`.
    pub fn slots(&self) -> &[u32] {
        &self.terms
    }

    /// Terms as `(m, x)` pairs in slot order.
    pub fn term_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let n = self.n;
        let x_mask = (1u32 << n) - 1;
        self.terms.iter().map(move |&s| (s >> n, s & x_mask))
    }

    /// Applies a gate, producing the successor state.
    ///
    /// CZ, CNOT, T and T† are slot permutations and always exact. H may
    /// project; see the module documentation. `AllTermsCancelled` is
    /// unreachable from a valid state because the underlying unitary
    /// cannot annihilate a nonzero vector.
    pub fn apply(&self, kind: GateKind, qubits: &[usize]) -> Result<ApplyOutcome, SweetError> {
        if qubits.len() != kind.arity() {
            return Err(SweetError::WrongArity {
                gate: kind,
                expected: kind.arity(),
                got: qubits.len(),
            });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n {
                return Err(SweetError::QubitOutOfRange { qubit: q, n: self.n });
            }
            if qubits[..i].contains(&q) {
                return Err(SweetError::DuplicateQubit { qubit: q });
            }
        }
        let m_grid = self.grid.size();
        if m_grid < kind.min_grid() {
            return Err(SweetError::PhaseGridTooCoarse {
                gate: kind,
                needed: kind.min_grid(),
                got: m_grid,
            });
        }

        let n = self.n;
        let bit = |q: usize| 1u32 << (n - 1 - q);
        let outcome = match kind {
            GateKind::Cz => {
                let (bi, bj) = (bit(qubits[0]), bit(qubits[1]));
                self.permute(|m, x| {
                    if x & bi != 0 && x & bj != 0 {
                        ((m + m_grid / 2) % m_grid, x)
                    } else {
                        (m, x)
                    }
                })
            }
            GateKind::Cnot => {
                let (bc, bt) = (bit(qubits[0]), bit(qubits[1]));
                self.permute(|m, x| if x & bc != 0 { (m, x ^ bt) } else { (m, x) })
            }
            GateKind::T => {
                let bq = bit(qubits[0]);
                let step = m_grid / 8;
                self.permute(|m, x| {
                    if x & bq != 0 {
                        ((m + step) % m_grid, x)
                    } else {
                        (m, x)
                    }
                })
            }
            GateKind::Tdg => {
                let bq = bit(qubits[0]);
                let step = m_grid - m_grid / 8;
                self.permute(|m, x| {
                    if x & bq != 0 {
                        ((m + step) % m_grid, x)
                    } else {
                        (m, x)
                    }
                })
            }
            GateKind::H => self.apply_h(qubits[0])?,
        };
        debug_assert!(outcome.state.is_canonical());
        Ok(outcome)
    }

    /// Applies an enumerated action; semantics depend only on its kind
    /// and operands.
    pub fn apply_action(&self, action: &Action) -> Result<ApplyOutcome, SweetError> {
        self.apply(action.kind, &action.qubits)
    }

    fn permute(&self, f: impl Fn(u32, u32) -> (u32, u32)) -> ApplyOutcome {
        let n = self.n;
        let x_mask = (1u32 << n) - 1;
        let slots = self
            .terms
            .iter()
            .map(|&s| {
                let (m, x) = f(s >> n, s & x_mask);
                m << n | x
            })
            .collect();
        ApplyOutcome {
            state: SweetState::from_slots(slots, n, self.grid),
            exact: true,
        }
    }

    fn apply_h(&self, q: usize) -> Result<ApplyOutcome, SweetError> {
        let n = self.n;
        let m_grid = self.grid.size();
        let half = (m_grid / 2).max(1) as usize;
        let bit = 1u32 << (n - 1 - q);
        let x_mask = (1u32 << n) - 1;

        // Reduced coefficient vector per output basis string. Folding uses
        // zeta^(M/2) = -1, so an index at or past M/2 flips sign instead.
        let mut coeffs: HashMap<u32, Vec<i32>> = HashMap::new();
        let fold = |coeffs: &mut HashMap<u32, Vec<i32>>, x: u32, m: u32, sign: i32| {
            let v = coeffs.entry(x).or_insert_with(|| vec![0; half]);
            if m_grid == 1 {
                v[0] += sign;
            } else if m < m_grid / 2 {
                v[m as usize] += sign;
            } else {
                v[(m - m_grid / 2) as usize] -= sign;
            }
        };
        for &slot in &self.terms {
            let (m, x) = (slot >> n, slot & x_mask);
            let (x0, x1) = (x & !bit, x | bit);
            if x & bit == 0 {
                fold(&mut coeffs, x0, m, 1);
                fold(&mut coeffs, x1, m, 1);
            } else {
                fold(&mut coeffs, x0, m, 1);
                fold(&mut coeffs, x1, m, -1);
            }
        }

        let mut slots = Vec::with_capacity(coeffs.len());
        let mut all_on_grid = true;
        let mut common_magnitude: Option<i32> = None;
        let mut magnitudes_agree = true;
        for (&x, v) in &coeffs {
            let nonzero: Vec<usize> = (0..half).filter(|&i| v[i] != 0).collect();
            match nonzero.len() {
                0 => continue,
                1 => {
                    let i = nonzero[0];
                    let c = v[i];
                    let m = if c > 0 {
                        i as u32
                    } else if m_grid == 1 {
                        // -1 is not on a one-phase grid; its argument snaps
                        // to the only grid angle.
                        all_on_grid = false;
                        0
                    } else {
                        i as u32 + m_grid / 2
                    };
                    match common_magnitude {
                        Some(mag) if mag != c.abs() => magnitudes_agree = false,
                        Some(_) => {}
                        None => common_magnitude = Some(c.abs()),
                    }
                    slots.push(m << n | x);
                }
                2 => {
                    // Sum of two unit grid phases: argument is on the grid
                    // or exactly halfway between adjacent grid angles.
                    all_on_grid = false;
                    let m = snap_two_phase_sum(
                        nonzero[0] as u32,
                        v[nonzero[0]],
                        nonzero[1] as u32,
                        v[nonzero[1]],
                        m_grid,
                    );
                    slots.push(m << n | x);
                }
                _ => unreachable!("an H coefficient accumulates at most two contributions"),
            }
        }
        if slots.is_empty() {
            return Err(SweetError::AllTermsCancelled);
        }
        Ok(ApplyOutcome {
            state: SweetState::from_slots(slots, n, self.grid),
            exact: all_on_grid && magnitudes_agree,
        })
    }

    fn is_canonical(&self) -> bool {
        let x_mask = (1u32 << self.n) - 1;
        !self.terms.is_empty()
            && self.terms.windows(2).all(|w| w[0] < w[1])
            && {
                let mut xs: Vec<u32> = self.terms.iter().map(|&s| s & x_mask).collect();
                xs.sort_unstable();
                xs.windows(2).all(|w| w[0] != w[1])
            }
    }

    /// Serialises the slot list into the table key for this state.
    pub fn key(&self) -> StateKey {
        let width = key_width(self.n, self.grid);
        let mut bytes = Vec::with_capacity(self.terms.len() * width);
        for &slot in &self.terms {
            bytes.extend_from_slice(&slot.to_be_bytes()[4 - width..]);
        }
        StateKey(bytes)
    }

    /// Inverts [`SweetState::key`]. Rejects keys whose length, ordering or
    /// content could not have been produced by encoding a canonical state.
    pub fn from_key(key: &StateKey, n: usize, grid: PhaseGrid) -> Result<Self, SweetError> {
        check_shape(n, grid)?;
        let width = key_width(n, grid);
        let bytes = key.as_bytes();
        if bytes.is_empty() {
            return Err(SweetError::MalformedKey { reason: "key is empty" });
        }
        if bytes.len() % width != 0 {
            return Err(SweetError::MalformedKey {
                reason: "length is not a multiple of the slot width",
            });
        }
        let limit = grid.size() << n;
        let mut slots = Vec::with_capacity(bytes.len() / width);
        for chunk in bytes.chunks(width) {
            let mut slot = 0u32;
            for &b in chunk {
                slot = slot << 8 | b as u32;
            }
            if slot >= limit {
                return Err(SweetError::MalformedKey { reason: "slot out of range" });
            }
            if let Some(&prev) = slots.last() {
                if prev >= slot {
                    return Err(SweetError::MalformedKey {
                        reason: "slots are not strictly ascending",
                    });
                }
            }
            slots.push(slot);
        }
        let x_mask = (1u32 << n) - 1;
        let mut xs: Vec<u32> = slots.iter().map(|&s| s & x_mask).collect();
        xs.sort_unstable();
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(SweetError::MalformedKey {
                reason: "basis string repeated across slots",
            });
        }
        Ok(SweetState { n, grid, terms: slots })
    }

    /// Dense amplitude vector of length `2^n`, normalised to unit norm.
    pub fn to_amplitudes(&self) -> Vec<Complex64> {
        let m_grid = self.grid.size() as f64;
        let norm = 1.0 / (self.terms.len() as f64).sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n];
        for (m, x) in self.term_pairs() {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / m_grid;
            amps[x as usize] = Complex64::from_polar(norm, theta);
        }
        amps
    }

    /// Parses the text form: one `m:x` term per line with `x` a fixed-width
    /// 0/1 string, blank lines and `#` comments ignored.
    pub fn parse_text(text: &str, grid: PhaseGrid) -> Result<Self, SweetError> {
        let mut terms = Vec::new();
        let mut n: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (m_str, x_str) = line.split_once(':').ok_or(SweetError::MalformedText {
                line: lineno,
                reason: "expected `m:x`",
            })?;
            let m: u32 = m_str.trim().parse().map_err(|_| SweetError::MalformedText {
                line: lineno,
                reason: "phase index is not a number",
            })?;
            let x_str = x_str.trim();
            match n {
                None => n = Some(x_str.len()),
                Some(w) if w != x_str.len() => {
                    return Err(SweetError::MalformedText {
                        line: lineno,
                        reason: "basis strings differ in width",
                    })
                }
                Some(_) => {}
            }
            if x_str.is_empty() || !x_str.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(SweetError::MalformedText {
                    line: lineno,
                    reason: "basis string must be 0/1 digits",
                });
            }
            let x = u32::from_str_radix(x_str, 2).map_err(|_| SweetError::MalformedText {
                line: lineno,
                reason: "basis string too wide",
            })?;
            terms.push((m, x));
        }
        let n = n.ok_or(SweetError::EmptyState)?;
        SweetState::new(&terms, n, grid)
    }
}

impl fmt::Display for SweetState {
    /// Text form: one `m:x` line per term in slot order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, x) in self.term_pairs() {
            writeln!(f, "{m}:{x:0width$b}", width = self.n)?;
        }
        Ok(())
    }
}

fn check_shape(n: usize, grid: PhaseGrid) -> Result<(), SweetError> {
    // Slots must fit u32 with headroom; real registers are far smaller.
    if n == 0 || n + grid.p() as usize > 30 {
        return Err(SweetError::RegisterTooLarge { n, p: grid.p() });
    }
    Ok(())
}

fn key_width(n: usize, grid: PhaseGrid) -> usize {
    (n + grid.p() as usize + 7) / 8
}

/// Snaps `s_i * zeta^i + s_j * zeta^j` (entries `s` of magnitude 1, indices
/// into the reduced half-grid, `i < j`) to the nearest grid index.
///
/// Writing the sum as `zeta^a + zeta^b` with `a`, `b` full-grid indices,
/// its argument is `2*pi/M * (a + b)/2`, shifted by half a turn when the
/// indices are more than a quarter turn apart. Odd `a + b` is the halfway
/// tie and resolves to the smaller wrapped index.
fn snap_two_phase_sum(i: u32, si: i32, j: u32, sj: i32, m_grid: u32) -> u32 {
    let a = if si > 0 { i } else { i + m_grid / 2 };
    let b = if sj > 0 { j } else { j + m_grid / 2 };
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let d = b - a;
    debug_assert!(d != 0 && d != m_grid / 2);
    // Doubled grid index of the argument.
    let u2 = 2 * a + d + if d > m_grid / 2 { m_grid } else { 0 };
    if u2 % 2 == 0 {
        (u2 / 2) % m_grid
    } else {
        let k = (u2 - 1) / 2;
        (k % m_grid).min((k + 1) % m_grid)
    }
}

/// Number of distinct SWEET states on `n` qubits over grid `2^p`: every
/// nonempty subset of the `2^(n+p)` slots that decodes to a valid state is
/// counted by the closed form `2^(2^(n+p)) - 1`.
pub fn state_space_size(n: usize, grid: PhaseGrid) -> BigUint {
    let bits = n + grid.p() as usize;
    assert!(bits <= 32, "state space size overflows any practical purpose");
    (BigUint::from(1u8) << (1usize << bits)) - 1u8
}

/// Whether a dense amplitude vector belongs to the class a SWEET state
/// represents: same support, and each amplitude's phase matches the term's
/// grid phase within `tol` radians after factoring out one global phase
/// (chosen to align the first listed term). Magnitudes are unconstrained
/// beyond exceeding `tol`.
pub fn is_class_representative(amps: &[Complex64], state: &SweetState, tol: f64) -> bool {
    if amps.len() != 1usize << state.n() {
        return false;
    }
    let mut support: Vec<u32> = (0..amps.len() as u32)
        .filter(|&x| amps[x as usize].norm() > tol)
        .collect();
    support.sort_unstable();
    let mut basis: Vec<u32> = state.term_pairs().map(|(_, x)| x).collect();
    basis.sort_unstable();
    if support != basis {
        return false;
    }
    let m_grid = state.grid().size() as f64;
    let grid_angle = |m: u32| 2.0 * std::f64::consts::PI * m as f64 / m_grid;
    let (m0, x0) = state.term_pairs().next().expect("states are nonempty");
    let global = amps[x0 as usize].arg() - grid_angle(m0);
    for (m, x) in state.term_pairs() {
        let diff = amps[x as usize].arg() - global - grid_angle(m);
        let wrapped = diff.rem_euclid(2.0 * std::f64::consts::PI);
        if wrapped.min(2.0 * std::f64::consts::PI - wrapped) > tol {
            return false;
        }
    }
    true
}
