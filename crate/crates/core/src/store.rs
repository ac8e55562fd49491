//! Table snapshots on disk, and CSV export for external plotting.
//!
//! A snapshot is one binary file: magic, version, a header recording
//! what the table was built against (role, register shape, gate set,
//! action count), then the nonzero entries as (key, action, value)
//! triplets sorted by key and action. Values are stored as raw IEEE 754
//! bits, so loading reproduces every entry bit-exactly. Loading is
//! strict: a file that is not a canonical snapshot is rejected, never
//! repaired, and resuming against the wrong header is an error.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::action::{enumerate_actions, GateSet};
use crate::reward::SparseTable;
use crate::sweet::{PhaseGrid, StateKey};

const MAGIC: [u8; 4] = *b"SWQT";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("corrupt table file: {reason}")]
    CorruptFile { reason: &'static str },
    #[error("table header mismatch on {field}")]
    HeaderMismatch { field: &'static str },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which table a snapshot holds.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TableRole {
    Q,
    StaticReward,
    DynamicReward,
}

impl TableRole {
    fn code(self) -> u8 {
        match self {
            TableRole::Q => 0,
            TableRole::StaticReward => 1,
            TableRole::DynamicReward => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TableRole::Q),
            1 => Some(TableRole::StaticReward),
            2 => Some(TableRole::DynamicReward),
            _ => None,
        }
    }
}

impl fmt::Display for TableRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableRole::Q => "q",
            TableRole::StaticReward => "r_static",
            TableRole::DynamicReward => "r_dynamic",
        })
    }
}

/// Everything a table depends on; a loaded snapshot is only usable
/// against a run with an equal header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableHeader {
    pub role: TableRole,
    pub n: u16,
    pub p: u16,
    pub gates: Vec<String>,
    pub action_count: u32,
}

impl TableHeader {
    pub fn for_set(role: TableRole, set: &GateSet, grid: PhaseGrid) -> Self {
        TableHeader {
            role,
            n: set.n() as u16,
            p: grid.p() as u16,
            gates: set.kinds().iter().map(|k| k.token().to_string()).collect(),
            action_count: enumerate_actions(set).len() as u32,
        }
    }
}

fn sorted_refs(table: &SparseTable) -> Vec<(&StateKey, u32, f64)> {
    let mut refs: Vec<(&StateKey, u32, f64)> = table.iter().collect();
    refs.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    refs
}

/// Writes a snapshot of `table` under `header` to `path`.
pub fn save(table: &SparseTable, header: &TableHeader, path: &Path) -> Result<(), StoreError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_be_bytes())?;
    w.write_all(&[header.role.code()])?;
    w.write_all(&header.n.to_be_bytes())?;
    w.write_all(&header.p.to_be_bytes())?;
    w.write_all(&[header.gates.len() as u8])?;
    for gate in &header.gates {
        w.write_all(&[gate.len() as u8])?;
        w.write_all(gate.as_bytes())?;
    }
    w.write_all(&header.action_count.to_be_bytes())?;
    w.write_all(&(table.len() as u64).to_be_bytes())?;
    for (key, action, value) in sorted_refs(table) {
        let bytes = key.as_bytes();
        w.write_all(&(bytes.len() as u16).to_be_bytes())?;
        w.write_all(bytes)?;
        w.write_all(&action.to_be_bytes())?;
        w.write_all(&value.to_bits().to_be_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Strict cursor over the snapshot bytes; any premature end is corrupt.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], StoreError> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let slice = &self.buf[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(StoreError::CorruptFile {
                reason: "unexpected end of file",
            }),
        }
    }

    fn u8(&mut self) -> Result<u8, StoreError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, StoreError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Loads a snapshot, validating the whole file.
pub fn load(path: &Path) -> Result<(TableHeader, SparseTable), StoreError> {
    let buf = fs::read(path)?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(StoreError::CorruptFile {
            reason: "bad magic",
        });
    }
    if r.u16()? != VERSION {
        return Err(StoreError::CorruptFile {
            reason: "unsupported version",
        });
    }
    let role = TableRole::from_code(r.u8()?).ok_or(StoreError::CorruptFile {
        reason: "unknown table role",
    })?;
    let n = r.u16()?;
    let p = r.u16()?;
    if n == 0 {
        return Err(StoreError::CorruptFile {
            reason: "zero qubit count",
        });
    }
    let gate_count = r.u8()?;
    if gate_count == 0 {
        return Err(StoreError::CorruptFile {
            reason: "empty gate set",
        });
    }
    let mut gates = Vec::with_capacity(gate_count as usize);
    for _ in 0..gate_count {
        let len = r.u8()? as usize;
        let bytes = r.take(len)?;
        let token = std::str::from_utf8(bytes)
            .ok()
            .filter(|t| !t.is_empty() && t.bytes().all(|b| b.is_ascii_graphic()))
            .ok_or(StoreError::CorruptFile {
                reason: "bad gate token",
            })?;
        gates.push(token.to_string());
    }
    let action_count = r.u32()?;
    if action_count == 0 {
        return Err(StoreError::CorruptFile {
            reason: "zero action count",
        });
    }
    let entry_count = r.u64()?;
    let mut table = SparseTable::new();
    let mut last: Option<(Vec<u8>, u32)> = None;
    for _ in 0..entry_count {
        let key_len = r.u16()? as usize;
        if key_len == 0 {
            return Err(StoreError::CorruptFile {
                reason: "empty state key",
            });
        }
        let key_bytes = r.take(key_len)?.to_vec();
        let action = r.u32()?;
        if action >= action_count {
            return Err(StoreError::CorruptFile {
                reason: "action index out of range",
            });
        }
        let value = f64::from_bits(r.u64()?);
        if !value.is_finite() {
            return Err(StoreError::CorruptFile {
                reason: "non-finite value",
            });
        }
        if value == 0.0 {
            return Err(StoreError::CorruptFile {
                reason: "explicit zero entry",
            });
        }
        let this = (key_bytes, action);
        if let Some(prev) = &last {
            if *prev >= this {
                return Err(StoreError::CorruptFile {
                    reason: "entries out of order",
                });
            }
        }
        table.set(&StateKey::from_bytes(this.0.clone()), action, value);
        last = Some(this);
    }
    if r.pos != buf.len() {
        return Err(StoreError::CorruptFile {
            reason: "trailing data",
        });
    }
    let header = TableHeader {
        role,
        n,
        p,
        gates,
        action_count,
    };
    Ok((header, table))
}

/// Loads a snapshot that must match `expected`; the header fields are
/// compared one by one so the error names the first offender.
pub fn load_checked(path: &Path, expected: &TableHeader) -> Result<SparseTable, StoreError> {
    let (header, table) = load(path)?;
    let mismatch = |field| Err(StoreError::HeaderMismatch { field });
    if header.role != expected.role {
        return mismatch("role");
    }
    if header.n != expected.n {
        return mismatch("qubit count");
    }
    if header.p != expected.p {
        return mismatch("phase qubit count");
    }
    if header.gates != expected.gates {
        return mismatch("gate set");
    }
    if header.action_count != expected.action_count {
        return mismatch("action count");
    }
    Ok(table)
}

/// Writes the `state,action,value` CSV rows, sorted by key then action.
/// Keys are hex; values print as the shortest decimal that reads back
/// to the same number.
pub fn write_csv(table: &SparseTable, mut out: impl Write) -> Result<(), StoreError> {
    out.write_all(b"state,action,value\n")?;
    for (key, action, value) in sorted_refs(table) {
        writeln!(out, "{},{},{}", key.to_hex(), action, value)?;
    }
    Ok(())
}

pub fn export_csv(table: &SparseTable, path: &Path) -> Result<(), StoreError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_csv(table, &mut w)?;
    w.flush()?;
    Ok(())
}
