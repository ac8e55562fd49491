//! Bridges parsed configs to the synthesis engine and its artifacts.
//!
//! `build_problem` resolves the config's states (including a graph
//! target loaded from an edge-list file) into a concrete problem, and
//! `run_synthesis` drives training to convergence. `write_artifacts`
//! lays down the standard output set in one directory: the circuit
//! text (on success), the JSON run report, and binary snapshots of the
//! Q, static-reward and dynamic-reward tables.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use sweetq::action::ActionError;
use sweetq::circuit::CircuitError;
use sweetq::graph::{graph_state_target, parse_edge_list, GraphError};
use sweetq::qlearn::{run_to_convergence, synthesize, Problem, Synthesis, TrainError, Trainer};
use sweetq::reward::RewardError;
use sweetq::store::{self, StoreError, TableHeader, TableRole};
use sweetq::sweet::SweetError;
use sweetq::{GateSet, PhaseGrid, SweetState};

use crate::config::{ConfigError, RunConfig, StateSpec, TargetSpec};
use crate::report::RunReport;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Gates(#[from] ActionError),
    #[error("{which} state: {source}")]
    State {
        which: &'static str,
        source: SweetError,
    },
    #[error("{which} state: term {term:?} is not {n} bits wide")]
    TermWidth {
        which: &'static str,
        term: String,
        n: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph has {graph_n} vertices but the register has {config_n} qubits")]
    GraphRegister { graph_n: usize, config_n: usize },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no output directory: set `out` in the config or pass --out")]
    MissingOut,
}

impl RunError {
    /// Stable one-word token for scripted error handling.
    pub fn token(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Gates(_) => "gates",
            RunError::State { .. } | RunError::TermWidth { .. } => "state",
            RunError::Graph(_) | RunError::GraphRegister { .. } => "graph",
            RunError::Train(_) => "train",
            RunError::Reward(_) => "reward",
            RunError::Store(_) => "store",
            RunError::Circuit(_) => "circuit",
            RunError::Io { .. } => "io",
            RunError::MissingOut => "output",
        }
    }
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Realizes a written state spec on the config's register.
pub fn build_state(
    spec: &StateSpec,
    which: &'static str,
    n: usize,
    grid: PhaseGrid,
) -> Result<SweetState, RunError> {
    let state = |source| RunError::State { which, source };
    match spec {
        StateSpec::Plus => SweetState::uniform_superposition(n, grid).map_err(state),
        StateSpec::Terms(written) => {
            let mut terms = Vec::with_capacity(written.len());
            for (m, x_str) in written {
                if x_str.len() != n {
                    return Err(RunError::TermWidth {
                        which,
                        term: format!("{m}:{x_str}"),
                        n,
                    });
                }
                let x = u32::from_str_radix(x_str, 2).expect("config validated the digits");
                terms.push((*m, x));
            }
            SweetState::new(&terms, n, grid).map_err(state)
        }
    }
}

/// Loads the target from a graph edge-list file.
pub fn graph_target(path: &Path, n: usize, grid: PhaseGrid) -> Result<SweetState, RunError> {
    let g = parse_edge_list(&read(path)?)?;
    if g.n() != n {
        return Err(RunError::GraphRegister {
            graph_n: g.n(),
            config_n: n,
        });
    }
    Ok(graph_state_target(&g, grid)?)
}

/// Resolves the config into a validated problem. `graph_override`
/// replaces the config's target with the given edge-list file.
pub fn build_problem(cfg: &RunConfig, graph_override: Option<&Path>) -> Result<Problem, RunError> {
    let grid = PhaseGrid::new(cfg.p);
    let set = GateSet::parse(&cfg.gate_set.join(" "), cfg.n)?;
    let start = build_state(&cfg.initial_state, "initial", cfg.n, grid)?;
    let target = match (graph_override, &cfg.target) {
        (Some(path), _) => graph_target(path, cfg.n, grid)?,
        (None, TargetSpec::Graph(path)) => graph_target(path, cfg.n, grid)?,
        (None, TargetSpec::State(spec)) => build_state(spec, "target", cfg.n, grid)?,
    };
    let problem = Problem { start, target, set };
    problem.validate()?;
    Ok(problem)
}

/// A finished synthesis with everything needed to write artifacts.
pub struct RunOutput {
    pub problem: Problem,
    pub seed: u64,
    pub synthesis: Synthesis,
    pub report: RunReport,
}

/// Runs the full loop for a config. A `reward` path preloads a static
/// table snapshot instead of rebuilding it; its header must match the
/// problem's register and gate set.
pub fn run_synthesis(
    cfg: &RunConfig,
    seed_override: Option<u64>,
    graph_override: Option<&Path>,
    reward: Option<&Path>,
) -> Result<RunOutput, RunError> {
    let problem = build_problem(cfg, graph_override)?;
    let tc = cfg.train_config(seed_override);
    let synthesis = match reward {
        None => synthesize(&problem, &tc)?,
        Some(path) => {
            let expected =
                TableHeader::for_set(TableRole::StaticReward, &problem.set, problem.start.grid());
            let r_sta = store::load_checked(path, &expected)?;
            run_to_convergence(Trainer::with_static_reward(problem.clone(), tc.clone(), r_sta)?)
        }
    };
    let report = RunReport::new(cfg, tc.seed, &synthesis);
    Ok(RunOutput {
        problem,
        seed: tc.seed,
        synthesis,
        report,
    })
}

/// File names written by `write_artifacts`.
pub const CIRCUIT_FILE: &str = "circuit.txt";
pub const REPORT_FILE: &str = "report.json";
pub const Q_FILE: &str = "q.tbl";
pub const R_STATIC_FILE: &str = "r_static.tbl";
pub const R_DYNAMIC_FILE: &str = "r_dynamic.tbl";

/// Writes the standard artifact set into `dir`, creating it if needed.
/// A stale circuit from an earlier run is removed when this one failed,
/// so the directory never pairs an old circuit with a new report.
pub fn write_artifacts(dir: &Path, out: &RunOutput) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let circuit_path = dir.join(CIRCUIT_FILE);
    match &out.synthesis.circuit {
        Some(c) => write(&circuit_path, c.to_text().as_bytes())?,
        None => {
            if circuit_path.exists() {
                fs::remove_file(&circuit_path).map_err(|source| RunError::Io {
                    path: circuit_path.clone(),
                    source,
                })?;
            }
        }
    }
    write(&dir.join(REPORT_FILE), out.report.to_json().as_bytes())?;
    let set = &out.problem.set;
    let grid = out.problem.start.grid();
    let snapshots = [
        (Q_FILE, TableRole::Q, &out.synthesis.q),
        (R_STATIC_FILE, TableRole::StaticReward, &out.synthesis.r_sta),
        (R_DYNAMIC_FILE, TableRole::DynamicReward, &out.synthesis.r_dyn),
    ];
    for (name, role, table) in snapshots {
        let header = TableHeader::for_set(role, set, grid);
        store::save(table, &header, &dir.join(name))?;
    }
    Ok(())
}
