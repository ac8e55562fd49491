//! `sweetq`: synthesize circuits by reinforcement learning over
//! discretized register states, and inspect the artifacts it writes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sweetq::reward::{build_static_reward, StaticRewardConfig};
use sweetq::store::{self, TableHeader, TableRole};
use sweetq::{Circuit, PhaseGrid, SweetState};

use sweetq_cli::config::RunConfig;
use sweetq_cli::run::{self, RunError, R_STATIC_FILE};

#[derive(Parser)]
#[command(name = "sweetq", version, about = "Q-learning circuit synthesis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the static reward table for a config's target and save it.
    RewardBuild {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Target graph edge list (overrides the config's target).
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Train and roll out a circuit, writing the artifact set.
    Synth {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Target graph edge list (overrides the config's target).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Reuse a saved static reward table instead of rebuilding it.
        #[arg(long)]
        reward: Option<PathBuf>,
    },
    /// Apply a circuit file to a state file and print the final state.
    Apply {
        /// State file, one `m:x` term per line.
        state: PathBuf,
        /// Circuit file, one gate per line.
        circuit: PathBuf,
        /// Phase grid qubits; inferred from the inputs when omitted.
        #[arg(long)]
        phase_qubits: Option<u32>,
    },
    /// Print the metrics of a circuit file.
    Metrics {
        /// Circuit file, one gate per line.
        circuit: PathBuf,
    },
    /// Export a binary table snapshot as CSV.
    Export {
        /// Table snapshot written by synth or reward-build.
        snapshot: PathBuf,
        /// Destination CSV file.
        csv: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::RewardBuild { config, out, graph } => cmd_reward_build(&config, out, graph),
        Cmd::Synth {
            config,
            seed,
            out,
            graph,
            reward,
        } => cmd_synth(&config, seed, out, graph, reward),
        Cmd::Apply {
            state,
            circuit,
            phase_qubits,
        } => cmd_apply(&state, &circuit, phase_qubits),
        Cmd::Metrics { circuit } => cmd_metrics(&circuit),
        Cmd::Export { snapshot, csv } => cmd_export(&snapshot, &csv),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}: {err}", err.token());
            ExitCode::FAILURE
        }
    }
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok(RunConfig::parse(&read(path)?, base)?)
}

fn out_dir(cfg: &RunConfig, flag: Option<PathBuf>) -> Result<PathBuf, RunError> {
    flag.or_else(|| cfg.out.clone()).ok_or(RunError::MissingOut)
}

fn cmd_reward_build(
    config: &Path,
    out: Option<PathBuf>,
    graph: Option<PathBuf>,
) -> Result<ExitCode, RunError> {
    let cfg = load_config(config)?;
    let dir = out_dir(&cfg, out)?;
    let problem = run::build_problem(&cfg, graph.as_deref())?;
    let reward_cfg = StaticRewardConfig {
        r_max: cfg.r_max,
        k_max: cfg.k_max,
    };
    let table = build_static_reward(&problem.target, &problem.set, &reward_cfg)?;
    fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let path = dir.join(R_STATIC_FILE);
    let header = TableHeader::for_set(TableRole::StaticReward, &problem.set, problem.start.grid());
    store::save(&table, &header, &path)?;
    println!("static reward: {} entries -> {}", table.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(
    config: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    graph: Option<PathBuf>,
    reward: Option<PathBuf>,
) -> Result<ExitCode, RunError> {
    let cfg = load_config(config)?;
    let dir = out_dir(&cfg, out)?;
    let run = run::run_synthesis(&cfg, seed, graph.as_deref(), reward.as_deref())?;
    run::write_artifacts(&dir, &run)?;
    let report = &run.report;
    if run.synthesis.converged {
        let metrics = report.metrics.as_ref().expect("converged runs have metrics");
        println!(
            "seed {}: converged after {} batches: {} gates, depth {} -> {}",
            run.seed,
            report.batches_run,
            metrics.gate_count,
            metrics.depth,
            dir.display()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "seed {}: no circuit within {} batches (mean Bellman error {:.3}) -> {}",
            run.seed,
            report.batches_run,
            report.mean_bellman_error,
            dir.display()
        );
        // Distinct from hard errors so harnesses can count failures.
        Ok(ExitCode::from(2))
    }
}

/// Smallest grid that fits every written phase index and every gate.
fn infer_grid(state_text: &str, circuit: &Circuit) -> PhaseGrid {
    let mut p = 0u32;
    for line in state_text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((m, _)) = line.split_once(':') {
            if let Ok(m) = m.trim().parse::<u32>() {
                // m needs bits(m) phase qubits to satisfy m < 2^p.
                p = p.max(32 - m.leading_zeros());
            }
        }
    }
    for gate in circuit.gates() {
        p = p.max(gate.kind.min_grid().trailing_zeros());
    }
    PhaseGrid::new(p)
}

fn cmd_apply(
    state: &Path,
    circuit: &Path,
    phase_qubits: Option<u32>,
) -> Result<ExitCode, RunError> {
    let state_text = read(state)?;
    let parsed = Circuit::parse(&read(circuit)?)?;
    let grid = match phase_qubits {
        Some(p) => PhaseGrid::new(p),
        None => infer_grid(&state_text, &parsed),
    };
    let wrap = |source| RunError::State {
        which: "input",
        source,
    };
    let mut current = SweetState::parse_text(&state_text, grid).map_err(wrap)?;
    let mut projected = 0usize;
    for gate in parsed.gates() {
        let outcome = current.apply(gate.kind, &gate.qubits).map_err(wrap)?;
        if !outcome.exact {
            projected += 1;
        }
        current = outcome.state;
    }
    print!("{current}");
    if projected == 0 {
        eprintln!("note: all {} gates exact", parsed.gates().len());
    } else {
        eprintln!(
            "note: {} of {} gates projected onto the grid",
            projected,
            parsed.gates().len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_metrics(circuit: &Path) -> Result<ExitCode, RunError> {
    let parsed = Circuit::parse(&read(circuit)?)?;
    let m = parsed.metrics();
    println!("gates: {}", m.gate_count);
    println!("t_gates: {}", m.t_count);
    println!("entangling: {}", m.entangling_count);
    println!("depth: {}", m.depth);
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(snapshot: &Path, csv: &Path) -> Result<ExitCode, RunError> {
    let (header, table) = store::load(snapshot)?;
    store::export_csv(&table, csv)?;
    println!(
        "{} table: {} entries -> {}",
        header.role,
        table.len(),
        csv.display()
    );
    Ok(ExitCode::SUCCESS)
}
