//! `rledger`: scenario generation, replay and the confirmation/pruning pipeline.
//!
//! Exit codes: 0 success, 2 validation failure (including weights that
//! break the axioms), 3 the two selection
//! algorithms disagree, 1 any other error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use reality_ledger::sim::{self, GenParams, Scenario, SimError, StrategySpec, FIXTURE_NAMES};
use reality_ledger::weight::{parse_weight, static_weights_to_json, WeightError};
use reality_ledger::PruneConfig;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "rledger", version, about = "Reality-based UTXO ledger simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded scenario as JSON lines.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Number of non-genesis transactions.
        #[arg(long)]
        txs: usize,
        /// Probability that a step attempts a double spend, in [0, 1].
        #[arg(long, default_value_t = 0.1)]
        conflict_rate: f64,
        /// Maximum inputs of an ordinary spend.
        #[arg(long, default_value_t = 3)]
        max_parents: usize,
        /// Stop adding double spends once this many conflicts exist.
        #[arg(long)]
        max_conflicts: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a scenario in a shuffled order and report structure and selection.
    Replay {
        #[arg(long)]
        scenario: PathBuf,
        /// Shuffle seed; the listed order when omitted.
        #[arg(long)]
        perm_seed: Option<u64>,
        /// min-hash, min-timestamp or static:<weights.json>.
        #[arg(long, default_value = "min-hash")]
        strategy: String,
        /// Also replay this many further permutations and require equal digests.
        #[arg(long, default_value_t = 0)]
        perms: u64,
        /// Report file; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Replay, select with both algorithms, and prune if the reality is confirmed.
    Pipeline {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        perm_seed: Option<u64>,
        #[arg(long, default_value = "min-hash")]
        strategy: String,
        /// Confirmation threshold in (1/2, 1], as p/q or a decimal.
        #[arg(long, default_value = "3/4")]
        theta: String,
        /// Directory for Graphviz files of the structures before and after pruning.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a hand-encoded worked example.
    Fixture {
        /// One of fig3, fig4, fig6.
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the fixture's static weights (fig6 only).
        #[arg(long)]
        weights_out: Option<PathBuf>,
        /// Write a JSON map from names to transaction ids.
        #[arg(long)]
        names_out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ReplayOutput {
    #[serde(flatten)]
    report: sim::ReplayReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    permutations_checked: Option<u64>,
}

fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            seed,
            txs,
            conflict_rate,
            max_parents,
            max_conflicts,
            out,
        } => {
            let scn = sim::generate_scenario(&GenParams {
                seed,
                n_txs: txs,
                conflict_rate,
                max_parents,
                max_conflicts,
            })?;
            emit(out.as_deref(), &scn.to_jsonl())
        }
        Command::Replay {
            scenario,
            perm_seed,
            strategy,
            perms,
            report,
        } => {
            let scn = Scenario::read(&scenario)?;
            let strategy = StrategySpec::parse(&strategy)?;
            let base = sim::replay(&scn, perm_seed, &strategy)?;
            let offset = perm_seed.map_or(0, |s| s.wrapping_add(1));
            for k in 0..perms {
                let p = offset.wrapping_add(k);
                let other = sim::replay(&scn, Some(p), &strategy)?;
                if other.digests != base.digests || other.selected_reality != base.selected_reality {
                    return Err(SimError::Validation(format!("permutation {p} produced a different ledger")).into());
                }
            }
            let output = ReplayOutput {
                report: base,
                permutations_checked: (perms > 0).then_some(perms),
            };
            emit(report.as_deref(), &to_json(&output)?)
        }
        Command::Pipeline {
            scenario,
            perm_seed,
            strategy,
            theta,
            dot_dir,
            report,
        } => {
            let scn = Scenario::read(&scenario)?;
            let strategy = StrategySpec::parse(&strategy)?;
            let cfg = PruneConfig::new(parse_weight(&theta)?)?;
            let out = sim::run_pipeline(&scn, perm_seed, &strategy, &cfg, dot_dir.as_deref())?;
            emit(report.as_deref(), &to_json(&out)?)
        }
        Command::Fixture {
            name,
            out,
            weights_out,
            names_out,
        } => {
            let Some(f) = sim::fixture(&name) else {
                bail!("unknown fixture {name:?}; expected one of {}", FIXTURE_NAMES.join(", "));
            };
            if let Some(path) = weights_out {
                let Some(w) = &f.weights else {
                    bail!("fixture {name} has no weights");
                };
                emit(Some(&path), &static_weights_to_json(w))?;
            }
            if let Some(path) = names_out {
                let names: BTreeMap<&String, String> = f.names.iter().map(|(k, v)| (k, v.to_hex())).collect();
                emit(Some(&path), &to_json(&names)?)?;
            }
            emit(out.as_deref(), &f.scenario.to_jsonl())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<SimError>() {
        Some(SimError::Validation(_) | SimError::Weight(WeightError::Axiom(_))) => 2,
        Some(SimError::Equivalence { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
