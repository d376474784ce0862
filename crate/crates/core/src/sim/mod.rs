//! Scenario files, generation, order-shuffled replay and the full
//! select / confirm / prune pipeline.

mod digest;
mod fixtures;
mod generate;

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::branch::Branch;
use crate::dot;
use crate::engine::RealityLedger;
use crate::hash::{Hash256, TxId};
use crate::ledger::AddOutcome;
use crate::prune::{minimal_confirmed_branch, reality_ledger, validate_consistent, PruneConfig, PruneReport};
use crate::tx::Transaction;
use crate::weight::{
    format_weight, min_hash_weight, min_timestamp_weight, parse_static_weights, select_reality_branch_walk,
    select_reality_conflict_graph, static_weight, Selection, Weight, WeightError, WeightFn,
};

pub use digest::{digests, Digests};
pub use fixtures::{fixture, Fixture, FIXTURE_NAMES};
pub use generate::{
    generate_scenario, independent_pairs, mixture_weights, random_reality, random_static_weights, reality_indicator_weights,
    GenParams,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("scenario line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{0}")]
    Io(String),
    #[error("unknown strategy {0:?}; expected min-hash, min-timestamp or static:<file>")]
    Strategy(String),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("selection algorithms disagree: branch walk {walk:?}, conflict graph {greedy:?}")]
    Equivalence { walk: Vec<TxId>, greedy: Vec<TxId> },
    #[error("validation failed: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conflict_rate: Option<f64>,
    /// Transactions added as double spends during generation.
    pub conflict_pairs: usize,
    /// Longest spend path from genesis.
    pub depth: usize,
    pub txs: usize,
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    meta: ScenarioMeta,
}

/// Genesis plus a listed transaction order that replays without leftovers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub meta: ScenarioMeta,
    pub genesis: Transaction,
    pub transactions: Vec<Transaction>,
}

impl Scenario {
    /// JSON lines: a metadata object, the genesis, then every transaction.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&MetaLine { meta: self.meta.clone() }).expect("meta serializes");
        out.push('\n');
        for tx in std::iter::once(&self.genesis).chain(&self.transactions) {
            out.push_str(&serde_json::to_string(tx).expect("transaction serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, SimError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, reason: String| SimError::Parse { line: line + 1, reason };
        let (n, first) = lines.next().ok_or_else(|| parse_err(0, "empty scenario".into()))?;
        let meta: MetaLine = serde_json::from_str(first).map_err(|e| parse_err(n, e.to_string()))?;
        let (n, g) = lines.next().ok_or_else(|| parse_err(n + 1, "missing genesis".into()))?;
        let genesis: Transaction = serde_json::from_str(g).map_err(|e| parse_err(n, e.to_string()))?;
        if !genesis.is_genesis() {
            return Err(parse_err(n, "second line must be the genesis transaction".into()));
        }
        let transactions = lines
            .map(|(n, l)| serde_json::from_str(l).map_err(|e| parse_err(n, e.to_string())))
            .collect::<Result<Vec<Transaction>, _>>()?;
        Ok(Self {
            meta: meta.meta,
            genesis,
            transactions,
        })
    }

    pub fn read(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_jsonl(&text)
    }

    pub fn genesis_value_sum(&self) -> u64 {
        self.genesis.output_sum().unwrap_or(u64::MAX)
    }
}

/// How weights are obtained for selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategySpec {
    MinHash,
    MinTimestamp,
    Static(BTreeMap<TxId, Weight>),
}

impl StrategySpec {
    /// `min-hash`, `min-timestamp` or `static:<file.json>`.
    pub fn parse(s: &str) -> Result<Self, SimError> {
        match s {
            "min-hash" => Ok(Self::MinHash),
            "min-timestamp" => Ok(Self::MinTimestamp),
            _ => {
                let path = s
                    .strip_prefix("static:")
                    .ok_or_else(|| SimError::Strategy(s.to_string()))?;
                let text =
                    std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{path}: {e}")))?;
                Ok(Self::Static(parse_static_weights(&text)?))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::MinHash => "min-hash",
            Self::MinTimestamp => "min-timestamp",
            Self::Static(_) => "static",
        }
    }

    pub fn build(&self, rl: &RealityLedger) -> Result<WeightFn, WeightError> {
        match self {
            Self::MinHash => Ok(min_hash_weight(rl)),
            Self::MinTimestamp => Ok(min_timestamp_weight(rl)),
            Self::Static(values) => static_weight(rl, values),
        }
    }
}

/// Feeds the scenario through a fresh engine, shuffled by `perm_seed`
/// (listed order when `None`).
pub fn replay_engine(scenario: &Scenario, perm_seed: Option<u64>) -> Result<(RealityLedger, usize), SimError> {
    let mut rl = RealityLedger::new(scenario.genesis.clone()).map_err(|e| SimError::Parse {
        line: 2,
        reason: e.to_string(),
    })?;
    let mut order = scenario.transactions.clone();
    if let Some(seed) = perm_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut rejected = 0;
    for tx in order {
        if let AddOutcome::Rejected(_) = rl.add_transaction(tx) {
            rejected += 1;
        }
    }
    Ok((rl, rejected))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealitySummary {
    pub branch_id: Hash256,
    pub conflicts: Vec<TxId>,
    pub weight: String,
    pub iterations: usize,
    pub ledger_size: usize,
    pub value_sum: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub perm_seed: Option<u64>,
    pub transactions: usize,
    pub pending: usize,
    pub rejected: usize,
    pub conflicts: usize,
    pub conflict_dag_edges: usize,
    pub conflict_graph_edges: usize,
    pub digests: Digests,
    pub strategy: String,
    pub selected_reality: RealitySummary,
    pub genesis_value_sum: u64,
}

/// Both selection algorithms; fails when their outputs differ.
pub fn select_checked(rl: &RealityLedger, w: &WeightFn) -> Result<Selection, SimError> {
    let walk = select_reality_branch_walk(rl, w)?;
    let greedy = select_reality_conflict_graph(rl, w)?;
    if walk.branch != greedy.branch {
        return Err(SimError::Equivalence {
            walk: walk.order,
            greedy: greedy.order,
        });
    }
    Ok(walk)
}

fn summarize(rl: &RealityLedger, w: &WeightFn, sel: &Selection) -> Result<RealitySummary, SimError> {
    let view = rl.branches();
    let branch_id = view
        .branch_id(&sel.branch)
        .map_err(|e| SimError::Validation(format!("selected set is not a branch: {e}")))?;
    let txs = reality_ledger(rl, &sel.branch).map_err(|e| SimError::Validation(e.to_string()))?;
    let state = rl
        .ledger()
        .ledger_state(&txs)
        .map_err(|e| SimError::Validation(e.to_string()))?;
    Ok(RealitySummary {
        branch_id,
        conflicts: sel.branch.iter().copied().collect(),
        weight: format_weight(&w.branch_weight(&sel.branch)?),
        iterations: sel.iterations,
        ledger_size: txs.len(),
        value_sum: u64::try_from(state.value_sum()).unwrap_or(u64::MAX),
    })
}

fn report(
    rl: &RealityLedger,
    rejected: usize,
    perm_seed: Option<u64>,
    strategy: &StrategySpec,
    w: &WeightFn,
    sel: &Selection,
) -> Result<ReplayReport, SimError> {
    let cs = rl.conflicts();
    Ok(ReplayReport {
        perm_seed,
        transactions: rl.ledger().len(),
        pending: rl.ledger().pending_len(),
        rejected,
        conflicts: cs.len(),
        conflict_dag_edges: cs.dag().edge_count(),
        conflict_graph_edges: cs.graph().edge_count(),
        digests: digests(rl),
        strategy: strategy.name().to_string(),
        selected_reality: summarize(rl, w, sel)?,
        genesis_value_sum: rl.ledger().genesis().output_sum().unwrap_or(u64::MAX),
    })
}

pub fn replay(scenario: &Scenario, perm_seed: Option<u64>, strategy: &StrategySpec) -> Result<ReplayReport, SimError> {
    let (rl, rejected) = replay_engine(scenario, perm_seed)?;
    let w = strategy.build(&rl)?;
    let sel = select_checked(&rl, &w)?;
    report(&rl, rejected, perm_seed, strategy, &w, &sel)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub replay: ReplayReport,
    pub theta: String,
    pub confirmed: bool,
    pub prune: Option<PruneReport>,
    pub pruned_transactions: usize,
    pub remaining_conflicts: usize,
}

/// Replay, select with both algorithms, and prune the selected reality if
/// it is confirmed at θ. Post-prune invariants are checked and reported as
/// [`SimError::Validation`].
pub fn run_pipeline(
    scenario: &Scenario,
    perm_seed: Option<u64>,
    strategy: &StrategySpec,
    cfg: &PruneConfig,
    dot_dir: Option<&Path>,
) -> Result<PipelineReport, SimError> {
    let (mut rl, rejected) = replay_engine(scenario, perm_seed)?;
    let w = strategy.build(&rl)?;
    let sel = select_checked(&rl, &w)?;
    let replay = report(&rl, rejected, perm_seed, strategy, &w, &sel)?;
    if let Some(dir) = dot_dir {
        write_dots(&rl, dir, "")?;
    }

    let reality = sel.branch;
    let confirmed = w.branch_weight(&reality)? >= cfg.theta();
    let mut prune = None;
    if confirmed {
        let minimal = minimal_confirmed_branch(&rl, &w, cfg).map_err(|e| SimError::Validation(e.to_string()))?;
        if minimal != reality {
            return Err(SimError::Validation(
                "confirmed reality differs from the minimal confirmed branch".into(),
            ));
        }
        let expected = reality_ledger(&rl, &reality).map_err(|e| SimError::Validation(e.to_string()))?;
        let pr = rl.prune(&reality).map_err(|e| SimError::Validation(e.to_string()))?;
        check_pruned(&rl, &expected)?;
        prune = Some(pr);
        if let Some(dir) = dot_dir {
            write_dots(&rl, dir, "pruned_")?;
        }
    }
    Ok(PipelineReport {
        replay,
        theta: format_weight(&cfg.theta()),
        confirmed,
        prune,
        pruned_transactions: rl.ledger().len(),
        remaining_conflicts: rl.conflicts().len(),
    })
}

/// Invariants after pruning a reality: no conflicts left, the surviving set
/// is the reality ledger, it is consistent, conserves value, and the
/// conflict structures match a rebuild.
pub fn check_pruned(rl: &RealityLedger, expected: &std::collections::BTreeSet<TxId>) -> Result<(), SimError> {
    let ledger = rl.ledger();
    let survivors: std::collections::BTreeSet<TxId> = ledger.ids().copied().collect();
    if &survivors != expected {
        return Err(SimError::Validation(format!(
            "pruned ledger has {} transactions, reality ledger had {}",
            survivors.len(),
            expected.len()
        )));
    }
    if !rl.conflicts().is_empty() || !ledger.conflicts().is_empty() {
        return Err(SimError::Validation("conflicts remain after pruning a reality".into()));
    }
    validate_consistent(ledger, &survivors).map_err(|e| SimError::Validation(e.to_string()))?;
    let state = ledger
        .ledger_state(&survivors)
        .map_err(|e| SimError::Validation(e.to_string()))?;
    if state.value_sum() != ledger.genesis().output_sum().unwrap_or(u64::MAX) as u128 {
        return Err(SimError::Validation("value not conserved after pruning".into()));
    }
    if !rl.matches_rebuild() {
        return Err(SimError::Validation("conflict structures differ from a rebuild".into()));
    }
    Ok(())
}

fn write_dots(rl: &RealityLedger, dir: &Path, prefix: &str) -> Result<(), SimError> {
    let io = |e: std::io::Error| SimError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let names = BTreeMap::new();
    let mut files = vec![
        ("ledger.dot", dot::ledger_dot(rl.ledger(), &names)),
        ("conflict_dag.dot", dot::conflict_dag_dot(rl.conflicts(), &names)),
        ("conflict_graph.dot", dot::conflict_graph_dot(rl.conflicts(), &names)),
    ];
    let view = rl.branches();
    if let Ok(dag) = view.materialize(256) {
        files.push(("branch_dag.dot", dot::branch_dag_dot(&view, &dag, &names)));
    }
    for (name, body) in files {
        std::fs::write(dir.join(format!("{prefix}{name}")), body).map_err(io)?;
    }
    Ok(())
}

/// Realities of small instances, expanded from maximal independent sets.
pub fn all_realities(rl: &RealityLedger, max_conflicts: usize) -> Option<Vec<Branch>> {
    rl.branches()
        .realities_bruteforce(max_conflicts)
        .ok()
        .map(|s| s.into_iter().collect())
}
