//! Confirmation, reality ledgers, consistency validation and pruning.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;
use serde::Serialize;

use crate::branch::{Branch, BranchError};
use crate::conflict::closest_past_conflicts;
use crate::engine::RealityLedger;
use crate::hash::TxId;
use crate::ledger::LedgerDag;
use crate::tx::OutputRef;
use crate::weight::{format_weight, Weight, WeightError, WeightFn};

/// Confirmation threshold θ with `1/2 < θ <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneConfig {
    theta: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("threshold {0} is outside (1/2, 1]")]
pub struct InvalidTheta(pub String);

impl PruneConfig {
    pub fn new(theta: Weight) -> Result<Self, InvalidTheta> {
        if theta <= Weight::new(1, 2) || theta > Weight::one() {
            return Err(InvalidTheta(format_weight(&theta)));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> Weight {
        self.theta
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PruneReport {
    pub removed_txs: Vec<TxId>,
    pub demoted_conflicts: Vec<TxId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{tx:?} violates constraint {constraint}: {reason}")]
pub struct ConsistencyViolation {
    pub tx: TxId,
    /// 1 syntax, 2 value balance, 3 unlock, 4 single consumption of
    /// existing outputs.
    pub constraint: u8,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PruneError {
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Transactions whose past-cone conflicts all belong to `r`.
pub fn reality_ledger(rl: &RealityLedger, r: &Branch) -> Result<BTreeSet<TxId>, BranchError> {
    rl.branches().branch(r.conflicts().clone())?;
    let ledger = rl.ledger();
    Ok(ledger
        .ids()
        .filter(|id| {
            ledger
                .label_set(id)
                .expect("stored")
                .iter()
                .all(|c| r.contains(c))
        })
        .copied()
        .collect())
}

/// Checks the ledger constraints over `txs` as a standalone ledger.
pub fn validate_consistent<'a>(
    ledger: &LedgerDag,
    txs: impl IntoIterator<Item = &'a TxId>,
) -> Result<(), ConsistencyViolation> {
    let set: BTreeSet<TxId> = txs.into_iter().copied().collect();
    let fail = |tx: TxId, constraint: u8, reason: String| ConsistencyViolation {
        tx,
        constraint,
        reason,
    };
    let mut consumed: BTreeMap<OutputRef, TxId> = BTreeMap::new();
    for id in &set {
        let tx = ledger
            .get(id)
            .ok_or_else(|| fail(*id, 4, "transaction is not stored".into()))?;
        tx.validate_syntax().map_err(|e| fail(*id, 1, e.to_string()))?;
        if tx.is_genesis() {
            if *id != ledger.genesis_id() {
                return Err(fail(*id, 1, "second genesis".into()));
            }
            continue;
        }
        let mut input_sum: u64 = 0;
        for r in tx.inputs() {
            if !set.contains(&r.tx_id) {
                return Err(fail(*id, 4, format!("input {r:?} is not produced inside the set")));
            }
            let out = ledger
                .output(r)
                .ok_or_else(|| fail(*id, 4, format!("input {r:?} does not exist")))?;
            if let Some(other) = consumed.insert(*r, *id) {
                return Err(fail(*id, 4, format!("{r:?} is also consumed by {other:?}")));
            }
            if out.condition != tx.unlock() {
                return Err(fail(*id, 3, format!("unlock does not match {r:?}")));
            }
            input_sum = input_sum
                .checked_add(out.value)
                .ok_or_else(|| fail(*id, 2, "input sum overflows".into()))?;
        }
        if Some(input_sum) != tx.output_sum() {
            return Err(fail(*id, 2, "inputs and outputs differ".into()));
        }
    }
    Ok(())
}

/// Union of the Conflict-DAG past cones of every conflict weighing at least θ.
pub fn minimal_confirmed_branch(rl: &RealityLedger, w: &WeightFn, cfg: &PruneConfig) -> Result<Branch, PruneError> {
    let view = rl.branches();
    let mut confirmed = Vec::new();
    for c in rl.conflicts().graph().vertices() {
        if w.weight(c)? >= cfg.theta() {
            confirmed.push(c);
        }
    }
    Ok(view.expand(confirmed)?)
}

impl RealityLedger {
    /// Removes everything conflicting with the branch `b` and demotes the
    /// conflicts left without a rival. Applies fully or not at all.
    pub fn prune(&mut self, b: &Branch) -> Result<PruneReport, PruneError> {
        let view = self.branches();
        let minimal = view.minimal_conflicts(b)?;
        if b.is_empty() {
            return Ok(PruneReport::default());
        }

        let mut dag = self.dag.clone();
        let mut cs = self.conflicts.clone();

        // conflicts conflicting with b
        let opposed: BTreeSet<TxId> = minimal
            .iter()
            .flat_map(|m| cs.graph().neighbours(m).iter().copied())
            .collect();
        let tops: Vec<TxId> = opposed
            .iter()
            .filter(|c| !cs.dag().conflict_parents(c).any(|p| opposed.contains(p)))
            .copied()
            .collect();
        let mut removed = BTreeSet::new();
        for y in &tops {
            removed.extend(dag.spend_edges().future_cone(y));
        }
        let old_conflicts = cs.conflicts();
        dag.remove_transactions(&removed);

        let demoted: BTreeSet<TxId> = old_conflicts
            .iter()
            .filter(|c| !removed.contains(*c) && dag.direct_rivals(c).is_empty())
            .copied()
            .collect();
        for d in &demoted {
            dag.demote_conflict(d);
        }

        let gone: BTreeSet<TxId> = old_conflicts
            .iter()
            .filter(|c| removed.contains(*c) || demoted.contains(*c))
            .copied()
            .collect();
        let orphaned: BTreeSet<TxId> = gone
            .iter()
            .flat_map(|g| cs.dag().children(g).iter().copied())
            .filter(|c| !gone.contains(c))
            .collect();
        for g in &gone {
            cs.dag_mut().remove_vertex(g);
            cs.graph_mut().remove_vertex(g);
        }
        for c in &orphaned {
            let stale: Vec<TxId> = cs.dag().parents(c).iter().copied().collect();
            for p in stale {
                cs.dag_mut().remove_edge(c, &p);
            }
            for p in closest_past_conflicts(&dag, c).expect("survivor is stored") {
                cs.dag_mut().add_edge(*c, p);
            }
        }

        self.dag = dag;
        self.conflicts = cs;
        Ok(PruneReport {
            removed_txs: removed.into_iter().collect(),
            demoted_conflicts: demoted.into_iter().collect(),
        })
    }
}
