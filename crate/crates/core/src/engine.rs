//! The ledger engine: Ledger DAG plus conflict structures, updated together.

use std::collections::BTreeSet;

use crate::branch::{Branch, BranchDagView};
use crate::conflict::{rebuild_from_ledger, ConflictStructures};
use crate::hash::TxId;
use crate::ledger::{AddOutcome, LedgerConfig, LedgerDag, LedgerError};
use crate::tx::Transaction;

#[derive(Debug, Clone)]
pub struct RealityLedger {
    pub(crate) dag: LedgerDag,
    pub(crate) conflicts: ConflictStructures,
}

impl RealityLedger {
    pub fn new(genesis: Transaction) -> Result<Self, LedgerError> {
        Self::with_config(genesis, LedgerConfig::default())
    }

    pub fn with_config(genesis: Transaction, config: LedgerConfig) -> Result<Self, LedgerError> {
        let dag = LedgerDag::with_config(genesis, config)?;
        let conflicts = ConflictStructures::new(dag.genesis_id());
        Ok(Self { dag, conflicts })
    }

    pub fn ledger(&self) -> &LedgerDag {
        &self.dag
    }

    pub fn conflicts(&self) -> &ConflictStructures {
        &self.conflicts
    }

    pub fn genesis_id(&self) -> TxId {
        self.dag.genesis_id()
    }

    pub fn branches(&self) -> BranchDagView<'_> {
        BranchDagView::new(&self.conflicts)
    }

    /// Adds `tx` and then every buffered transaction it unblocks.
    ///
    /// Returns the outcome for `tx` itself.
    pub fn add_transaction(&mut self, tx: Transaction) -> AddOutcome {
        let first = self.add_one(tx);
        if first.is_added() {
            self.drain_pending();
        }
        first
    }

    fn add_one(&mut self, tx: Transaction) -> AddOutcome {
        let id = tx.id();
        let outcome = self.dag.add_transaction(tx);
        if let AddOutcome::AddedAsConflict {
            directly_conflicting,
        } = &outcome
        {
            self.conflicts
                .on_new_conflict(&self.dag, id, directly_conflicting)
                .expect("freshly inserted transaction satisfies the update preconditions");
        }
        outcome
    }

    fn drain_pending(&mut self) {
        loop {
            let ready = self.dag.take_ready();
            if ready.is_empty() {
                return;
            }
            for tx in ready {
                self.add_one(tx);
            }
        }
    }

    /// The branch of all conflicts in the past cone of `x`.
    pub fn max_contained_branch(&self, x: &TxId) -> Result<Branch, LedgerError> {
        Ok(Branch::from_set_unchecked(self.dag.label_set(x)?.clone()))
    }

    /// True when the incremental structures equal a from-scratch rebuild.
    pub fn matches_rebuild(&self) -> bool {
        rebuild_from_ledger(&self.dag) == self.conflicts
    }

    pub fn conflict_ids(&self) -> BTreeSet<TxId> {
        self.conflicts.conflicts()
    }
}
