//! The Ledger DAG: append-only transaction store with spend edges,
//! double-spend bookkeeping, labels and maximal contained label sets.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::Serialize;

use crate::graph::Adjacency;
use crate::hash::TxId;
use crate::tx::{Label, Output, OutputRef, SyntaxError, Transaction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerConfig {
    /// Maximum number of buffered transactions waiting for parents.
    /// The oldest entry is evicted when a new one would exceed it.
    pub pending_capacity: usize,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        Self {
            pending_capacity: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    #[error("syntax: {0}")]
    Syntax(SyntaxError),
    #[error("a second input-less transaction")]
    SecondGenesis,
    #[error("input references a missing output index")]
    UnknownOutput,
    #[error("input values do not match output values")]
    ValueImbalance,
    #[error("unlock data does not satisfy a consumed output")]
    UnlockFailure,
    #[error("past cone would contain conflicting transactions")]
    PastConeDoubleSpend,
    #[error("spends from a rejected or dropped transaction")]
    RejectedAncestor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AddOutcome {
    Added,
    /// Appended; `directly_conflicting` are the earlier transactions that
    /// share at least one input with it.
    AddedAsConflict {
        directly_conflicting: BTreeSet<TxId>,
    },
    /// Some referenced transaction is not known yet.
    Buffered,
    /// Already stored or already buffered.
    Known,
    Rejected(RejectReason),
}

impl AddOutcome {
    pub fn is_added(&self) -> bool {
        matches!(self, AddOutcome::Added | AddOutcome::AddedAsConflict { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("unknown transaction {0:?}")]
    UnknownTx(TxId),
    #[error("transaction set is not past-closed: {0:?} has a parent outside it")]
    NotPastClosed(TxId),
    #[error("invalid genesis: {0}")]
    InvalidGenesis(&'static str),
}

/// Outputs of a transaction set that nothing in the set consumes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LedgerState {
    pub unspent: BTreeMap<OutputRef, Output>,
}

impl LedgerState {
    pub fn value_sum(&self) -> u128 {
        self.unspent.values().map(|o| o.value as u128).sum()
    }

    pub fn len(&self) -> usize {
        self.unspent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unspent.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LedgerDag {
    config: LedgerConfig,
    genesis_id: TxId,
    /// Insertion order is a topological order (parents first).
    transactions: IndexMap<TxId, Transaction>,
    spend_edges: Adjacency,
    consumers: BTreeMap<OutputRef, BTreeSet<TxId>>,
    /// Transactions whose label is their own id.
    conflicts: BTreeSet<TxId>,
    /// Non-bottom labels in each transaction's past cone (itself included).
    label_sets: BTreeMap<TxId, BTreeSet<TxId>>,
    pending: IndexMap<TxId, Transaction>,
    /// missing parent id -> buffered transactions waiting for it
    waiting: BTreeMap<TxId, BTreeSet<TxId>>,
    rejected: BTreeSet<TxId>,
    evicted: usize,
}

impl LedgerDag {
    pub fn new(genesis: Transaction) -> Result<Self, LedgerError> {
        Self::with_config(genesis, LedgerConfig::default())
    }

    pub fn with_config(genesis: Transaction, config: LedgerConfig) -> Result<Self, LedgerError> {
        if !genesis.is_genesis() {
            return Err(LedgerError::InvalidGenesis("genesis must not have inputs"));
        }
        if genesis.validate_syntax().is_err() {
            return Err(LedgerError::InvalidGenesis("genesis is not syntactically valid"));
        }
        let genesis_id = genesis.id();
        let mut spend_edges = Adjacency::default();
        spend_edges.add_vertex(genesis_id);
        let mut transactions = IndexMap::new();
        transactions.insert(genesis_id, genesis);
        Ok(Self {
            config,
            genesis_id,
            transactions,
            spend_edges,
            consumers: BTreeMap::new(),
            conflicts: BTreeSet::new(),
            label_sets: BTreeMap::from([(genesis_id, BTreeSet::new())]),
            pending: IndexMap::new(),
            waiting: BTreeMap::new(),
            rejected: BTreeSet::new(),
            evicted: 0,
        })
    }

    pub fn genesis_id(&self) -> TxId {
        self.genesis_id
    }

    pub fn genesis(&self) -> &Transaction {
        &self.transactions[&self.genesis_id]
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn contains(&self, id: &TxId) -> bool {
        self.transactions.contains_key(id)
    }

    pub fn get(&self, id: &TxId) -> Option<&Transaction> {
        self.transactions.get(id)
    }

    fn require(&self, id: &TxId) -> Result<&Transaction, LedgerError> {
        self.transactions.get(id).ok_or(LedgerError::UnknownTx(*id))
    }

    /// Transactions in insertion (topological) order.
    pub fn transactions(&self) -> impl Iterator<Item = &Transaction> {
        self.transactions.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &TxId> {
        self.transactions.keys()
    }

    pub fn spend_edges(&self) -> &Adjacency {
        &self.spend_edges
    }

    pub fn parents(&self, id: &TxId) -> &BTreeSet<TxId> {
        self.spend_edges.parents(id)
    }

    pub fn children(&self, id: &TxId) -> &BTreeSet<TxId> {
        self.spend_edges.children(id)
    }

    pub fn consumers(&self, output: &OutputRef) -> Option<&BTreeSet<TxId>> {
        self.consumers.get(output)
    }

    pub fn output(&self, r: &OutputRef) -> Option<&Output> {
        self.transactions
            .get(&r.tx_id)
            .and_then(|tx| tx.outputs().get(r.index as usize))
    }

    pub fn conflicts(&self) -> &BTreeSet<TxId> {
        &self.conflicts
    }

    pub fn is_conflict(&self, id: &TxId) -> bool {
        self.conflicts.contains(id)
    }

    pub fn label(&self, id: &TxId) -> Label {
        if self.conflicts.contains(id) {
            Label::Conflict(*id)
        } else {
            Label::Bot
        }
    }

    /// Non-bottom labels of the past cone. Empty set means "{⊥}".
    pub fn label_set(&self, id: &TxId) -> Result<&BTreeSet<TxId>, LedgerError> {
        self.label_sets.get(id).ok_or(LedgerError::UnknownTx(*id))
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn pending_ids(&self) -> impl Iterator<Item = &TxId> {
        self.pending.keys()
    }

    pub fn evicted(&self) -> usize {
        self.evicted
    }

    pub fn rejected(&self) -> &BTreeSet<TxId> {
        &self.rejected
    }

    /// Transactions sharing at least one input with `id`.
    pub fn direct_rivals(&self, id: &TxId) -> BTreeSet<TxId> {
        let Some(tx) = self.transactions.get(id) else {
            return BTreeSet::new();
        };
        tx.inputs()
            .iter()
            .filter_map(|r| self.consumers.get(r))
            .flatten()
            .filter(|c| *c != id)
            .copied()
            .collect()
    }

    pub fn past_cone(&self, id: &TxId) -> Result<BTreeSet<TxId>, LedgerError> {
        self.require(id)?;
        Ok(self.spend_edges.past_cone(id))
    }

    pub fn future_cone(&self, id: &TxId) -> Result<BTreeSet<TxId>, LedgerError> {
        self.require(id)?;
        Ok(self.spend_edges.future_cone(id))
    }

    /// Unspent outputs of a past-closed transaction set.
    pub fn ledger_state<'a, I>(&self, txs: I) -> Result<LedgerState, LedgerError>
    where
        I: IntoIterator<Item = &'a TxId>,
    {
        let set: BTreeSet<TxId> = txs.into_iter().copied().collect();
        let mut unspent = BTreeMap::new();
        for id in &set {
            let tx = self.require(id)?;
            if self.parents(id).iter().any(|p| !set.contains(p)) {
                return Err(LedgerError::NotPastClosed(*id));
            }
            for (r, o) in tx.output_refs() {
                let consumed = self
                    .consumers
                    .get(&r)
                    .is_some_and(|cs| cs.iter().any(|c| set.contains(c)));
                if !consumed {
                    unspent.insert(r, o.clone());
                }
            }
        }
        Ok(LedgerState { unspent })
    }

    /// Directly (shared input) or indirectly (via directly conflicting
    /// transactions in the two past cones) conflicting.
    pub fn are_conflicting(&self, x: &TxId, y: &TxId) -> Result<bool, LedgerError> {
        let lx = self.label_set(x)?;
        let ly = self.label_set(y)?;
        if x == y {
            return Ok(false);
        }
        Ok(lx
            .iter()
            .any(|c| self.direct_rivals(c).iter().any(|d| ly.contains(d))))
    }

    pub fn max_contained_label_set(&self, id: &TxId) -> Result<BTreeSet<Label>, LedgerError> {
        let mut out = BTreeSet::from([Label::Bot]);
        out.extend(self.label_set(id)?.iter().map(|c| Label::Conflict(*c)));
        Ok(out)
    }

    /// Appends a single transaction if it satisfies the ledger constraints.
    ///
    /// Buffered transactions are not retried here; see [`LedgerDag::take_ready`].
    pub fn add_transaction(&mut self, tx: Transaction) -> AddOutcome {
        let id = tx.id();
        if self.transactions.contains_key(&id) || self.pending.contains_key(&id) {
            return AddOutcome::Known;
        }
        if self.rejected.contains(&id) {
            return AddOutcome::Rejected(RejectReason::RejectedAncestor);
        }
        if let Err(e) = tx.validate_syntax() {
            return self.reject(id, RejectReason::Syntax(e));
        }
        if tx.is_genesis() {
            return self.reject(id, RejectReason::SecondGenesis);
        }
        let parents = tx.parent_ids();
        if parents.iter().any(|p| self.rejected.contains(p)) {
            return self.reject(id, RejectReason::RejectedAncestor);
        }
        let missing: Vec<TxId> = parents
            .iter()
            .filter(|p| !self.transactions.contains_key(*p))
            .copied()
            .collect();
        if !missing.is_empty() {
            self.buffer(tx, missing);
            return AddOutcome::Buffered;
        }
        if let Err(reason) = self.check_constraints(&tx, &parents) {
            return self.reject(id, reason);
        }
        self.insert(tx, parents)
    }

    /// Removes and returns buffered transactions whose parents are all present.
    pub fn take_ready(&mut self) -> Vec<Transaction> {
        let ready: Vec<TxId> = self
            .pending
            .iter()
            .filter(|(_, tx)| tx.parent_ids().iter().all(|p| self.transactions.contains_key(p)))
            .map(|(id, _)| *id)
            .collect();
        ready
            .into_iter()
            .filter_map(|id| self.unbuffer(&id))
            .collect()
    }

    fn buffer(&mut self, tx: Transaction, missing: Vec<TxId>) {
        let id = tx.id();
        while self.pending.len() >= self.config.pending_capacity.max(1) {
            let Some((old, _)) = self.pending.first() else {
                break;
            };
            let old = *old;
            self.unbuffer(&old);
            self.evicted += 1;
        }
        for m in missing {
            self.waiting.entry(m).or_default().insert(id);
        }
        self.pending.insert(id, tx);
    }

    fn unbuffer(&mut self, id: &TxId) -> Option<Transaction> {
        let tx = self.pending.shift_remove(id)?;
        for p in tx.parent_ids() {
            if let Some(w) = self.waiting.get_mut(&p) {
                w.remove(id);
                if w.is_empty() {
                    self.waiting.remove(&p);
                }
            }
        }
        Some(tx)
    }

    /// Records a rejection and drops every buffered descendant.
    fn reject(&mut self, id: TxId, reason: RejectReason) -> AddOutcome {
        let mut stack = vec![id];
        while let Some(r) = stack.pop() {
            if !self.rejected.insert(r) && r != id {
                continue;
            }
            if let Some(waiters) = self.waiting.remove(&r) {
                for w in waiters {
                    self.unbuffer(&w);
                    stack.push(w);
                }
            }
        }
        AddOutcome::Rejected(reason)
    }

    fn check_constraints(&self, tx: &Transaction, parents: &BTreeSet<TxId>) -> Result<(), RejectReason> {
        let mut input_sum: u64 = 0;
        for r in tx.inputs() {
            let out = self.output(r).ok_or(RejectReason::UnknownOutput)?;
            if out.condition != tx.unlock() {
                return Err(RejectReason::UnlockFailure);
            }
            input_sum = input_sum
                .checked_add(out.value)
                .ok_or(RejectReason::ValueImbalance)?;
        }
        if Some(input_sum) != tx.output_sum() {
            return Err(RejectReason::ValueImbalance);
        }

        // The new past cone is {tx} ∪ the parents' past cones. It must not
        // contain two transactions that share an input.
        let inherited: BTreeSet<TxId> = parents
            .iter()
            .flat_map(|p| self.label_sets[p].iter().copied())
            .collect();
        for c in &inherited {
            if self.direct_rivals(c).iter().any(|d| inherited.contains(d)) {
                return Err(RejectReason::PastConeDoubleSpend);
            }
        }
        let rivals: BTreeSet<TxId> = tx
            .inputs()
            .iter()
            .filter_map(|r| self.consumers.get(r))
            .flatten()
            .copied()
            .collect();
        if !rivals.is_empty() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<TxId> = parents.iter().copied().collect();
            while let Some(v) = stack.pop() {
                if !seen.insert(v) {
                    continue;
                }
                if rivals.contains(&v) {
                    return Err(RejectReason::PastConeDoubleSpend);
                }
                stack.extend(self.parents(&v).iter().copied());
            }
        }
        Ok(())
    }

    fn insert(&mut self, tx: Transaction, parents: BTreeSet<TxId>) -> AddOutcome {
        let id = tx.id();
        let mut rivals = BTreeSet::new();
        for r in tx.inputs() {
            let cs = self.consumers.entry(*r).or_default();
            rivals.extend(cs.iter().copied());
            cs.insert(id);
        }
        let mut labels = BTreeSet::new();
        self.spend_edges.add_vertex(id);
        for p in &parents {
            self.spend_edges.add_edge(id, *p);
            labels.extend(self.label_sets[p].iter().copied());
        }
        self.label_sets.insert(id, labels);
        self.transactions.insert(id, tx);

        if rivals.is_empty() {
            return AddOutcome::Added;
        }
        let fresh: Vec<TxId> = rivals
            .iter()
            .chain(std::iter::once(&id))
            .filter(|c| !self.conflicts.contains(*c))
            .copied()
            .collect();
        for c in fresh {
            self.mark_conflict(c);
        }
        AddOutcome::AddedAsConflict {
            directly_conflicting: rivals,
        }
    }

    /// Sets `label(c) = c` and pushes the label through the future cone.
    fn mark_conflict(&mut self, c: TxId) {
        self.conflicts.insert(c);
        for z in self.spend_edges.future_cone(&c) {
            self.label_sets.get_mut(&z).unwrap().insert(c);
        }
    }

    /// Resets `label(c)` to bottom and removes it from every label set.
    pub(crate) fn demote_conflict(&mut self, c: &TxId) {
        if !self.conflicts.remove(c) {
            return;
        }
        for z in self.spend_edges.future_cone(c) {
            self.label_sets.get_mut(&z).unwrap().remove(c);
        }
    }

    /// Removes a future-closed set of transactions. Genesis is never removed.
    /// Removed ids are remembered as rejected, so late descendants are dropped.
    pub(crate) fn remove_transactions(&mut self, ids: &BTreeSet<TxId>) {
        for id in ids {
            if *id == self.genesis_id {
                continue;
            }
            let Some(tx) = self.transactions.shift_remove(id) else {
                continue;
            };
            self.reject(*id, RejectReason::RejectedAncestor);
            for r in tx.inputs() {
                if let Some(cs) = self.consumers.get_mut(r) {
                    cs.remove(id);
                    if cs.is_empty() {
                        self.consumers.remove(r);
                    }
                }
            }
            self.spend_edges.remove_vertex(id);
            self.label_sets.remove(id);
            self.conflicts.remove(id);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::Hash256;
    use crate::tx::make_genesis;

    const KEY: &[u8] = &[7];

    fn genesis(values: &[u64]) -> Transaction {
        make_genesis(values.iter().map(|v| Output::new(*v, KEY)).collect()).unwrap()
    }

    fn spend(inputs: &[OutputRef], values: &[u64], ts: u64) -> Transaction {
        Transaction::new(
            inputs.to_vec(),
            values.iter().map(|v| Output::new(*v, KEY)).collect(),
            KEY,
            ts,
        )
    }

    #[test]
    fn balanced_spend_is_added() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let x = spend(&[g.output_ref(0)], &[60, 40], 1);
        assert_eq!(l.add_transaction(x.clone()), AddOutcome::Added);
        assert_eq!(l.past_cone(&x.id()).unwrap(), BTreeSet::from([x.id(), g.id()]));
        assert_eq!(l.past_cone(&g.id()).unwrap(), BTreeSet::from([g.id()]));
        assert_eq!(
            l.max_contained_label_set(&x.id()).unwrap(),
            BTreeSet::from([Label::Bot])
        );
    }

    #[test]
    fn double_spend_marks_both_as_conflicts() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let x = spend(&[g.output_ref(0)], &[60, 40], 1);
        let y = spend(&[g.output_ref(0)], &[100], 2);
        l.add_transaction(x.clone());
        assert_eq!(
            l.add_transaction(y.clone()),
            AddOutcome::AddedAsConflict {
                directly_conflicting: BTreeSet::from([x.id()])
            }
        );
        assert_eq!(l.label(&x.id()), Label::Conflict(x.id()));
        assert_eq!(l.label(&y.id()), Label::Conflict(y.id()));
        assert_eq!(l.label(&g.id()), Label::Bot);
        assert!(l.are_conflicting(&x.id(), &y.id()).unwrap());
        assert!(!l.are_conflicting(&x.id(), &x.id()).unwrap());
    }

    #[test]
    fn label_propagates_into_existing_future_cone() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let x = spend(&[g.output_ref(0)], &[100], 1);
        let child = spend(&[x.output_ref(0)], &[100], 2);
        l.add_transaction(x.clone());
        l.add_transaction(child.clone());
        assert!(l.label_set(&child.id()).unwrap().is_empty());
        let y = spend(&[g.output_ref(0)], &[100], 3);
        l.add_transaction(y.clone());
        assert_eq!(
            l.max_contained_label_set(&child.id()).unwrap(),
            BTreeSet::from([Label::Bot, Label::Conflict(x.id())])
        );
        assert!(l.are_conflicting(&child.id(), &y.id()).unwrap());
    }

    #[test]
    fn spending_both_sides_of_a_double_spend_is_rejected() {
        let g = genesis(&[100, 50]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let x = spend(&[g.output_ref(0)], &[100], 1);
        let y = spend(&[g.output_ref(0), g.output_ref(1)], &[150], 2);
        l.add_transaction(x.clone());
        l.add_transaction(y.clone());
        let z = spend(&[x.output_ref(0), y.output_ref(0)], &[250], 3);
        assert_eq!(
            l.add_transaction(z),
            AddOutcome::Rejected(RejectReason::PastConeDoubleSpend)
        );
    }

    #[test]
    fn spending_an_output_already_consumed_in_own_past_is_rejected() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let x = spend(&[g.output_ref(0)], &[100], 1);
        l.add_transaction(x.clone());
        // consumes (g,0) again while also spending from x, which consumed it
        let z = Transaction::new(
            vec![g.output_ref(0), x.output_ref(0)],
            vec![Output::new(200, KEY)],
            KEY,
            2,
        );
        assert_eq!(
            l.add_transaction(z),
            AddOutcome::Rejected(RejectReason::PastConeDoubleSpend)
        );
    }

    #[test]
    fn value_and_unlock_checks() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let unbalanced = spend(&[g.output_ref(0)], &[99], 1);
        assert_eq!(
            l.add_transaction(unbalanced),
            AddOutcome::Rejected(RejectReason::ValueImbalance)
        );
        let wrong_key = Transaction::new(vec![g.output_ref(0)], vec![Output::new(100, KEY)], [9], 1);
        assert_eq!(
            l.add_transaction(wrong_key),
            AddOutcome::Rejected(RejectReason::UnlockFailure)
        );
        let bad_index = spend(&[g.output_ref(3)], &[100], 1);
        assert_eq!(
            l.add_transaction(bad_index),
            AddOutcome::Rejected(RejectReason::UnknownOutput)
        );
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn out_of_order_arrival_is_buffered() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let x = spend(&[g.output_ref(0)], &[100], 1);
        let child = spend(&[x.output_ref(0)], &[100], 2);
        assert_eq!(l.add_transaction(child.clone()), AddOutcome::Buffered);
        assert_eq!(l.add_transaction(child.clone()), AddOutcome::Known);
        assert!(l.take_ready().is_empty());
        assert_eq!(l.add_transaction(x), AddOutcome::Added);
        let ready = l.take_ready();
        assert_eq!(ready, vec![child.clone()]);
        assert_eq!(l.pending_len(), 0);
        assert_eq!(l.add_transaction(child), AddOutcome::Added);
    }

    #[test]
    fn descendants_of_rejected_transactions_are_dropped() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let bad = spend(&[g.output_ref(0)], &[90], 1);
        let child = spend(&[bad.output_ref(0)], &[90], 2);
        assert_eq!(l.add_transaction(child.clone()), AddOutcome::Buffered);
        assert!(matches!(l.add_transaction(bad), AddOutcome::Rejected(_)));
        assert_eq!(l.pending_len(), 0);
        assert!(l.rejected().contains(&child.id()));
        assert_eq!(
            l.add_transaction(child),
            AddOutcome::Rejected(RejectReason::RejectedAncestor)
        );
    }

    #[test]
    fn pending_buffer_evicts_oldest() {
        let g = genesis(&[100]);
        let mut l = LedgerDag::with_config(g.clone(), LedgerConfig { pending_capacity: 2 }).unwrap();
        let phantom = Hash256([9; 32]);
        let orphans: Vec<Transaction> = (0..3)
            .map(|i| spend(&[OutputRef::new(phantom, i)], &[1], i as u64))
            .collect();
        for o in &orphans {
            assert_eq!(l.add_transaction(o.clone()), AddOutcome::Buffered);
        }
        assert_eq!(l.pending_len(), 2);
        assert_eq!(l.evicted(), 1);
        assert!(!l.pending_ids().any(|id| *id == orphans[0].id()));
    }

    #[test]
    fn ledger_state_and_conservation() {
        let g = genesis(&[100, 20]);
        let mut l = LedgerDag::new(g.clone()).unwrap();
        let x = spend(&[g.output_ref(0)], &[60, 40], 1);
        l.add_transaction(x.clone());

        let s = l.ledger_state(&[g.id()]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.value_sum(), 120);

        let s = l.ledger_state(&[g.id(), x.id()]).unwrap();
        let keys: Vec<OutputRef> = s.unspent.keys().copied().collect();
        let mut expected = vec![g.output_ref(1), x.output_ref(0), x.output_ref(1)];
        expected.sort();
        assert_eq!(keys, expected);
        assert_eq!(s.value_sum(), 120);

        assert_eq!(
            l.ledger_state(&[x.id()]),
            Err(LedgerError::NotPastClosed(x.id()))
        );
    }

    #[test]
    fn unknown_ids_are_errors() {
        let g = genesis(&[1]);
        let l = LedgerDag::new(g).unwrap();
        let ghost = Hash256([3; 32]);
        assert_eq!(l.past_cone(&ghost), Err(LedgerError::UnknownTx(ghost)));
        assert!(l.are_conflicting(&ghost, &ghost).is_err());
        assert!(l.max_contained_label_set(&ghost).is_err());
    }

    #[test]
    fn genesis_must_be_input_less() {
        let g = genesis(&[1]);
        let not_genesis = spend(&[g.output_ref(0)], &[1], 0);
        assert!(LedgerDag::new(not_genesis).is_err());
        let mut l = LedgerDag::new(g).unwrap();
        let other = genesis(&[5]);
        assert_eq!(
            l.add_transaction(other),
            AddOutcome::Rejected(RejectReason::SecondGenesis)
        );
    }
}
