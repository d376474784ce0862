//! Conflict DAG and Conflict Graph, maintained incrementally on every new
//! double spend.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{minimal_elements, Adjacency};
use crate::hash::TxId;
use crate::ledger::{LedgerDag, LedgerError};
use crate::tx::OutputRef;

/// Minimal subDAG of the Ledger DAG induced by the conflicts and genesis.
/// Edges point from child to parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictDag {
    genesis: TxId,
    edges: Adjacency,
}

impl ConflictDag {
    fn new(genesis: TxId) -> Self {
        let mut edges = Adjacency::default();
        edges.add_vertex(genesis);
        Self { genesis, edges }
    }

    pub fn genesis(&self) -> TxId {
        self.genesis
    }

    pub fn contains(&self, c: &TxId) -> bool {
        self.edges.contains(c)
    }

    /// Conflict vertices, genesis excluded.
    pub fn conflicts(&self) -> impl Iterator<Item = &TxId> {
        let g = self.genesis;
        self.edges.vertices().filter(move |v| **v != g)
    }

    pub fn parents(&self, c: &TxId) -> &BTreeSet<TxId> {
        self.edges.parents(c)
    }

    pub fn children(&self, c: &TxId) -> &BTreeSet<TxId> {
        self.edges.children(c)
    }

    /// Parents other than genesis.
    pub fn conflict_parents(&self, c: &TxId) -> impl Iterator<Item = &TxId> {
        let g = self.genesis;
        self.parents(c).iter().filter(move |p| **p != g)
    }

    pub fn edges(&self) -> Vec<(TxId, TxId)> {
        self.edges.edges()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.edges().len()
    }

    /// Conflict-DAG past cone of `c` without genesis, `c` included.
    pub fn past_cone(&self, c: &TxId) -> BTreeSet<TxId> {
        let mut cone = self.edges.past_cone(c);
        cone.remove(&self.genesis);
        cone
    }

    /// Conflict-DAG future cone of `c`, `c` included.
    pub fn future_cone(&self, c: &TxId) -> BTreeSet<TxId> {
        self.edges.future_cone(c)
    }

    /// Length of the longest path from `c` up to genesis.
    pub fn depth(&self, c: &TxId) -> usize {
        let mut memo = BTreeMap::new();
        self.depth_memo(c, &mut memo)
    }

    fn depth_memo(&self, c: &TxId, memo: &mut BTreeMap<TxId, usize>) -> usize {
        if let Some(d) = memo.get(c) {
            return *d;
        }
        let d = self
            .parents(c)
            .iter()
            .map(|p| self.depth_memo(p, memo) + 1)
            .max()
            .unwrap_or(0);
        memo.insert(*c, d);
        d
    }

    pub(crate) fn add_edge(&mut self, child: TxId, parent: TxId) {
        self.edges.add_edge(child, parent);
    }

    pub(crate) fn add_vertex(&mut self, c: TxId) {
        self.edges.add_vertex(c);
    }

    pub(crate) fn remove_edge(&mut self, child: &TxId, parent: &TxId) {
        self.edges.remove_edge(child, parent);
    }

    pub(crate) fn remove_vertex(&mut self, c: &TxId) {
        self.edges.remove_vertex(c);
    }
}

/// Undirected graph over conflicts; an edge joins every conflicting pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConflictGraph {
    adj: BTreeMap<TxId, BTreeSet<TxId>>,
}

static NO_NEIGHBOURS: BTreeSet<TxId> = BTreeSet::new();

impl ConflictGraph {
    pub fn vertices(&self) -> impl Iterator<Item = &TxId> {
        self.adj.keys()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn contains(&self, c: &TxId) -> bool {
        self.adj.contains_key(c)
    }

    pub fn neighbours(&self, c: &TxId) -> &BTreeSet<TxId> {
        self.adj.get(c).unwrap_or(&NO_NEIGHBOURS)
    }

    pub fn has_edge(&self, a: &TxId, b: &TxId) -> bool {
        self.neighbours(a).contains(b)
    }

    /// Sorted `(a, b)` pairs with `a < b`.
    pub fn edges(&self) -> Vec<(TxId, TxId)> {
        self.adj
            .iter()
            .flat_map(|(a, ns)| ns.iter().filter(move |b| a < *b).map(move |b| (*a, *b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub(crate) fn add_vertex(&mut self, c: TxId) {
        self.adj.entry(c).or_default();
    }

    pub(crate) fn add_edge(&mut self, a: TxId, b: TxId) {
        if a == b {
            return;
        }
        self.adj.entry(a).or_default().insert(b);
        self.adj.entry(b).or_default().insert(a);
    }

    pub(crate) fn remove_vertex(&mut self, c: &TxId) {
        if let Some(ns) = self.adj.remove(c) {
            for n in ns {
                if let Some(s) = self.adj.get_mut(&n) {
                    s.remove(c);
                }
            }
        }
    }
}

/// Conflict set, Conflict DAG and Conflict Graph kept in step with a ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictStructures {
    dag: ConflictDag,
    graph: ConflictGraph,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConflictError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("{0:?} is not a leaf of the Ledger DAG")]
    NotALeaf(TxId),
    #[error("{0:?} does not share an input with {1:?}")]
    NotDirectlyConflicting(TxId, TxId),
}

impl ConflictStructures {
    pub fn new(genesis: TxId) -> Self {
        Self {
            dag: ConflictDag::new(genesis),
            graph: ConflictGraph::default(),
        }
    }

    pub fn dag(&self) -> &ConflictDag {
        &self.dag
    }

    pub fn graph(&self) -> &ConflictGraph {
        &self.graph
    }

    pub fn genesis(&self) -> TxId {
        self.dag.genesis
    }

    pub fn conflicts(&self) -> BTreeSet<TxId> {
        self.dag.conflicts().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn is_conflict(&self, c: &TxId) -> bool {
        self.graph.contains(c)
    }

    pub(crate) fn dag_mut(&mut self) -> &mut ConflictDag {
        &mut self.dag
    }

    pub(crate) fn graph_mut(&mut self) -> &mut ConflictGraph {
        &mut self.graph
    }

    /// Applies both incremental updates for a transaction `x` that directly
    /// conflicts with `ys`.
    pub fn on_new_conflict(
        &mut self,
        ledger: &LedgerDag,
        x: TxId,
        ys: &BTreeSet<TxId>,
    ) -> Result<(), ConflictError> {
        let fresh = self.register_conflict(ledger, x, ys)?;
        self.update_conflict_graph(x, ys, &fresh);
        Ok(())
    }

    /// Conflict DAG update. Returns the conflicts that were not known before.
    pub fn register_conflict(
        &mut self,
        ledger: &LedgerDag,
        x: TxId,
        ys: &BTreeSet<TxId>,
    ) -> Result<BTreeSet<TxId>, ConflictError> {
        if !ledger.children(&x).is_empty() {
            return Err(ConflictError::NotALeaf(x));
        }
        let rivals = ledger.direct_rivals(&x);
        if let Some(y) = ys.iter().find(|y| !rivals.contains(*y)) {
            return Err(ConflictError::NotDirectlyConflicting(x, *y));
        }

        let fresh: BTreeSet<TxId> = ys
            .iter()
            .chain(std::iter::once(&x))
            .filter(|c| !self.dag.contains(c))
            .copied()
            .collect();
        for y in &fresh {
            self.dag.add_vertex(*y);
            self.graph.add_vertex(*y);
        }
        for y in &fresh {
            for v in closest_past_conflicts(ledger, y)? {
                self.dag.add_edge(*y, v);
            }
            for v in closest_future_conflicts(ledger, y)? {
                self.dag.add_edge(v, *y);
            }
        }
        for y in fresh.iter().filter(|y| **y != x) {
            let below = self.dag.future_cone(y);
            let parents: Vec<TxId> = self.dag.parents(y).iter().copied().collect();
            for p in parents {
                let stale: Vec<TxId> = self
                    .dag
                    .children(&p)
                    .iter()
                    .filter(|c| *c != y && below.contains(*c))
                    .copied()
                    .collect();
                for c in stale {
                    self.dag.remove_edge(&c, &p);
                }
            }
        }
        Ok(fresh)
    }

    /// Conflict Graph update; expects the Conflict DAG to be current.
    pub fn update_conflict_graph(&mut self, x: TxId, ys: &BTreeSet<TxId>, fresh: &BTreeSet<TxId>) {
        self.graph.add_vertex(x);
        for y in ys {
            for z in self.dag.future_cone(y) {
                self.graph.add_edge(x, z);
            }
        }
        // Ancestors first, so inherited neighbourhoods are already complete.
        let mut order: Vec<(usize, TxId)> = ys
            .iter()
            .chain(std::iter::once(&x))
            .filter(|y| fresh.contains(*y))
            .map(|y| (self.dag.depth(y), *y))
            .collect();
        order.sort();
        for (_, y) in order {
            let inherited: BTreeSet<TxId> = self
                .dag
                .conflict_parents(&y)
                .flat_map(|p| self.graph.neighbours(p).iter().copied())
                .collect();
            for z in inherited {
                self.graph.add_edge(y, z);
            }
        }
    }
}

/// Nearest conflicts (or genesis) strictly in the past of `z`.
pub fn closest_past_conflicts(ledger: &LedgerDag, z: &TxId) -> Result<BTreeSet<TxId>, LedgerError> {
    ledger.label_set(z)?;
    let mut met = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack: Vec<TxId> = ledger.parents(z).iter().copied().collect();
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        if ledger.is_conflict(&v) {
            met.insert(v);
        } else {
            stack.extend(ledger.parents(&v).iter().copied());
        }
    }
    if met.is_empty() {
        return Ok(BTreeSet::from([ledger.genesis_id()]));
    }
    // u is not closest if it lies in the past of another met conflict
    Ok(minimal_elements(&met, |v, u| {
        ledger.label_set(v).is_ok_and(|ls| ls.contains(u))
    }))
}

/// Nearest conflicts strictly in the future of `z`.
pub fn closest_future_conflicts(ledger: &LedgerDag, z: &TxId) -> Result<BTreeSet<TxId>, LedgerError> {
    ledger.label_set(z)?;
    let mut met = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack: Vec<TxId> = ledger.children(z).iter().copied().collect();
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        if ledger.is_conflict(&v) {
            met.insert(v);
        } else {
            stack.extend(ledger.children(&v).iter().copied());
        }
    }
    // u is not closest if another met conflict lies in its past
    Ok(minimal_elements(&met, |v, u| {
        ledger.label_set(u).is_ok_and(|ls| ls.contains(v))
    }))
}

/// From-scratch Conflict DAG and Conflict Graph, built from reachability and
/// shared inputs only (no labels, no incremental state).
pub fn rebuild_from_ledger(ledger: &LedgerDag) -> ConflictStructures {
    let mut consumers: BTreeMap<OutputRef, Vec<TxId>> = BTreeMap::new();
    for tx in ledger.transactions() {
        for r in tx.inputs() {
            consumers.entry(*r).or_default().push(tx.id());
        }
    }
    let conflicts: BTreeSet<TxId> = consumers
        .values()
        .filter(|cs| cs.len() > 1)
        .flatten()
        .copied()
        .collect();

    let genesis = ledger.genesis_id();
    let mut out = ConflictStructures::new(genesis);
    let cones: BTreeMap<TxId, BTreeSet<TxId>> = conflicts
        .iter()
        .map(|c| (*c, ledger.spend_edges().past_cone(c)))
        .collect();
    for c in &conflicts {
        out.dag.add_vertex(*c);
        out.graph.add_vertex(*c);
        let above: BTreeSet<TxId> = cones[c]
            .iter()
            .filter(|v| *v != c && conflicts.contains(*v))
            .copied()
            .collect();
        if above.is_empty() {
            out.dag.add_edge(*c, genesis);
            continue;
        }
        for p in minimal_elements(&above, |v, u| cones[v].contains(u)) {
            out.dag.add_edge(*c, p);
        }
    }

    // consumed output -> consumer, per past cone
    let spent: BTreeMap<TxId, BTreeMap<OutputRef, TxId>> = cones
        .iter()
        .map(|(c, cone)| {
            let m = cone
                .iter()
                .flat_map(|t| {
                    let tx = ledger.get(t).expect("cone member is stored");
                    tx.inputs().iter().map(move |r| (*r, *t))
                })
                .collect();
            (*c, m)
        })
        .collect();
    let list: Vec<TxId> = conflicts.iter().copied().collect();
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            let (sa, sb) = (&spent[a], &spent[b]);
            let clash = sa
                .iter()
                .any(|(r, ca)| sb.get(r).is_some_and(|cb| cb != ca));
            if clash {
                out.graph.add_edge(*a, *b);
            }
        }
    }
    out
}
