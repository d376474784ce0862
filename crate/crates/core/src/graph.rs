//! Small traversal helpers shared by the ledger, conflict and branch code.
//!
//! Edges always point from a vertex to its parents (spender to producer), so
//! "up" walks towards genesis and "down" walks towards the tips.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::hash::TxId;

/// Directed adjacency indexed both ways.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Adjacency {
    parents: BTreeMap<TxId, BTreeSet<TxId>>,
    children: BTreeMap<TxId, BTreeSet<TxId>>,
}

static EMPTY: BTreeSet<TxId> = BTreeSet::new();

impl Adjacency {
    pub fn add_vertex(&mut self, v: TxId) {
        self.parents.entry(v).or_default();
        self.children.entry(v).or_default();
    }

    pub fn contains(&self, v: &TxId) -> bool {
        self.parents.contains_key(v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &TxId> {
        self.parents.keys()
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// Adds `child -> parent`. Both endpoints are created if missing.
    pub fn add_edge(&mut self, child: TxId, parent: TxId) -> bool {
        self.add_vertex(child);
        self.add_vertex(parent);
        self.children.get_mut(&parent).unwrap().insert(child);
        self.parents.get_mut(&child).unwrap().insert(parent)
    }

    pub fn remove_edge(&mut self, child: &TxId, parent: &TxId) -> bool {
        if let Some(c) = self.children.get_mut(parent) {
            c.remove(child);
        }
        self.parents
            .get_mut(child)
            .map(|p| p.remove(parent))
            .unwrap_or(false)
    }

    /// Drops `v` and every incident edge.
    pub fn remove_vertex(&mut self, v: &TxId) {
        if let Some(ps) = self.parents.remove(v) {
            for p in ps {
                if let Some(c) = self.children.get_mut(&p) {
                    c.remove(v);
                }
            }
        }
        if let Some(cs) = self.children.remove(v) {
            for c in cs {
                if let Some(p) = self.parents.get_mut(&c) {
                    p.remove(v);
                }
            }
        }
    }

    pub fn parents(&self, v: &TxId) -> &BTreeSet<TxId> {
        self.parents.get(v).unwrap_or(&EMPTY)
    }

    pub fn children(&self, v: &TxId) -> &BTreeSet<TxId> {
        self.children.get(v).unwrap_or(&EMPTY)
    }

    pub fn has_edge(&self, child: &TxId, parent: &TxId) -> bool {
        self.parents(child).contains(parent)
    }

    /// All edges as sorted `(child, parent)` pairs.
    pub fn edges(&self) -> Vec<(TxId, TxId)> {
        self.parents
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (*c, *p)))
            .collect()
    }

    /// Reflexive past cone: `v` and everything reachable through parents.
    pub fn past_cone(&self, v: &TxId) -> BTreeSet<TxId> {
        bfs(*v, |x| self.parents(x).iter().copied())
    }

    /// Reflexive future cone: `v` and everything reachable through children.
    pub fn future_cone(&self, v: &TxId) -> BTreeSet<TxId> {
        bfs(*v, |x| self.children(x).iter().copied())
    }
}

/// Reflexive breadth-first closure from `start`.
pub fn bfs<I, F>(start: TxId, mut next: F) -> BTreeSet<TxId>
where
    F: FnMut(&TxId) -> I,
    I: IntoIterator<Item = TxId>,
{
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for n in next(&v) {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

/// D-minimal elements of `set`: those `u` with no other `v` in the set such
/// that `below(v, u)`, i.e. `v` (transitively) spends from `u`.
pub fn minimal_elements<F>(set: &BTreeSet<TxId>, mut below: F) -> BTreeSet<TxId>
where
    F: FnMut(&TxId, &TxId) -> bool,
{
    set.iter()
        .filter(|u| !set.iter().any(|v| v != *u && below(v, u)))
        .copied()
        .collect()
}
