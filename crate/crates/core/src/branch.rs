//! Branches and the lazily navigated Branch DAG.
//!
//! A branch is a conflict-free set of conflicts that is closed under the
//! Conflict-DAG past. The Branch DAG over all branches can be exponential in
//! the number of conflicts, so it is never stored: [`BranchDagView`] answers
//! child queries on demand and only materializes small instances.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::conflict::ConflictStructures;
use crate::hash::{Hash256, TxId};

/// A set of conflicts. The empty branch is the main branch.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Branch(BTreeSet<TxId>);

impl Branch {
    pub fn main() -> Self {
        Self::default()
    }

    /// Wraps a set without checking the branch properties.
    pub fn from_set_unchecked(set: BTreeSet<TxId>) -> Self {
        Self(set)
    }

    pub fn conflicts(&self) -> &BTreeSet<TxId> {
        &self.0
    }

    pub fn into_set(self) -> BTreeSet<TxId> {
        self.0
    }

    pub fn contains(&self, c: &TxId) -> bool {
        self.0.contains(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TxId> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &Branch) -> bool {
        self.0.is_subset(&other.0)
    }

    fn with(&self, c: TxId) -> Branch {
        let mut s = self.0.clone();
        s.insert(c);
        Branch(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BranchError {
    #[error("{0:?} is not a conflict")]
    UnknownConflict(TxId),
    #[error("not a branch: {0:?} and {1:?} are conflicting")]
    Conflicting(TxId, TxId),
    #[error("not a branch: parent {parent:?} of {member:?} is missing")]
    NotPastClosed { member: TxId, parent: TxId },
    #[error("more than {0} branches or conflicts")]
    TooLarge(usize),
}

/// Eagerly built Branch DAG, for small instances and oracles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaterializedBranchDag {
    pub vertices: BTreeSet<Branch>,
    /// `(parent, child)` with `child = parent ∪ {c}`.
    pub edges: BTreeSet<(Branch, Branch)>,
}

impl MaterializedBranchDag {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn children_of(&self, b: &Branch) -> BTreeSet<Branch> {
        self.edges
            .iter()
            .filter(|(p, _)| p == b)
            .map(|(_, c)| c.clone())
            .collect()
    }

    pub fn leaves(&self) -> BTreeSet<Branch> {
        let parents: BTreeSet<&Branch> = self.edges.iter().map(|(p, _)| p).collect();
        self.vertices
            .iter()
            .filter(|v| !parents.contains(v))
            .cloned()
            .collect()
    }

    /// True when `to` can be reached from `from` along child edges.
    pub fn reachable(&self, from: &Branch, to: &Branch) -> bool {
        let mut seen = BTreeSet::from([from.clone()]);
        let mut queue = VecDeque::from([from.clone()]);
        while let Some(b) = queue.pop_front() {
            if &b == to {
                return true;
            }
            for c in self.children_of(&b) {
                if seen.insert(c.clone()) {
                    queue.push_back(c);
                }
            }
        }
        false
    }
}

/// Read-only view of the Branch DAG over a set of conflict structures.
#[derive(Debug, Clone, Copy)]
pub struct BranchDagView<'a> {
    cs: &'a ConflictStructures,
}

impl<'a> BranchDagView<'a> {
    pub fn new(cs: &'a ConflictStructures) -> Self {
        Self { cs }
    }

    pub fn structures(&self) -> &'a ConflictStructures {
        self.cs
    }

    fn check_known<'b>(&self, set: impl IntoIterator<Item = &'b TxId>) -> Result<(), BranchError> {
        match set.into_iter().find(|c| !self.cs.is_conflict(c)) {
            Some(c) => Err(BranchError::UnknownConflict(*c)),
            None => Ok(()),
        }
    }

    fn violation(&self, set: &BTreeSet<TxId>) -> Option<BranchError> {
        let g = self.cs.graph();
        for c in set {
            if let Some(d) = g.neighbours(c).iter().find(|d| set.contains(*d)) {
                return Some(BranchError::Conflicting(*c, *d));
            }
            if let Some(p) = self.cs.dag().conflict_parents(c).find(|p| !set.contains(*p)) {
                return Some(BranchError::NotPastClosed {
                    member: *c,
                    parent: *p,
                });
            }
        }
        None
    }

    pub fn is_branch(&self, set: &BTreeSet<TxId>) -> Result<bool, BranchError> {
        self.check_known(set)?;
        Ok(self.violation(set).is_none())
    }

    /// Validates `set` as a branch.
    pub fn branch(&self, set: BTreeSet<TxId>) -> Result<Branch, BranchError> {
        self.check_known(&set)?;
        match self.violation(&set) {
            Some(e) => Err(e),
            None => Ok(Branch(set)),
        }
    }

    /// Conflict-DAG past cone of `c`: the smallest branch containing it.
    pub fn past_cone_branch(&self, c: &TxId) -> Result<Branch, BranchError> {
        self.check_known([c])?;
        Ok(Branch(self.cs.dag().past_cone(c)))
    }

    /// Union of the past cones of `conflicts`, which must be conflict-free.
    pub fn expand<'b>(&self, conflicts: impl IntoIterator<Item = &'b TxId>) -> Result<Branch, BranchError> {
        let mut set = BTreeSet::new();
        for c in conflicts {
            self.check_known([c])?;
            set.extend(self.cs.dag().past_cone(c));
        }
        self.branch(set)
    }

    /// Union of branches, or a witness pair if the union is not conflict-free.
    pub fn aggregate(&self, branches: &[Branch]) -> Result<Branch, BranchError> {
        let set: BTreeSet<TxId> = branches.iter().flat_map(|b| b.iter().copied()).collect();
        self.branch(set)
    }

    /// Conflict-DAG-minimal members in ascending id order.
    pub fn minimal_conflicts(&self, b: &Branch) -> Result<Vec<TxId>, BranchError> {
        self.check_known(b.iter())?;
        if let Some(e) = self.violation(&b.0) {
            return Err(e);
        }
        let dag = self.cs.dag();
        Ok(b.iter()
            .filter(|c| !dag.children(c).iter().any(|d| b.contains(d)))
            .copied()
            .collect())
    }

    /// Hash of the concatenated minimal conflict ids.
    pub fn branch_id(&self, b: &Branch) -> Result<Hash256, BranchError> {
        let ids = self.minimal_conflicts(b)?;
        let bytes: Vec<u8> = ids.iter().flat_map(|c| c.as_bytes().iter().copied()).collect();
        Ok(Hash256::digest(&bytes))
    }

    /// Conflicts `c` such that `b ∪ {c}` is a child of `b`.
    pub fn child_conflicts(&self, b: &Branch) -> Result<Vec<TxId>, BranchError> {
        self.check_known(b.iter())?;
        if let Some(e) = self.violation(&b.0) {
            return Err(e);
        }
        let g = self.cs.graph();
        let dag = self.cs.dag();
        Ok(g.vertices()
            .filter(|c| !b.contains(c))
            .filter(|c| !g.neighbours(c).iter().any(|d| b.contains(d)))
            .filter(|c| dag.conflict_parents(c).all(|p| b.contains(p)))
            .copied()
            .collect())
    }

    pub fn children(&self, b: &Branch) -> Result<Vec<Branch>, BranchError> {
        Ok(self
            .child_conflicts(b)?
            .into_iter()
            .map(|c| b.with(c))
            .collect())
    }

    pub fn is_reality(&self, b: &Branch) -> Result<bool, BranchError> {
        Ok(self.child_conflicts(b)?.is_empty())
    }

    /// Breadth-first closure from the main branch; fails past `limit` vertices.
    pub fn materialize(&self, limit: usize) -> Result<MaterializedBranchDag, BranchError> {
        let mut out = MaterializedBranchDag::default();
        let main = Branch::main();
        out.vertices.insert(main.clone());
        let mut queue = VecDeque::from([main]);
        while let Some(b) = queue.pop_front() {
            for child in self.children(&b)? {
                out.edges.insert((b.clone(), child.clone()));
                if out.vertices.insert(child.clone()) {
                    if out.vertices.len() > limit {
                        return Err(BranchError::TooLarge(limit));
                    }
                    queue.push_back(child);
                }
            }
        }
        Ok(out)
    }

    /// Realities as past-cone expansions of the maximal independent sets of
    /// the Conflict Graph, enumerated with Bron–Kerbosch on the complement.
    pub fn realities_bruteforce(&self, max_conflicts: usize) -> Result<BTreeSet<Branch>, BranchError> {
        let ids: Vec<TxId> = self.cs.graph().vertices().copied().collect();
        let n = ids.len();
        if n > max_conflicts.min(64) {
            return Err(BranchError::TooLarge(max_conflicts.min(64)));
        }
        let index: BTreeMap<TxId, usize> = ids.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let all: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let non_adj: Vec<u64> = ids
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let adj = self
                    .cs
                    .graph()
                    .neighbours(c)
                    .iter()
                    .fold(0u64, |m, d| m | (1 << index[d]));
                all & !adj & !(1 << i)
            })
            .collect();

        let mut sets = Vec::new();
        bron_kerbosch(0, all, 0, &non_adj, &mut sets);
        sets.into_iter()
            .map(|mask| {
                let members: Vec<&TxId> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &ids[i]).collect();
                self.expand(members)
            })
            .collect()
    }
}

/// Maximal cliques of the graph given by `adj` bitmasks.
fn bron_kerbosch(r: u64, mut p: u64, mut x: u64, adj: &[u64], out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    let pivot = bits(p | x)
        .max_by_key(|u| (p & adj[*u]).count_ones())
        .expect("p | x is non-empty");
    for v in bits(p & !adj[pivot]) {
        let bit = 1u64 << v;
        bron_kerbosch(r | bit, p & adj[v], x & adj[v], adj, out);
        p &= !bit;
        x |= bit;
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}
