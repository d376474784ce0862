//! Reference computations written directly from the definitions, sharing no
//! code with the engine. They work on the raw transaction list of a scenario.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use reality_ledger::sim::{generate_scenario, GenParams, Scenario};
use reality_ledger::{OutputRef, Transaction, TxId, Weight};

pub struct Oracle {
    pub genesis: TxId,
    pub txs: BTreeMap<TxId, Transaction>,
    /// Strict ancestors of every transaction.
    pub ancestors: BTreeMap<TxId, BTreeSet<TxId>>,
    pub consumers: BTreeMap<OutputRef, BTreeSet<TxId>>,
    pub conflicts: BTreeSet<TxId>,
    /// Conflicts in the reflexive past cone.
    pub past_conflicts: BTreeMap<TxId, BTreeSet<TxId>>,
    /// Conflicting conflict pairs `(a, b)` with `a < b`.
    pub graph: BTreeSet<(TxId, TxId)>,
    /// Conflict DAG edges `(child, parent)`, genesis as the root.
    pub dag: BTreeSet<(TxId, TxId)>,
}

fn ancestors_of(
    id: &TxId,
    txs: &BTreeMap<TxId, Transaction>,
    memo: &mut BTreeMap<TxId, BTreeSet<TxId>>,
) -> BTreeSet<TxId> {
    if let Some(a) = memo.get(id) {
        return a.clone();
    }
    let mut out = BTreeSet::new();
    for input in txs[id].inputs() {
        out.insert(input.tx_id);
        out.extend(ancestors_of(&input.tx_id, txs, memo));
    }
    memo.insert(*id, out.clone());
    out
}

impl Oracle {
    /// Assumes every listed transaction is accepted.
    pub fn new(scn: &Scenario) -> Self {
        Self::from_txs(&scn.genesis, &scn.transactions)
    }

    pub fn from_txs(genesis: &Transaction, list: &[Transaction]) -> Self {
        let txs: BTreeMap<TxId, Transaction> = std::iter::once(genesis)
            .chain(list)
            .map(|t| (t.id(), t.clone()))
            .collect();
        let mut ancestors = BTreeMap::new();
        for id in txs.keys() {
            ancestors_of(id, &txs, &mut ancestors);
        }
        let mut consumers: BTreeMap<OutputRef, BTreeSet<TxId>> = BTreeMap::new();
        for (id, tx) in &txs {
            for r in tx.inputs() {
                consumers.entry(*r).or_default().insert(*id);
            }
        }
        let conflicts: BTreeSet<TxId> = consumers
            .values()
            .filter(|c| c.len() > 1)
            .flatten()
            .copied()
            .collect();
        let past_conflicts: BTreeMap<TxId, BTreeSet<TxId>> = txs
            .keys()
            .map(|id| {
                let cone = ancestors[id].iter().chain(std::iter::once(id));
                (*id, cone.filter(|c| conflicts.contains(c)).copied().collect())
            })
            .collect();

        // Outputs spent inside each conflict's reflexive past cone.
        let spent: BTreeMap<TxId, BTreeMap<OutputRef, TxId>> = conflicts
            .iter()
            .map(|c| {
                let mut m = BTreeMap::new();
                for a in ancestors[c].iter().chain(std::iter::once(c)) {
                    for r in txs[a].inputs() {
                        m.insert(*r, *a);
                    }
                }
                (*c, m)
            })
            .collect();
        let mut graph = BTreeSet::new();
        for a in &conflicts {
            for b in conflicts.range(a..).skip(1) {
                let clash = spent[a]
                    .iter()
                    .any(|(r, ca)| spent[b].get(r).is_some_and(|cb| cb != ca));
                if clash {
                    graph.insert((*a, *b));
                }
            }
        }

        let genesis_id = genesis.id();
        let mut dag = BTreeSet::new();
        for c in &conflicts {
            let below: BTreeSet<TxId> = ancestors[c].intersection(&conflicts).copied().collect();
            let closest: Vec<TxId> = below
                .iter()
                .filter(|y| !below.iter().any(|z| ancestors[z].contains(y)))
                .copied()
                .collect();
            if closest.is_empty() {
                dag.insert((*c, genesis_id));
            }
            for p in closest {
                dag.insert((*c, p));
            }
        }

        Self {
            genesis: genesis_id,
            txs,
            ancestors,
            consumers,
            conflicts,
            past_conflicts,
            graph,
            dag,
        }
    }

    pub fn adjacent(&self, a: &TxId, b: &TxId) -> bool {
        self.graph.contains(&(*a.min(b), *a.max(b)))
    }

    pub fn neighbours(&self, c: &TxId) -> BTreeSet<TxId> {
        self.conflicts.iter().filter(|d| self.adjacent(c, d)).copied().collect()
    }

    /// Two transactions whose past cones hold a directly conflicting pair.
    pub fn conflicting(&self, x: &TxId, y: &TxId) -> bool {
        let (px, py) = (&self.past_conflicts[x], &self.past_conflicts[y]);
        px.iter().any(|a| py.iter().any(|b| self.adjacent(a, b)))
    }

    /// Adds every conflict ancestor of the members.
    pub fn close(&self, set: &BTreeSet<TxId>) -> BTreeSet<TxId> {
        set.iter()
            .flat_map(|c| self.past_conflicts[c].iter().copied())
            .collect()
    }

    /// Maximal independent sets of the Conflict Graph by subset enumeration.
    pub fn maximal_independent_sets(&self) -> Vec<BTreeSet<TxId>> {
        let ids: Vec<TxId> = self.conflicts.iter().copied().collect();
        let n = ids.len();
        assert!(n <= 20, "subset enumeration is for small instances");
        let adj: Vec<u32> = ids
            .iter()
            .map(|a| {
                ids.iter()
                    .enumerate()
                    .filter(|(_, b)| self.adjacent(a, b))
                    .fold(0u32, |m, (j, _)| m | 1 << j)
            })
            .collect();
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << n) {
            let independent = (0..n).all(|i| mask >> i & 1 == 0 || adj[i] & mask == 0);
            if !independent {
                continue;
            }
            let maximal = (0..n).all(|i| mask >> i & 1 == 1 || adj[i] & mask != 0);
            if maximal {
                out.push((0..n).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect());
            }
        }
        out
    }

    /// Realities as past-closed expansions of maximal independent sets.
    pub fn realities(&self) -> BTreeSet<BTreeSet<TxId>> {
        self.maximal_independent_sets().iter().map(|s| self.close(s)).collect()
    }

    pub fn is_reality(&self, r: &BTreeSet<TxId>) -> bool {
        let closed = self.close(r) == *r;
        let independent = r.iter().all(|a| r.iter().all(|b| !self.adjacent(a, b)));
        let maximal = self
            .conflicts
            .iter()
            .filter(|c| !r.contains(c))
            .all(|c| self.close(&BTreeSet::from([*c])).iter().any(|d| r.iter().any(|e| self.adjacent(d, e))));
        closed && independent && maximal
    }

    pub fn reality_ledger(&self, r: &BTreeSet<TxId>) -> BTreeSet<TxId> {
        self.txs
            .keys()
            .filter(|x| self.past_conflicts[x].is_subset(r))
            .copied()
            .collect()
    }

    /// Checks the ledger constraints on a standalone set of transactions.
    pub fn consistent(&self, set: &BTreeSet<TxId>) -> Result<(), String> {
        let mut used: BTreeSet<OutputRef> = BTreeSet::new();
        for id in set {
            let tx = &self.txs[id];
            if tx.inputs().is_empty() {
                if *id != self.genesis {
                    return Err(format!("{} is a second genesis", id.short()));
                }
                continue;
            }
            let mut sum = 0u128;
            for r in tx.inputs() {
                if !set.contains(&r.tx_id) {
                    return Err(format!("{} spends outside the set", id.short()));
                }
                if !used.insert(*r) {
                    return Err(format!("{} double spends", id.short()));
                }
                let out = self.txs[&r.tx_id]
                    .outputs()
                    .get(r.index as usize)
                    .ok_or_else(|| format!("{} spends a missing output", id.short()))?;
                if out.condition.as_slice() != tx.unlock() {
                    return Err(format!("{} fails to unlock", id.short()));
                }
                sum += out.value as u128;
            }
            let out_sum: u128 = tx.outputs().iter().map(|o| o.value as u128).sum();
            if sum != out_sum {
                return Err(format!("{} is unbalanced", id.short()));
            }
        }
        Ok(())
    }

    /// Sum of outputs produced in `set` and not consumed inside it.
    pub fn state_value(&self, set: &BTreeSet<TxId>) -> u128 {
        let mut total = 0u128;
        for id in set {
            for (i, o) in self.txs[id].outputs().iter().enumerate() {
                let r = OutputRef::new(*id, i as u32);
                let spent = self
                    .consumers
                    .get(&r)
                    .is_some_and(|cs| cs.iter().any(|c| set.contains(c)));
                if !spent {
                    total += o.value as u128;
                }
            }
        }
        total
    }

    pub fn genesis_value(&self) -> u128 {
        self.txs[&self.genesis].outputs().iter().map(|o| o.value as u128).sum()
    }

    /// Weight of every transaction when each conflict scores 1 iff its key
    /// is below all of its neighbours' keys, and 0 otherwise.
    pub fn neighbourhood_weights<K: Ord>(&self, key: impl Fn(&TxId) -> K) -> BTreeMap<TxId, Weight> {
        let wins: BTreeSet<TxId> = self
            .conflicts
            .iter()
            .filter(|c| self.neighbours(c).iter().all(|n| key(n) > key(c)))
            .copied()
            .collect();
        self.txs
            .keys()
            .map(|x| {
                let ok = self.past_conflicts[x].iter().all(|c| wins.contains(c));
                (*x, Weight::new(ok as u64, 1))
            })
            .collect()
    }

    /// Unitarity, range, monotonicity on every spend, and pairwise
    /// consistency over every pair of conflicting transactions.
    pub fn check_axioms_pairwise(&self, w: &BTreeMap<TxId, Weight>) -> Result<(), String> {
        let one = Weight::new(1, 1);
        if w[&self.genesis] != one {
            return Err("genesis weight is not 1".into());
        }
        for (x, tx) in &self.txs {
            if w[x] > one {
                return Err(format!("{} weighs above 1", x.short()));
            }
            for r in tx.inputs() {
                if w[x] > w[&r.tx_id] {
                    return Err(format!("{} outweighs its parent", x.short()));
                }
            }
        }
        let ids: Vec<&TxId> = self.txs.keys().collect();
        for (i, x) in ids.iter().enumerate() {
            if self.past_conflicts[*x].is_empty() {
                continue;
            }
            for y in &ids[i + 1..] {
                if w[*x] + w[*y] > one && self.conflicting(x, y) {
                    return Err(format!("{} and {} conflict with weight above 1", x.short(), y.short()));
                }
            }
        }
        Ok(())
    }
}

/// The seeded corpus shared by the property suites: sizes up to 300
/// transactions, at most 30 conflicts, half capped at 15 conflicts.
pub fn corpus(count: u64) -> Vec<Scenario> {
    let rates = [0.05, 0.1, 0.2, 0.3];
    (0..count)
        .map(|seed| {
            let params = GenParams {
                seed,
                n_txs: 20 + (seed as usize * 37) % 281,
                conflict_rate: rates[seed as usize % rates.len()],
                max_parents: 1 + seed as usize % 3,
                max_conflicts: Some(if seed % 2 == 0 { 15 } else { 30 }),
            };
            generate_scenario(&params).expect("feasible parameters")
        })
        .collect()
}

pub fn pairs_of(edges: Vec<(TxId, TxId)>) -> BTreeSet<(TxId, TxId)> {
    edges.into_iter().collect()
}
