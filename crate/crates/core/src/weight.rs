//! Weight functions on transactions, branch weights and reality selection.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::branch::Branch;
use crate::engine::RealityLedger;
use crate::hash::TxId;

/// Exact weight in `[0, 1]`.
pub type Weight = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    MinHash,
    MinTimestamp,
    Static,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::MinHash => "min-hash",
            Strategy::MinTimestamp => "min-timestamp",
            Strategy::Static => "static",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum AxiomViolation {
    #[error("unitarity: w(genesis) = {weight}")]
    Unitarity { weight: String },
    #[error("range: w({tx:?}) = {weight} is above 1")]
    Range { tx: TxId, weight: String },
    #[error("monotonicity: w({child:?}) = {child_weight} exceeds w({parent:?}) = {parent_weight}")]
    Monotonicity {
        child: TxId,
        parent: TxId,
        child_weight: String,
        parent_weight: String,
    },
    #[error("consistency: pairwise conflicting {members:?} sum to {sum} > 1")]
    Consistency { members: Vec<TxId>, sum: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeightError {
    #[error("no weight for {0:?}")]
    UnknownTx(TxId),
    #[error("conflict {0:?} has no assigned weight")]
    Uncovered(TxId),
    #[error("invalid weight {0:?}")]
    Parse(String),
    #[error(transparent)]
    Axiom(#[from] AxiomViolation),
}

/// A weight per stored transaction, evaluated once against a ledger snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightFn {
    strategy: Strategy,
    values: BTreeMap<TxId, Weight>,
}

impl WeightFn {
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn values(&self) -> &BTreeMap<TxId, Weight> {
        &self.values
    }

    pub fn weight(&self, x: &TxId) -> Result<Weight, WeightError> {
        self.values.get(x).copied().ok_or(WeightError::UnknownTx(*x))
    }

    /// Minimum over members; 1 for the main branch.
    pub fn branch_weight(&self, b: &Branch) -> Result<Weight, WeightError> {
        b.iter().try_fold(Weight::one(), |acc, c| Ok(acc.min(self.weight(c)?)))
    }
}

/// Parses `"p/q"`, `"p"` or a decimal like `"0.75"`.
pub fn parse_weight(s: &str) -> Result<Weight, WeightError> {
    let err = || WeightError::Parse(s.to_string());
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
        let frac: u64 = frac.parse().map_err(|_| err())?;
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(err)?;
        return Ok(Weight::new(num, den));
    }
    let w = Weight::from_str(s).map_err(|_| err())?;
    if *w.denom() == 0 {
        return Err(err());
    }
    Ok(w)
}

pub fn format_weight(w: &Weight) -> String {
    if *w.denom() == 1 {
        w.numer().to_string()
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

/// Reads a JSON object mapping hex transaction ids to weight strings.
pub fn parse_static_weights(json: &str) -> Result<BTreeMap<TxId, Weight>, WeightError> {
    let raw: BTreeMap<String, String> =
        serde_json::from_str(json).map_err(|e| WeightError::Parse(e.to_string()))?;
    raw.into_iter()
        .map(|(k, v)| {
            let id = k.parse::<TxId>().map_err(|_| WeightError::Parse(k.clone()))?;
            Ok((id, parse_weight(&v)?))
        })
        .collect()
}

pub fn static_weights_to_json(values: &BTreeMap<TxId, Weight>) -> String {
    let raw: BTreeMap<String, String> = values
        .iter()
        .map(|(k, v)| (k.to_hex(), format_weight(v)))
        .collect();
    serde_json::to_string_pretty(&raw).expect("string map serializes")
}

/// Conflicts winning their Conflict-Graph neighbourhood under `key` get 1,
/// the others 0; every transaction is then capped by its parents.
fn neighbourhood_minimum<K: Ord>(rl: &RealityLedger, strategy: Strategy, key: impl Fn(&TxId) -> K) -> WeightFn {
    let g = rl.conflicts().graph();
    let provisional: BTreeMap<TxId, Weight> = g
        .vertices()
        .map(|c| {
            let kc = key(c);
            let wins = g.neighbours(c).iter().all(|n| key(n) > kc);
            (*c, if wins { Weight::one() } else { Weight::zero() })
        })
        .collect();
    let ledger = rl.ledger();
    let mut values = BTreeMap::new();
    for tx in ledger.transactions() {
        let id = tx.id();
        let own = provisional.get(&id).copied().unwrap_or_else(Weight::one);
        let w = ledger
            .parents(&id)
            .iter()
            .map(|p| values[p])
            .fold(own, Weight::min);
        values.insert(id, w);
    }
    WeightFn { strategy, values }
}

pub fn min_hash_weight(rl: &RealityLedger) -> WeightFn {
    neighbourhood_minimum(rl, Strategy::MinHash, |c| *c)
}

pub fn min_timestamp_weight(rl: &RealityLedger) -> WeightFn {
    let ledger = rl.ledger();
    neighbourhood_minimum(rl, Strategy::MinTimestamp, |c| {
        (ledger.get(c).map(|t| t.timestamp()).unwrap_or(u64::MAX), *c)
    })
}

/// Externally supplied weights. Every conflict must be covered; other
/// transactions default to the minimum over their parents (genesis to 1).
pub fn static_weight(rl: &RealityLedger, assignments: &BTreeMap<TxId, Weight>) -> Result<WeightFn, WeightError> {
    let ledger = rl.ledger();
    if let Some(id) = assignments.keys().find(|id| !ledger.contains(id)) {
        return Err(WeightError::UnknownTx(*id));
    }
    let mut values = BTreeMap::new();
    for tx in ledger.transactions() {
        let id = tx.id();
        let w = match assignments.get(&id) {
            Some(w) => *w,
            None if ledger.is_conflict(&id) => return Err(WeightError::Uncovered(id)),
            None => ledger
                .parents(&id)
                .iter()
                .map(|p| values[p])
                .fold(Weight::one(), Weight::min),
        };
        values.insert(id, w);
    }
    let w = WeightFn {
        strategy: Strategy::Static,
        values,
    };
    check_axioms(rl, &w)?;
    Ok(w)
}

fn to_big(w: &Weight) -> BigRational {
    BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom()))
}

/// Checks unitarity, range, monotonicity on every spend edge, and
/// consistency over every set of pairwise conflicting transactions.
///
/// Transactions with the same set of past-cone conflicts never conflict with
/// each other and conflict with the same others, so consistency is decided
/// on those groups (each weighted by its heaviest member) with a
/// branch-and-bound clique search.
pub fn check_axioms(rl: &RealityLedger, w: &WeightFn) -> Result<(), AxiomViolation> {
    let ledger = rl.ledger();
    let g = ledger.genesis_id();
    let wg = w.values.get(&g).copied().unwrap_or_else(Weight::zero);
    if wg != Weight::one() {
        return Err(AxiomViolation::Unitarity {
            weight: format_weight(&wg),
        });
    }
    for (id, v) in &w.values {
        if *v > Weight::one() {
            return Err(AxiomViolation::Range {
                tx: *id,
                weight: format_weight(v),
            });
        }
    }
    for (child, parent) in ledger.spend_edges().edges() {
        let (wc, wp) = (w.values[&child], w.values[&parent]);
        if wc > wp {
            return Err(AxiomViolation::Monotonicity {
                child,
                parent,
                child_weight: format_weight(&wc),
                parent_weight: format_weight(&wp),
            });
        }
    }

    let mut groups: BTreeMap<&BTreeSet<TxId>, (Weight, TxId)> = BTreeMap::new();
    for tx in ledger.transactions() {
        let id = tx.id();
        let ls = ledger.label_set(&id).expect("stored");
        if ls.is_empty() {
            continue;
        }
        let v = w.values[&id];
        let e = groups.entry(ls).or_insert((v, id));
        if v > e.0 {
            *e = (v, id);
        }
    }
    let mut nodes: Vec<(&BTreeSet<TxId>, Weight, TxId)> = groups
        .into_iter()
        .filter(|(_, (v, _))| !v.is_zero())
        .map(|(ls, (v, id))| (ls, v, id))
        .collect();
    nodes.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let n = nodes.len();
    let rivals: Vec<BTreeSet<TxId>> = nodes
        .iter()
        .map(|(ls, _, _)| ls.iter().flat_map(|c| ledger.direct_rivals(c)).collect())
        .collect();
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && nodes[j].0.iter().any(|c| rivals[i].contains(c)))
                .collect()
        })
        .collect();
    let weights: Vec<BigRational> = nodes.iter().map(|(_, v, _)| to_big(v)).collect();

    let mut clique = Vec::new();
    let candidates: Vec<usize> = (0..n).collect();
    if let Some(sum) = heavy_clique(&mut clique, BigRational::zero(), &candidates, &weights, &adj) {
        return Err(AxiomViolation::Consistency {
            members: clique.iter().map(|i| nodes[*i].2).collect(),
            sum: sum.to_string(),
        });
    }
    Ok(())
}

/// Searches for a clique with weight sum above 1, extending `clique`.
fn heavy_clique(
    clique: &mut Vec<usize>,
    sum: BigRational,
    candidates: &[usize],
    weights: &[BigRational],
    adj: &[Vec<bool>],
) -> Option<BigRational> {
    let one = BigRational::one();
    let mut rest: BigRational = candidates.iter().map(|i| &weights[*i]).sum();
    for (k, v) in candidates.iter().enumerate() {
        if &sum + &rest <= one {
            return None;
        }
        rest -= &weights[*v];
        let next = &sum + &weights[*v];
        clique.push(*v);
        if next > one {
            return Some(next);
        }
        let narrowed: Vec<usize> = candidates[k + 1..].iter().copied().filter(|u| adj[*v][*u]).collect();
        if let Some(found) = heavy_clique(clique, next, &narrowed, weights, adj) {
            return Some(found);
        }
        clique.pop();
    }
    None
}

/// Result of a reality selection run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub branch: Branch,
    /// Conflicts in the order they were added.
    pub order: Vec<TxId>,
    pub iterations: usize,
    /// Elementary graph queries performed.
    pub ops: u64,
}

/// Higher weight first, then the smaller id.
fn preferred(a: (Weight, TxId), b: (Weight, TxId)) -> bool {
    match a.0.cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1 < b.1,
    }
}

/// Walks the Branch DAG from the main branch, always moving to the heaviest
/// child, until a leaf is reached.
pub fn select_reality_branch_walk(rl: &RealityLedger, w: &WeightFn) -> Result<Selection, WeightError> {
    let cs = rl.conflicts();
    let dag = cs.dag();
    let g = cs.graph();
    let conflicts: Vec<TxId> = g.vertices().copied().collect();
    let mut weights = BTreeMap::new();
    for c in &conflicts {
        weights.insert(*c, w.weight(c)?);
    }
    let mut missing: BTreeMap<TxId, usize> = conflicts
        .iter()
        .map(|c| (*c, dag.conflict_parents(c).count()))
        .collect();
    let mut blocked = BTreeSet::new();
    let mut chosen = BTreeSet::new();
    let mut order = Vec::new();
    let mut w_r = Weight::one();
    let mut ops = conflicts.len() as u64;

    loop {
        // children of R are R ∪ {c} for unblocked c whose parents are in R
        let mut best: Option<(Weight, TxId)> = None;
        for c in &conflicts {
            ops += 1;
            if chosen.contains(c) || blocked.contains(c) || missing[c] > 0 {
                continue;
            }
            let child_weight = w_r.min(weights[c]);
            if best.is_none_or(|b| preferred((child_weight, *c), b)) {
                best = Some((child_weight, *c));
            }
        }
        let Some((child_weight, c)) = best else { break };
        chosen.insert(c);
        order.push(c);
        w_r = child_weight;
        for n in g.neighbours(&c) {
            ops += 1;
            blocked.insert(*n);
        }
        for ch in dag.children(&c) {
            ops += 1;
            if let Some(m) = missing.get_mut(ch) {
                *m -= 1;
            }
        }
    }
    Ok(Selection {
        branch: Branch::from_set_unchecked(chosen),
        iterations: order.len(),
        order,
        ops,
    })
}

/// Greedy over the Conflict Graph: repeatedly takes the heaviest
/// Conflict-DAG-maximal remaining conflict and discards its neighbours.
pub fn select_reality_conflict_graph(rl: &RealityLedger, w: &WeightFn) -> Result<Selection, WeightError> {
    let cs = rl.conflicts();
    let dag = cs.dag();
    let g = cs.graph();
    let mut remaining: BTreeSet<TxId> = g.vertices().copied().collect();
    let mut weights = BTreeMap::new();
    for c in &remaining {
        weights.insert(*c, w.weight(c)?);
    }
    // parents still in U; zero means D_C-maximal in U
    let mut parents_in_u: BTreeMap<TxId, usize> = remaining
        .iter()
        .map(|c| (*c, dag.conflict_parents(c).count()))
        .collect();
    let mut chosen = BTreeSet::new();
    let mut order = Vec::new();
    let mut ops = remaining.len() as u64;

    while !remaining.is_empty() {
        let mut best: Option<(Weight, TxId)> = None;
        for c in &remaining {
            ops += 1;
            if parents_in_u[c] > 0 {
                continue;
            }
            if best.is_none_or(|b| preferred((weights[c], *c), b)) {
                best = Some((weights[c], *c));
            }
        }
        let (_, c) = best.expect("a non-empty DAG subset has a maximal element");
        chosen.insert(c);
        order.push(c);
        let mut dropped = vec![c];
        for n in g.neighbours(&c) {
            ops += 1;
            if remaining.contains(n) {
                dropped.push(*n);
            }
        }
        for r in dropped {
            remaining.remove(&r);
            for ch in dag.children(&r) {
                ops += 1;
                if let Some(m) = parents_in_u.get_mut(ch) {
                    *m -= 1;
                }
            }
        }
    }
    debug_assert!(rl
        .branches()
        .is_branch(&chosen)
        .unwrap_or(false));
    Ok(Selection {
        branch: Branch::from_set_unchecked(chosen),
        iterations: order.len(),
        order,
        ops,
    })
}
