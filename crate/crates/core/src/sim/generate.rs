//! Seeded scenario generation and synthetic weight assignments.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Scenario, ScenarioMeta, SimError};
use crate::branch::Branch;
use crate::engine::RealityLedger;
use crate::hash::TxId;
use crate::ledger::AddOutcome;
use crate::tx::{make_genesis, Output, OutputRef, Transaction};
use crate::weight::Weight;

const OWNERS: [&[u8]; 3] = [&[0x0a], &[0x0b], &[0x0c]];
const GENESIS_OUTPUTS: usize = 6;
const GENESIS_VALUE: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    /// Non-genesis transactions to produce.
    pub n_txs: usize,
    /// Probability that a step attempts a double spend.
    pub conflict_rate: f64,
    /// Maximum number of inputs of an ordinary spend.
    pub max_parents: usize,
    /// Stop creating double spends once this many conflicts exist.
    pub max_conflicts: Option<usize>,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n_txs: 50,
            conflict_rate: 0.1,
            max_parents: 3,
            max_conflicts: None,
        }
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    rl: RealityLedger,
    /// Every produced output with its owner index, in creation order.
    outputs: Vec<(OutputRef, u64, usize)>,
    params: &'a GenParams,
    clock: u64,
}

impl Gen<'_> {
    fn owned_by(&self, owner: usize, consumed: bool) -> Vec<(OutputRef, u64)> {
        self.outputs
            .iter()
            .filter(|(r, _, o)| *o == owner && self.rl.ledger().consumers(r).is_some() == consumed)
            .map(|(r, v, _)| (*r, *v))
            .collect()
    }

    fn pay(&mut self, inputs: Vec<(OutputRef, u64)>, owner: usize) -> Transaction {
        let total: u64 = inputs.iter().map(|(_, v)| v).sum();
        let n_out = self.rng.random_range(1..=3u64).min(total) as usize;
        let mut cuts: Vec<u64> = (1..n_out).map(|_| self.rng.random_range(1..total)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        cuts.push(total);
        let mut prev = 0;
        let outputs = cuts
            .into_iter()
            .map(|c| {
                let v = c - prev;
                prev = c;
                Output::new(v, OWNERS[self.rng.random_range(0..OWNERS.len())])
            })
            .collect();
        self.clock += self.rng.random_range(1..=5);
        Transaction::new(
            inputs.into_iter().map(|(r, _)| r).collect(),
            outputs,
            OWNERS[owner],
            self.clock,
        )
    }

    /// Spends unconsumed outputs of one owner, favouring recent ones.
    fn ordinary(&mut self) -> Option<Transaction> {
        let owner = self.rng.random_range(0..OWNERS.len());
        let mut pool = self.owned_by(owner, false);
        if pool.is_empty() {
            return None;
        }
        if pool.len() > 8 && self.rng.random_bool(0.7) {
            pool.drain(..pool.len() - 8);
        }
        let k = self.rng.random_range(1..=self.params.max_parents.max(1)).min(pool.len());
        let inputs: Vec<(OutputRef, u64)> = pool.choose_multiple(&mut self.rng, k).copied().collect();
        Some(self.pay(inputs, owner))
    }

    /// Spends an already consumed output, sometimes with one extra input.
    fn double_spend(&mut self) -> Option<Transaction> {
        let owner = self.rng.random_range(0..OWNERS.len());
        let spent = self.owned_by(owner, true);
        let target = *spent.choose(&mut self.rng)?;
        let mut inputs = vec![target];
        if self.rng.random_bool(0.3) {
            if let Some(extra) = self.owned_by(owner, false).choose(&mut self.rng) {
                inputs.push(*extra);
            }
        }
        Some(self.pay(inputs, owner))
    }

    fn record(&mut self, tx: &Transaction) {
        for (r, o) in tx.output_refs() {
            let owner = OWNERS.iter().position(|k| *k == o.condition.as_slice()).unwrap_or(0);
            self.outputs.push((r, o.value, owner));
        }
    }
}

fn depth(rl: &RealityLedger) -> usize {
    let ledger = rl.ledger();
    let mut d: BTreeMap<TxId, usize> = BTreeMap::new();
    for tx in ledger.transactions() {
        let v = ledger.parents(&tx.id()).iter().map(|p| d[p] + 1).max().unwrap_or(0);
        d.insert(tx.id(), v);
    }
    d.values().copied().max().unwrap_or(0)
}

/// Deterministic per seed. Every emitted transaction was accepted by a live
/// engine, so the listed order replays without rejections.
pub fn generate_scenario(params: &GenParams) -> Result<Scenario, SimError> {
    if !(0.0..=1.0).contains(&params.conflict_rate) {
        return Err(SimError::Infeasible(format!("conflict rate {} not in [0, 1]", params.conflict_rate)));
    }
    if params.n_txs == 0 || params.max_parents == 0 {
        return Err(SimError::Infeasible("n_txs and max_parents must be positive".into()));
    }
    if params.conflict_rate > 0.0 && params.n_txs < 2 {
        return Err(SimError::Infeasible("a double spend needs at least two transactions".into()));
    }
    let genesis = make_genesis(
        (0..GENESIS_OUTPUTS)
            .map(|i| Output::new(GENESIS_VALUE, OWNERS[i % OWNERS.len()]))
            .collect(),
    )
    .expect("non-empty");
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        rl: RealityLedger::new(genesis.clone()).expect("valid genesis"),
        outputs: Vec::new(),
        params,
        clock: 1_000,
    };
    g.record(&genesis);

    let mut txs = Vec::with_capacity(params.n_txs);
    let mut pairs = 0;
    let mut attempts = params.n_txs * 50 + 100;
    while txs.len() < params.n_txs && attempts > 0 {
        attempts -= 1;
        let room = params
            .max_conflicts
            .is_none_or(|m| g.rl.conflicts().len() + 2 <= m);
        let conflict = !txs.is_empty() && room && g.rng.random_bool(params.conflict_rate);
        let candidate = if conflict { g.double_spend() } else { g.ordinary() };
        let Some(tx) = candidate else { continue };
        match g.rl.add_transaction(tx.clone()) {
            AddOutcome::Added => {}
            AddOutcome::AddedAsConflict { .. } => pairs += 1,
            _ => continue,
        }
        g.record(&tx);
        txs.push(tx);
    }
    if txs.len() < params.n_txs {
        return Err(SimError::Infeasible(format!(
            "produced only {} of {} transactions",
            txs.len(),
            params.n_txs
        )));
    }
    Ok(Scenario {
        meta: ScenarioMeta {
            seed: Some(params.seed),
            fixture: None,
            conflict_rate: Some(params.conflict_rate),
            conflict_pairs: pairs,
            depth: depth(&g.rl),
            txs: txs.len(),
        },
        genesis,
        transactions: txs,
    })
}

/// `t` disjoint double-spend pairs on separate genesis outputs: `2t`
/// conflicts, `t` Conflict-Graph edges, `3^t` branches.
pub fn independent_pairs(t: usize) -> Scenario {
    let key = OWNERS[0];
    let genesis = make_genesis((0..t.max(1)).map(|_| Output::new(10, key)).collect()).expect("non-empty");
    let mut txs = Vec::with_capacity(2 * t);
    for i in 0..t {
        for side in 0..2u64 {
            txs.push(Transaction::new(
                vec![genesis.output_ref(i as u32)],
                vec![Output::new(10, key)],
                key,
                2 * i as u64 + side + 1,
            ));
        }
    }
    Scenario {
        meta: ScenarioMeta {
            seed: None,
            fixture: Some(format!("independent-pairs-{t}")),
            conflict_rate: None,
            conflict_pairs: t,
            depth: 1,
            txs: txs.len(),
        },
        genesis,
        transactions: txs,
    }
}

/// A uniformly shuffled greedy maximal independent set, expanded to a branch.
pub fn random_reality<R: Rng>(rl: &RealityLedger, rng: &mut R) -> Branch {
    let g = rl.conflicts().graph();
    let mut order: Vec<TxId> = g.vertices().copied().collect();
    order.shuffle(rng);
    let mut chosen = BTreeSet::new();
    for c in order {
        if !g.neighbours(&c).iter().any(|n| chosen.contains(n)) {
            chosen.insert(c);
        }
    }
    rl.branches()
        .expand(chosen.iter())
        .expect("a maximal independent set is a branch")
}

/// `w(x) = Σ λ_i [past-cone conflicts of x ⊆ R_i]` for realities `R_i` and
/// positive `λ_i` summing to one. Covers every transaction.
pub fn mixture_weights(rl: &RealityLedger, realities: &[(Branch, u64)]) -> BTreeMap<TxId, Weight> {
    let total: u64 = realities.iter().map(|(_, l)| l).sum();
    let ledger = rl.ledger();
    ledger
        .ids()
        .map(|id| {
            let ls = ledger.label_set(id).expect("stored");
            let mass: u64 = realities
                .iter()
                .filter(|(r, _)| ls.iter().all(|c| r.contains(c)))
                .map(|(_, l)| l)
                .sum();
            (*id, Weight::new(mass, total.max(1)))
        })
        .collect()
}

/// A random valid static weighting mixing `k` random realities.
pub fn random_static_weights<R: Rng>(rl: &RealityLedger, rng: &mut R, k: usize) -> BTreeMap<TxId, Weight> {
    let parts: Vec<(Branch, u64)> = (0..k.max(1))
        .map(|_| (random_reality(rl, rng), rng.random_range(1..=100)))
        .collect();
    mixture_weights(rl, &parts)
}

/// Weight 1 on the reality ledger of `r`, 0 elsewhere.
pub fn reality_indicator_weights(rl: &RealityLedger, r: &Branch) -> BTreeMap<TxId, Weight> {
    mixture_weights(rl, &[(r.clone(), 1)])
}
