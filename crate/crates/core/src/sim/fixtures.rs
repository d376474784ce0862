//! Hand-encoded worked examples.
//!
//! `fig3` is a conflict-free five-transaction DAG. `fig4` has six conflicts,
//! named after their colours:
//!
//! ```text
//! genesis outputs g0, g1, g2 (100 each)
//! yellow  spends g0                 red    spends g0, g1
//! aqua    spends g1, g2             purple spends yellow.0, g2
//! blue    spends aqua.0             orange spends g0, aqua.0
//! blue_child spends blue.0
//! ```
//!
//! `fig6` is `fig4` plus static weights
//! yellow 0.7, red 0.1, orange 0.1, aqua 0.6, purple 0.2, blue 0.5.

use std::collections::BTreeMap;

use super::{Scenario, ScenarioMeta};
use crate::hash::TxId;
use crate::tx::{make_genesis, Output, OutputRef, Transaction};
use crate::weight::Weight;

pub const FIXTURE_NAMES: [&str; 3] = ["fig3", "fig4", "fig6"];

const KEY: &[u8] = &[0x01];

#[derive(Debug, Clone)]
pub struct Fixture {
    pub scenario: Scenario,
    /// Human-readable names, genesis included.
    pub names: BTreeMap<String, TxId>,
    pub weights: Option<BTreeMap<TxId, Weight>>,
}

impl Fixture {
    pub fn id(&self, name: &str) -> TxId {
        self.names[name]
    }

    /// Id to name, for DOT labels.
    pub fn labels(&self) -> BTreeMap<TxId, String> {
        self.names.iter().map(|(k, v)| (*v, k.clone())).collect()
    }
}

struct Builder {
    genesis: Transaction,
    txs: Vec<Transaction>,
    names: BTreeMap<String, TxId>,
}

impl Builder {
    fn new(outputs: usize) -> Self {
        let genesis = make_genesis((0..outputs).map(|_| Output::new(100, KEY)).collect()).expect("non-empty");
        let names = BTreeMap::from([("genesis".to_string(), genesis.id())]);
        Self {
            genesis,
            txs: Vec::new(),
            names,
        }
    }

    fn out(&self, name: &str, index: u32) -> (OutputRef, u64) {
        let id = self.names[name];
        let tx = std::iter::once(&self.genesis)
            .chain(&self.txs)
            .find(|t| t.id() == id)
            .expect("named transaction exists");
        (OutputRef::new(id, index), tx.outputs()[index as usize].value)
    }

    /// Adds `name` spending `inputs` into a single output.
    fn spend(&mut self, name: &str, inputs: &[(&str, u32)]) {
        let refs: Vec<(OutputRef, u64)> = inputs.iter().map(|(n, i)| self.out(n, *i)).collect();
        let total = refs.iter().map(|(_, v)| v).sum();
        let ts = self.txs.len() as u64 + 1;
        let tx = Transaction::new(refs.into_iter().map(|(r, _)| r).collect(), vec![Output::new(total, KEY)], KEY, ts);
        self.names.insert(name.to_string(), tx.id());
        self.txs.push(tx);
    }

    fn finish(self, name: &str, conflict_pairs: usize, depth: usize) -> Fixture {
        let txs = self.txs.len();
        Fixture {
            scenario: Scenario {
                meta: ScenarioMeta {
                    seed: None,
                    fixture: Some(name.to_string()),
                    conflict_rate: None,
                    conflict_pairs,
                    depth,
                    txs,
                },
                genesis: self.genesis,
                transactions: self.txs,
            },
            names: self.names,
            weights: None,
        }
    }
}

fn fig3() -> Fixture {
    let mut b = Builder::new(2);
    b.spend("a", &[("genesis", 0)]);
    b.spend("b", &[("genesis", 1)]);
    b.spend("c", &[("a", 0), ("b", 0)]);
    b.spend("d", &[("c", 0)]);
    b.finish("fig3", 0, 3)
}

fn fig4() -> Fixture {
    let mut b = Builder::new(3);
    b.spend("yellow", &[("genesis", 0)]);
    b.spend("red", &[("genesis", 0), ("genesis", 1)]);
    b.spend("aqua", &[("genesis", 1), ("genesis", 2)]);
    b.spend("purple", &[("yellow", 0), ("genesis", 2)]);
    b.spend("blue", &[("aqua", 0)]);
    b.spend("orange", &[("genesis", 0), ("aqua", 0)]);
    b.spend("blue_child", &[("blue", 0)]);
    b.finish("fig4", 4, 3)
}

fn fig6() -> Fixture {
    let mut f = fig4();
    f.scenario.meta.fixture = Some("fig6".into());
    let w = |n: u64| Weight::new(n, 10);
    let weights = [
        ("yellow", w(7)),
        ("red", w(1)),
        ("orange", w(1)),
        ("aqua", w(6)),
        ("purple", w(2)),
        ("blue", w(5)),
    ];
    f.weights = Some(weights.iter().map(|(n, v)| (f.id(n), *v)).collect());
    f
}

pub fn fixture(name: &str) -> Option<Fixture> {
    match name {
        "fig3" => Some(fig3()),
        "fig4" => Some(fig4()),
        "fig6" => Some(fig6()),
        _ => None,
    }
}
