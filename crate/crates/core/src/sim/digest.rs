//! Order-independent structural digests.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::engine::RealityLedger;
use crate::hash::{Hash256, TxId};
use crate::ledger::LedgerDag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Digests {
    pub ledger: Hash256,
    pub conflict_dag: Hash256,
    pub conflict_graph: Hash256,
}

/// Topological order (parents first), ties broken by smallest id.
fn canonical_order(ledger: &LedgerDag) -> Vec<TxId> {
    let mut missing: BTreeMap<TxId, usize> = ledger.ids().map(|id| (*id, ledger.parents(id).len())).collect();
    let mut ready: BTreeSet<TxId> = missing.iter().filter(|(_, n)| **n == 0).map(|(id, _)| *id).collect();
    let mut order = Vec::with_capacity(missing.len());
    while let Some(id) = ready.pop_first() {
        order.push(id);
        for c in ledger.children(&id) {
            let n = missing.get_mut(c).expect("child is stored");
            *n -= 1;
            if *n == 0 {
                ready.insert(*c);
            }
        }
    }
    order
}

fn put_ids<'a>(buf: &mut Vec<u8>, ids: impl ExactSizeIterator<Item = &'a TxId>) {
    buf.extend_from_slice(&(ids.len() as u32).to_be_bytes());
    for id in ids {
        buf.extend_from_slice(id.as_bytes());
    }
}

fn put_edges(buf: &mut Vec<u8>, edges: &[(TxId, TxId)]) {
    buf.extend_from_slice(&(edges.len() as u32).to_be_bytes());
    for (a, b) in edges {
        buf.extend_from_slice(a.as_bytes());
        buf.extend_from_slice(b.as_bytes());
    }
}

pub fn digests(rl: &RealityLedger) -> Digests {
    let ledger = rl.ledger();
    let mut buf = Vec::new();
    for id in canonical_order(ledger) {
        let tx = ledger.get(&id).expect("stored");
        let enc = tx.encode();
        buf.extend_from_slice(&(enc.len() as u32).to_be_bytes());
        buf.extend_from_slice(&enc);
        buf.push(ledger.is_conflict(&id) as u8);
        put_ids(&mut buf, ledger.label_set(&id).expect("stored").iter());
    }
    put_edges(&mut buf, &ledger.spend_edges().edges());
    let ledger_digest = Hash256::digest(&buf);

    let cs = rl.conflicts();
    let mut buf = Vec::new();
    let vertices: Vec<TxId> = cs.dag().conflicts().copied().collect();
    put_ids(&mut buf, vertices.iter());
    put_edges(&mut buf, &cs.dag().edges());
    let dag_digest = Hash256::digest(&buf);

    let mut buf = Vec::new();
    let vertices: Vec<TxId> = cs.graph().vertices().copied().collect();
    put_ids(&mut buf, vertices.iter());
    put_edges(&mut buf, &cs.graph().edges());
    let graph_digest = Hash256::digest(&buf);

    Digests {
        ledger: ledger_digest,
        conflict_dag: dag_digest,
        conflict_graph: graph_digest,
    }
}
