//! Graphviz renderings of the ledger structures.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::branch::{BranchDagView, MaterializedBranchDag};
use crate::conflict::ConflictStructures;
use crate::hash::TxId;
use crate::ledger::LedgerDag;

const PALETTE: &[&str] = &[
    "gold", "tomato", "aquamarine", "orchid", "lightskyblue", "orange", "palegreen", "pink",
    "khaki", "plum", "lightsalmon", "turquoise",
];

fn colours(ids: impl Iterator<Item = TxId>) -> BTreeMap<TxId, &'static str> {
    ids.enumerate()
        .map(|(i, c)| (c, PALETTE[i % PALETTE.len()]))
        .collect()
}

fn node(id: &TxId) -> String {
    format!("\"{}\"", id.short())
}

/// Ledger DAG, conflicts filled with one colour per label.
pub fn ledger_dot(ledger: &LedgerDag, names: &BTreeMap<TxId, String>) -> String {
    let palette = colours(ledger.conflicts().iter().copied());
    let mut s = String::from("digraph ledger {\n  rankdir=RL;\n  node [shape=box, style=filled, fillcolor=white];\n");
    for tx in ledger.transactions() {
        let id = tx.id();
        let label = names.get(&id).cloned().unwrap_or_else(|| id.short());
        let fill = palette.get(&id).copied().unwrap_or("white");
        let _ = writeln!(s, "  {} [label=\"{}\", fillcolor={}];", node(&id), label, fill);
    }
    for (child, parent) in ledger.spend_edges().edges() {
        let _ = writeln!(s, "  {} -> {};", node(&child), node(&parent));
    }
    s.push_str("}\n");
    s
}

pub fn conflict_dag_dot(cs: &ConflictStructures, names: &BTreeMap<TxId, String>) -> String {
    let palette = colours(cs.graph().vertices().copied());
    let g = cs.genesis();
    let mut s = String::from("digraph conflict_dag {\n  rankdir=RL;\n  node [shape=box, style=filled];\n");
    let _ = writeln!(s, "  {} [label=\"genesis\", fillcolor=white];", node(&g));
    for c in cs.graph().vertices() {
        let label = names.get(c).cloned().unwrap_or_else(|| c.short());
        let _ = writeln!(s, "  {} [label=\"{}\", fillcolor={}];", node(c), label, palette[c]);
    }
    for (child, parent) in cs.dag().edges() {
        let _ = writeln!(s, "  {} -> {};", node(&child), node(&parent));
    }
    s.push_str("}\n");
    s
}

pub fn conflict_graph_dot(cs: &ConflictStructures, names: &BTreeMap<TxId, String>) -> String {
    let palette = colours(cs.graph().vertices().copied());
    let mut s = String::from("graph conflict_graph {\n  node [shape=box, style=filled];\n");
    for c in cs.graph().vertices() {
        let label = names.get(c).cloned().unwrap_or_else(|| c.short());
        let _ = writeln!(s, "  {} [label=\"{}\", fillcolor={}];", node(c), label, palette[c]);
    }
    for (a, b) in cs.graph().edges() {
        let _ = writeln!(s, "  {} -- {};", node(&a), node(&b));
    }
    s.push_str("}\n");
    s
}

/// Materialized Branch DAG; leaves (realities) are drawn with a double border.
pub fn branch_dag_dot(view: &BranchDagView<'_>, dag: &MaterializedBranchDag, names: &BTreeMap<TxId, String>) -> String {
    let label = |b: &crate::branch::Branch| -> String {
        if b.is_empty() {
            return "main".into();
        }
        b.iter()
            .map(|c| names.get(c).cloned().unwrap_or_else(|| c.short()))
            .collect::<Vec<_>>()
            .join(",")
    };
    let id = |b: &crate::branch::Branch| -> String {
        view.branch_id(b).map(|h| h.short()).unwrap_or_else(|_| "invalid".into())
    };
    let leaves = dag.leaves();
    let mut s = String::from("digraph branch_dag {\n  rankdir=RL;\n  node [shape=box];\n");
    for b in &dag.vertices {
        let peripheries = if leaves.contains(b) { 2 } else { 1 };
        let _ = writeln!(s, "  \"{}\" [label=\"{{{}}}\", peripheries={}];", id(b), label(b), peripheries);
    }
    for (parent, child) in &dag.edges {
        let _ = writeln!(s, "  \"{}\" -> \"{}\";", id(child), id(parent));
    }
    s.push_str("}\n");
    s
}
