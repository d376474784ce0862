//! Reality-based UTXO ledger.
//!
//! Accepts possibly conflicting transactions, tracks conflicts through the
//! Conflict DAG and Conflict Graph, navigates the (lazy) Branch DAG, selects
//! a preferred reality under a weight function and prunes back to a
//! conflict-free ledger once a branch is confirmed.

pub mod branch;
pub mod conflict;
pub mod dot;
pub mod engine;
pub mod graph;
pub mod hash;
pub mod ledger;
pub mod prune;
pub mod sim;
pub mod tx;
pub mod weight;

pub use branch::{Branch, BranchDagView, BranchError, MaterializedBranchDag};
pub use conflict::{ConflictDag, ConflictGraph, ConflictStructures};
pub use engine::RealityLedger;
pub use hash::{Hash256, TxId};
pub use ledger::{AddOutcome, LedgerConfig, LedgerDag, LedgerError, LedgerState, RejectReason};
pub use prune::{PruneConfig, PruneReport};
pub use tx::{make_genesis, Label, Output, OutputRef, SyntaxError, Transaction};
pub use weight::{Selection, Strategy, Weight, WeightFn};
