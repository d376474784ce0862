//! Inputs shared by the benchmarks in `benches/`.

use reality_ledger::sim::{generate_scenario, GenParams, Scenario};

/// A seeded scenario with `n_txs` transactions and at most 30 conflicts.
pub fn scenario(seed: u64, n_txs: usize) -> Scenario {
    generate_scenario(&GenParams {
        seed,
        n_txs,
        conflict_rate: 0.15,
        max_parents: 3,
        max_conflicts: Some(30),
    })
    .expect("feasible parameters")
}
