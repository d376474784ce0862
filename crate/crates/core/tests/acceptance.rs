//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{corpus, pairs_of, Oracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reality_ledger::prune::{minimal_confirmed_branch, reality_ledger, validate_consistent};
use reality_ledger::sim::{
    digests, fixture, independent_pairs, random_static_weights, reality_indicator_weights, replay_engine, Scenario,
};
use reality_ledger::weight::{
    check_axioms, min_hash_weight, min_timestamp_weight, select_reality_branch_walk, select_reality_conflict_graph,
    static_weight,
};
use reality_ledger::{Branch, PruneConfig, RealityLedger, TxId, Weight, WeightFn};

const SCENARIOS: u64 = 120;
const PERMUTATIONS: u64 = 20;
const SMALL: usize = 15;
const OPS_FACTOR: u64 = 16;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn engine(scn: &Scenario, perm: Option<u64>) -> Result<RealityLedger, String> {
    let (rl, rejected) = replay_engine(scn, perm).map_err(|e| e.to_string())?;
    ensure(rejected == 0 && rl.ledger().pending_len() == 0, || {
        format!("seed {:?}: {rejected} rejected, {} pending", scn.meta.seed, rl.ledger().pending_len())
    })?;
    Ok(rl)
}

fn names(f: &reality_ledger::sim::Fixture, set: &BTreeSet<TxId>) -> BTreeSet<String> {
    let labels = f.labels();
    set.iter().map(|c| labels[c].clone()).collect()
}

fn fig4_structure() -> Outcome {
    let f = fixture("fig4").unwrap();
    let rl = engine(&f.scenario, None)?;
    let view = rl.branches();
    let dag = view.materialize(1_000).map_err(|e| e.to_string())?;
    let leaves: BTreeSet<BTreeSet<String>> = dag.leaves().iter().map(|b| names(&f, b.conflicts())).collect();
    let expected: BTreeSet<BTreeSet<String>> = [
        vec!["aqua", "blue", "yellow"],
        vec!["aqua", "orange"],
        vec!["purple", "yellow"],
        vec!["red"],
    ]
    .iter()
    .map(|v| v.iter().map(|s| s.to_string()).collect())
    .collect();
    ensure(rl.conflicts().len() == 6, || format!("{} conflicts", rl.conflicts().len()))?;
    ensure(dag.len() == 9, || format!("{} branch vertices", dag.len()))?;
    ensure(leaves == expected, || format!("realities {leaves:?}"))?;
    Ok("6 conflicts, 9 branches, 4 realities".into())
}

fn fig6_selection() -> Outcome {
    let f = fixture("fig6").unwrap();
    let rl = engine(&f.scenario, None)?;
    let w = static_weight(&rl, f.weights.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let expected: BTreeSet<String> = ["aqua", "blue", "yellow"].iter().map(|s| s.to_string()).collect();
    for (alg, sel) in [
        ("branch walk", select_reality_branch_walk(&rl, &w)),
        ("conflict graph", select_reality_conflict_graph(&rl, &w)),
    ] {
        let sel = sel.map_err(|e| e.to_string())?;
        let got = names(&f, sel.branch.conflicts());
        ensure(got == expected, || format!("{alg} selected {got:?}"))?;
        ensure(sel.iterations == 3, || format!("{alg} took {} iterations", sel.iterations))?;
    }
    Ok("both algorithms select {yellow, aqua, blue} in 3 iterations".into())
}

fn order_invariance(scenarios: &[Scenario]) -> Outcome {
    let mut replays = 0;
    for scn in scenarios {
        let reference = digests(&engine(scn, None)?);
        for p in 0..PERMUTATIONS {
            let d = digests(&engine(scn, Some(p))?);
            ensure(d == reference, || format!("seed {:?} permutation {p} differs", scn.meta.seed))?;
            replays += 1;
        }
    }
    Ok(format!("{} scenarios, {replays} permuted replays", scenarios.len()))
}

fn rebuild_equivalence(scenarios: &[Scenario]) -> Outcome {
    let mut checked = 0;
    for scn in scenarios {
        let oracle = Oracle::new(scn);
        for p in std::iter::once(None).chain((0..PERMUTATIONS).map(Some)) {
            let rl = engine(scn, p)?;
            ensure(rl.matches_rebuild(), || format!("seed {:?} perm {p:?}: rebuild differs", scn.meta.seed))?;
            let cs = rl.conflicts();
            ensure(cs.conflicts() == oracle.conflicts, || format!("seed {:?}: conflict set", scn.meta.seed))?;
            ensure(pairs_of(cs.graph().edges()) == oracle.graph, || {
                format!("seed {:?}: conflict graph", scn.meta.seed)
            })?;
            ensure(pairs_of(cs.dag().edges()) == oracle.dag, || format!("seed {:?}: conflict DAG", scn.meta.seed))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} engine states equal the rebuild and the reference"))
}

fn realities_are_mis(scenarios: &[Scenario]) -> Outcome {
    let mut n = 0;
    let mut leaves_total = 0;
    for scn in scenarios {
        let rl = engine(scn, None)?;
        if rl.conflicts().len() > SMALL {
            continue;
        }
        let oracle = Oracle::new(scn);
        let dag = rl.branches().materialize(1 << 20).map_err(|e| e.to_string())?;
        let leaves: BTreeSet<BTreeSet<TxId>> = dag.leaves().into_iter().map(Branch::into_set).collect();
        ensure(leaves == oracle.realities(), || format!("seed {:?}: leaves differ", scn.meta.seed))?;
        n += 1;
        leaves_total += leaves.len();
    }
    ensure(n > 0, || "no small scenarios".into())?;
    Ok(format!("{n} scenarios, {leaves_total} realities"))
}

fn weightings(rl: &RealityLedger, seed: u64) -> Result<Vec<(String, WeightFn)>, String> {
    let mut out = vec![
        ("min-hash".to_string(), min_hash_weight(rl)),
        ("min-timestamp".to_string(), min_timestamp_weight(rl)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..5 {
        let values = random_static_weights(rl, &mut rng, 1 + i);
        out.push((format!("static #{i}"), static_weight(rl, &values).map_err(|e| e.to_string())?));
    }
    Ok(out)
}

fn selection_equivalence(scenarios: &[Scenario]) -> Outcome {
    let mut runs = 0;
    for scn in scenarios {
        let rl = engine(scn, None)?;
        let oracle = Oracle::new(scn);
        for (name, w) in weightings(&rl, scn.meta.seed.unwrap_or(0))? {
            let a = select_reality_branch_walk(&rl, &w).map_err(|e| e.to_string())?;
            let b = select_reality_conflict_graph(&rl, &w).map_err(|e| e.to_string())?;
            ensure(a.branch == b.branch, || format!("seed {:?} {name}: algorithms disagree", scn.meta.seed))?;
            ensure(oracle.is_reality(a.branch.conflicts()), || {
                format!("seed {:?} {name}: selection is not a reality", scn.meta.seed)
            })?;
            runs += 1;
        }
    }
    Ok(format!("{runs} selections agree"))
}

fn consistency(scenarios: &[Scenario]) -> Outcome {
    let mut checked = 0;
    for scn in scenarios {
        let rl = engine(scn, None)?;
        let oracle = Oracle::new(scn);
        let realities: Vec<BTreeSet<TxId>> = if rl.conflicts().len() <= SMALL {
            oracle.realities().into_iter().collect()
        } else {
            let sel = select_reality_conflict_graph(&rl, &min_hash_weight(&rl)).map_err(|e| e.to_string())?;
            vec![sel.branch.into_set()]
        };
        for r in realities {
            let txs = reality_ledger(&rl, &Branch::from_set_unchecked(r.clone())).map_err(|e| e.to_string())?;
            ensure(txs == oracle.reality_ledger(&r), || format!("seed {:?}: reality ledger", scn.meta.seed))?;
            validate_consistent(rl.ledger(), &txs).map_err(|e| format!("seed {:?}: {e}", scn.meta.seed))?;
            oracle
                .consistent(&txs)
                .map_err(|e| format!("seed {:?}: reference check: {e}", scn.meta.seed))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} reality ledgers consistent"))
}

fn pruning(scenarios: &[Scenario]) -> Outcome {
    let cfg = PruneConfig::new(Weight::new(51, 100)).unwrap();
    let mut removed = 0;
    for scn in scenarios {
        let mut rl = engine(scn, None)?;
        let oracle = Oracle::new(scn);
        let r = select_reality_conflict_graph(&rl, &min_hash_weight(&rl))
            .map_err(|e| e.to_string())?
            .branch;
        let w = static_weight(&rl, &reality_indicator_weights(&rl, &r)).map_err(|e| e.to_string())?;
        let sel = select_reality_branch_walk(&rl, &w).map_err(|e| e.to_string())?;
        ensure(sel.branch == r, || format!("seed {:?}: indicator weights select another reality", scn.meta.seed))?;
        ensure(w.branch_weight(&r).unwrap() >= cfg.theta(), || "reality is not confirmed".into())?;
        let confirmed = minimal_confirmed_branch(&rl, &w, &cfg).map_err(|e| e.to_string())?;
        ensure(confirmed == r, || format!("seed {:?}: confirmed branch differs", scn.meta.seed))?;

        let expected = oracle.reality_ledger(r.conflicts());
        let before = rl.ledger().len();
        rl.prune(&r).map_err(|e| e.to_string())?;
        let survivors: BTreeSet<TxId> = rl.ledger().ids().copied().collect();
        ensure(survivors == expected, || format!("seed {:?}: survivors differ", scn.meta.seed))?;
        ensure(rl.conflicts().is_empty() && rl.ledger().conflicts().is_empty(), || {
            format!("seed {:?}: conflicts remain", scn.meta.seed)
        })?;
        ensure(rl.matches_rebuild(), || format!("seed {:?}: rebuild differs", scn.meta.seed))?;
        oracle.consistent(&survivors).map_err(|e| format!("seed {:?}: {e}", scn.meta.seed))?;

        let kept: Vec<_> = scn
            .transactions
            .iter()
            .filter(|t| survivors.contains(&t.id()))
            .cloned()
            .collect();
        let fresh = Scenario {
            meta: scn.meta.clone(),
            genesis: scn.genesis.clone(),
            transactions: kept,
        };
        ensure(digests(&engine(&fresh, None)?) == digests(&rl), || {
            format!("seed {:?}: pruned engine differs from a fresh replay of its ledger", scn.meta.seed)
        })?;
        removed += before - survivors.len();
    }
    Ok(format!("{} scenarios pruned, {removed} transactions removed", scenarios.len()))
}

fn weight_axioms(scenarios: &[Scenario]) -> Outcome {
    let mut checked = 0;
    for scn in scenarios {
        let rl = engine(scn, None)?;
        let oracle = Oracle::new(scn);
        let ts = |c: &TxId| (oracle.txs[c].timestamp(), *c);
        for (name, w, expected) in [
            ("min-hash", min_hash_weight(&rl), oracle.neighbourhood_weights(|c| *c)),
            ("min-timestamp", min_timestamp_weight(&rl), oracle.neighbourhood_weights(ts)),
        ] {
            ensure(w.values() == &expected, || format!("seed {:?} {name}: weights differ", scn.meta.seed))?;
            check_axioms(&rl, &w).map_err(|e| format!("seed {:?} {name}: {e}", scn.meta.seed))?;
            oracle
                .check_axioms_pairwise(w.values())
                .map_err(|e| format!("seed {:?} {name}: {e}", scn.meta.seed))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} weightings satisfy the axioms"))
}

fn complexity() -> Outcome {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for t in [5usize, 10, 20, 40] {
        let rl = engine(&independent_pairs(t), None)?;
        let c = rl.conflicts().len() as u64;
        ensure(c == 2 * t as u64, || format!("{c} conflicts for {t} pairs"))?;
        ensure(rl.branches().materialize(10_000).is_err() || t < 10, || {
            "branch DAG unexpectedly small".into()
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(t as u64);
        let fns = [
            min_hash_weight(&rl),
            min_timestamp_weight(&rl),
            static_weight(&rl, &random_static_weights(&rl, &mut rng, 3)).map_err(|e| e.to_string())?,
        ];
        for w in &fns {
            for sel in [select_reality_branch_walk(&rl, w), select_reality_conflict_graph(&rl, w)] {
                let ops = sel.map_err(|e| e.to_string())?.ops;
                ensure(ops <= OPS_FACTOR * c * c, || format!("{ops} ops for |C| = {c}"))?;
                worst = worst.max(ops as f64 / (c * c) as f64);
            }
        }
        detail.push(c.to_string());
    }
    Ok(format!(
        "|C| in {{{}}}: ops <= {OPS_FACTOR}|C|^2 (max ratio {worst:.2})",
        detail.join(", ")
    ))
}

fn conservation(scenarios: &[Scenario]) -> Outcome {
    let mut checked = 0;
    for scn in scenarios {
        let rl = engine(scn, None)?;
        let oracle = Oracle::new(scn);
        let genesis = scn.genesis_value_sum() as u128;
        ensure(oracle.genesis_value() == genesis, || "genesis sum".into())?;
        let realities: Vec<Branch> = if rl.conflicts().len() <= SMALL {
            rl.branches()
                .realities_bruteforce(SMALL)
                .map_err(|e| e.to_string())?
                .into_iter()
                .collect()
        } else {
            vec![select_reality_conflict_graph(&rl, &min_hash_weight(&rl)).map_err(|e| e.to_string())?.branch]
        };
        for r in realities {
            let txs = reality_ledger(&rl, &r).map_err(|e| e.to_string())?;
            let state = rl.ledger().ledger_state(&txs).map_err(|e| e.to_string())?;
            ensure(state.value_sum() == genesis, || format!("seed {:?}: value not conserved", scn.meta.seed))?;
            ensure(oracle.state_value(&txs) == genesis, || format!("seed {:?}: reference sum", scn.meta.seed))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} reality states sum to the genesis value"))
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let scenarios = corpus(SCENARIOS);
    let small = scenarios
        .iter()
        .filter(|s| Oracle::new(s).conflicts.len() <= SMALL)
        .count();
    println!(
        "acceptance corpus: {} scenarios ({} with at most {SMALL} conflicts)",
        scenarios.len(),
        small
    );

    let criteria: Vec<Criterion<'_>> = vec![
        ("fig4 fixture structure", Box::new(fig4_structure)),
        ("fig6 selection", Box::new(fig6_selection)),
        ("order invariance", Box::new(|| order_invariance(&scenarios))),
        ("incremental equals rebuild", Box::new(|| rebuild_equivalence(&scenarios))),
        ("realities are maximal independent sets", Box::new(|| realities_are_mis(&scenarios))),
        ("selection algorithms agree", Box::new(|| selection_equivalence(&scenarios))),
        ("reality ledgers are consistent", Box::new(|| consistency(&scenarios))),
        ("pruning yields the reality ledger", Box::new(|| pruning(&scenarios))),
        ("weight axioms", Box::new(|| weight_axioms(&scenarios))),
        ("selection complexity", Box::new(complexity)),
        ("value conservation", Box::new(|| conservation(&scenarios))),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        t0.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
