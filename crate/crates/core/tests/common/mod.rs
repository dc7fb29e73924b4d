//! Shared generators for the integration test suites.

#![allow(dead_code)]

use rand::prelude::*;
use rand::rngs::StdRng;
use std::collections::BTreeMap;
use tg_core::cospan::{Cospan, CospanBody};
use tg_core::family::SortedSet;
use tg_core::graph::{ConcreteTermGraph, NodeDef};
use tg_core::semantics::Algebra;
use tg_core::signature::Signature;
use tg_core::to_abstract;

pub fn sigma0() -> Signature {
    Signature::new(
        ["star"],
        [
            ("α", vec![], "star"),
            ("β", vec![], "star"),
            ("+", vec!["star", "star"], "star"),
            ("*", vec!["star", "star"], "star"),
        ],
    )
    .unwrap()
}

/// A random two-sorted signature with a constant per sort, so every slot
/// stays satisfiable when generating graphs.
pub fn random_two_sorted(rng: &mut StdRng) -> Signature {
    let sorts = ["sa", "sb"];
    let mut ops: Vec<(String, Vec<String>, String)> = vec![
        ("ca".into(), vec![], "sa".into()),
        ("cb".into(), vec![], "sb".into()),
    ];
    let extra = rng.gen_range(2..=5);
    for i in 0..extra {
        let arity = rng.gen_range(1..=3);
        let inputs = (0..arity)
            .map(|_| sorts[rng.gen_range(0..2)].to_string())
            .collect();
        let output = sorts[rng.gen_range(0..2)].to_string();
        ops.push((format!("op{i}"), inputs, output));
    }
    Signature::new(sorts.map(String::from), ops).unwrap()
}

/// Pool of available providers per sort while growing a graph.
fn providers<'a>(
    inputs: &'a SortedSet,
    nodes: &'a BTreeMap<String, NodeDef>,
    sort: &str,
) -> Vec<&'a str> {
    let mut out: Vec<&str> = inputs
        .iter()
        .filter(|(_, s)| *s == sort)
        .map(|(n, _)| n)
        .collect();
    out.extend(
        nodes
            .iter()
            .filter(|(_, d)| d.op.output() == sort)
            .map(|(n, _)| n.as_str()),
    );
    out
}

/// A random acyclic graph: children always point at earlier nodes or
/// inputs, so acyclicity holds by construction.
pub fn random_acyclic_graph(
    sig: &Signature,
    rng: &mut StdRng,
    inputs: SortedSet,
    max_internal: usize,
) -> ConcreteTermGraph {
    let internal = rng.gen_range(1..=max_internal.max(1));
    let ops: Vec<_> = sig.ops().cloned().collect();
    let mut nodes: BTreeMap<String, NodeDef> = BTreeMap::new();
    for i in 0..internal {
        let feasible: Vec<_> = ops
            .iter()
            .filter(|op| {
                op.inputs()
                    .iter()
                    .all(|s| !providers(&inputs, &nodes, s).is_empty())
            })
            .collect();
        let op = (*feasible.choose(rng).expect("constants always feasible")).clone();
        let children = op
            .inputs()
            .iter()
            .map(|s| {
                let pool = providers(&inputs, &nodes, s);
                pool.choose(rng).unwrap().to_string()
            })
            .collect();
        nodes.insert(format!("g{i}"), NodeDef { op, children });
    }
    ConcreteTermGraph::new(sig, inputs, nodes).expect("generated graph is well formed")
}

/// A random, possibly cyclic graph: node operations are fixed first
/// (with an anchor constant per sort), then children are drawn from the
/// whole node set.
pub fn random_graph(
    sig: &Signature,
    rng: &mut StdRng,
    inputs: SortedSet,
    max_internal: usize,
) -> ConcreteTermGraph {
    let ops: Vec<_> = sig.ops().cloned().collect();
    let constants: Vec<_> = ops.iter().filter(|op| op.arity() == 0).collect();
    let mut chosen: BTreeMap<String, tg_core::OpSym> = BTreeMap::new();
    for (i, constant) in constants.iter().enumerate() {
        chosen.insert(format!("anchor{i}"), (*constant).clone());
    }
    let internal = rng.gen_range(1..=max_internal.max(1));
    for i in 0..internal {
        chosen.insert(format!("g{i}"), ops.choose(rng).unwrap().clone());
    }
    // Providers by sort across the entire graph.
    let sort_pool = |sort: &str| -> Vec<String> {
        let mut pool: Vec<String> = inputs
            .iter()
            .filter(|(_, s)| *s == sort)
            .map(|(n, _)| n.to_string())
            .collect();
        pool.extend(
            chosen
                .iter()
                .filter(|(_, op)| op.output() == sort)
                .map(|(n, _)| n.clone()),
        );
        pool
    };
    let mut nodes = BTreeMap::new();
    for (name, op) in &chosen {
        let children = op
            .inputs()
            .iter()
            .map(|s| {
                let pool = sort_pool(s);
                pool.choose(rng).expect("anchors cover every sort").clone()
            })
            .collect();
        nodes.insert(
            name.clone(),
            NodeDef {
                op: op.clone(),
                children,
            },
        );
    }
    ConcreteTermGraph::new(sig, inputs, nodes).expect("generated graph is well formed")
}

pub fn random_inputs(rng: &mut StdRng, sig: &Signature, max: usize) -> SortedSet {
    let sorts: Vec<&str> = sig.sorts().collect();
    let n = rng.gen_range(0..=max);
    SortedSet::from_pairs(
        (0..n).map(|i| (format!("x{i}"), sorts[rng.gen_range(0..sorts.len())].to_string())),
    )
    .unwrap()
}

/// A random acyclic cospan with the given source boundary. The target
/// boundary is fresh names mapped onto random carrier nodes.
pub fn random_cospan(
    sig: &Signature,
    rng: &mut StdRng,
    source: SortedSet,
    target_prefix: &str,
    target_size: usize,
) -> Cospan {
    let graph = random_acyclic_graph(sig, rng, source.clone(), 4);
    let body = to_abstract(&graph).unwrap();
    let carrier: Vec<(String, String)> = body
        .ctx()
        .nodes()
        .iter()
        .map(|(n, s)| (n.to_string(), s.to_string()))
        .collect();
    let mut target = SortedSet::new();
    let mut out = BTreeMap::new();
    for i in 0..target_size {
        let (node, sort) = carrier.choose(rng).unwrap().clone();
        let name = format!("{target_prefix}{i}");
        target.insert(name.clone(), sort).unwrap();
        out.insert(name, node);
    }
    Cospan::new(source, target, CospanBody::Acyclic(body), out).unwrap()
}

/// A composable pair `c1 : A → B`, `c2 : B → C`.
pub fn composable_pair(sig: &Signature, rng: &mut StdRng) -> (Cospan, Cospan) {
    let a = random_inputs(rng, sig, 2);
    let mid = rng.gen_range(0..=3);
    let c1 = random_cospan(sig, rng, a, "b", mid);
    let end = rng.gen_range(0..=2);
    let c2 = random_cospan(sig, rng, c1.target().clone(), "c", end);
    (c1, c2)
}

/// A composable triple.
pub fn composable_triple(sig: &Signature, rng: &mut StdRng) -> (Cospan, Cospan, Cospan) {
    let (c1, c2) = composable_pair(sig, rng);
    let end = rng.gen_range(0..=2);
    let c3 = random_cospan(sig, rng, c2.target().clone(), "d", end);
    (c1, c2, c3)
}

/// Deterministic integer interpretation for arbitrary operation names.
pub fn synthetic_int_algebra() -> Algebra<i64> {
    fn op_seed(name: &str) -> i64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for byte in name.bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        (h % 1000) as i64
    }
    let mut alg = Algebra::<i64>::default();
    // One closure interprets everything; register per-name wrappers on demand.
    struct Universal;
    impl Universal {
        fn apply(name: &str, args: &[i64]) -> i64 {
            let mut acc = op_seed(name);
            for (i, a) in args.iter().enumerate() {
                acc = acc.wrapping_add((i as i64 + 3).wrapping_mul(*a));
            }
            acc
        }
    }
    // Register for the operation names the generators can produce.
    for name in [
        "α", "β", "+", "*", "ca", "cb", "op0", "op1", "op2", "op3", "op4",
    ] {
        let owned = name.to_string();
        alg = alg.op(name, move |args: &[i64]| Universal::apply(&owned, args));
    }
    alg
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
