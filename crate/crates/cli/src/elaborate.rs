//! Turn a parsed let program into a cospan over a signature.
//!
//! Inputs become the source boundary, bindings become internal nodes,
//! arguments become child edges, and outputs become the target boundary
//! (each output name mapping to the node of the same name). Sorts are
//! inferred: a binding takes its operation's output sort, and each input
//! takes the sort demanded by its first use; in a single-sorted
//! signature unannotated, unused inputs default to the one sort.

use crate::error::CliError;
use crate::letprog::LetProgram;
use std::collections::BTreeMap;
use tg_core::cospan::{Cospan, CospanBody};
use tg_core::family::SortedSet;
use tg_core::graph::NodeDef;
use tg_core::{to_abstract, to_cyclic, ConcreteTermGraph, Signature};

pub fn elaborate(program: &LetProgram, sig: &Signature) -> Result<Cospan, CliError> {
    // Sort inference: bindings are fixed by their operation; inputs are
    // constrained by every argument position they occur in.
    let mut inferred: BTreeMap<&str, String> = BTreeMap::new();
    for (name, sort) in &program.inputs {
        if let Some(sort) = sort {
            if !sig.has_sort(sort) {
                return Err(CliError::SortMismatch {
                    place: format!("input {name}"),
                    expected: "a declared sort".into(),
                    found: sort.clone(),
                });
            }
            inferred.insert(name, sort.clone());
        }
    }
    let mut ops: BTreeMap<&str, &tg_core::OpSym> = BTreeMap::new();
    for b in &program.bindings {
        let op = sig
            .op(&b.op)
            .ok_or_else(|| CliError::UnknownOp(b.op.clone()))?;
        if b.args.len() != op.arity() {
            return Err(CliError::ArityMismatch {
                op: b.op.clone(),
                expected: op.arity(),
                found: b.args.len(),
            });
        }
        if let Some(annotated) = &b.sort {
            if annotated != op.output() {
                return Err(CliError::SortMismatch {
                    place: format!("binding {}", b.name),
                    expected: op.output().to_string(),
                    found: annotated.clone(),
                });
            }
        }
        ops.insert(&b.name, op);
        inferred.insert(&b.name, op.output().to_string());
    }
    for b in &program.bindings {
        let op = ops[b.name.as_str()];
        for (arg, slot) in b.args.iter().zip(op.inputs()) {
            match inferred.get(arg.as_str()) {
                None => {
                    inferred.insert(arg, slot.clone());
                }
                Some(found) if found != slot => {
                    return Err(CliError::SortMismatch {
                        place: format!("argument {arg} of {}", b.name),
                        expected: slot.clone(),
                        found: found.clone(),
                    });
                }
                Some(_) => {}
            }
        }
    }
    // Unconstrained inputs: default to the only sort if there is one.
    let sorts: Vec<&str> = sig.sorts().collect();
    for (name, _) in &program.inputs {
        if !inferred.contains_key(name.as_str()) {
            if sorts.len() == 1 {
                inferred.insert(name, sorts[0].to_string());
            } else {
                return Err(CliError::CannotInferSort(name.clone()));
            }
        }
    }

    let inputs = SortedSet::from_pairs(
        program
            .inputs
            .iter()
            .map(|(n, _)| (n.clone(), inferred[n.as_str()].clone())),
    )?;
    let nodes: BTreeMap<String, NodeDef> = program
        .bindings
        .iter()
        .map(|b| {
            (
                b.name.clone(),
                NodeDef {
                    op: ops[b.name.as_str()].clone(),
                    children: b.args.clone(),
                },
            )
        })
        .collect();
    let graph = ConcreteTermGraph::new(sig, inputs.clone(), nodes)?;

    let body = if program.recursive {
        CospanBody::Cyclic(to_cyclic(&graph))
    } else {
        // Backwards-only references guarantee acyclicity.
        CospanBody::Acyclic(to_abstract(&graph)?)
    };
    let mut target = SortedSet::new();
    let mut out = BTreeMap::new();
    for name in &program.outputs {
        let sort = graph
            .sort_of(name)
            .ok_or_else(|| CliError::UnknownName(name.clone()))?;
        target.insert(name.clone(), sort.to_string())?;
        out.insert(name.clone(), name.clone());
    }
    Ok(Cospan::new(inputs, target, body, out)?)
}

/// Render a loaded graph back into let notation. Node names that are not
/// valid identifiers are renamed with an `n` prefix; cyclic graphs come
/// out as letrec programs.
pub fn to_let_program(
    graph: &ConcreteTermGraph,
    outputs: &[(String, String)],
) -> Result<LetProgram, CliError> {
    use crate::letprog::{is_identifier, Binding};
    let mut taken: std::collections::BTreeSet<String> = graph
        .inputs()
        .names()
        .map(str::to_string)
        .chain(graph.nodes().keys().cloned())
        .collect();
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    for (name, _) in graph.inputs().iter() {
        if !is_identifier(name) {
            return Err(CliError::Other(format!(
                "input {name:?} is not expressible in let notation"
            )));
        }
        rename.insert(name.to_string(), name.to_string());
    }
    for name in graph.nodes().keys() {
        if is_identifier(name) {
            rename.insert(name.clone(), name.clone());
        } else {
            let fresh = tg_core::family::fresh_name(&format!("n{name}"), &|n| {
                taken.contains(n) || !is_identifier(n)
            });
            taken.insert(fresh.clone());
            rename.insert(name.clone(), fresh);
        }
    }
    let (order, recursive) = match graph.classify() {
        tg_core::Classification::Acyclic { order } => (order, false),
        tg_core::Classification::Cyclic { .. } => {
            (graph.nodes().keys().cloned().collect(), true)
        }
    };
    let bindings = order
        .iter()
        .map(|name| {
            let def = graph.node(name).expect("order lists nodes");
            Binding {
                name: rename[name].clone(),
                sort: None,
                op: def.op.name().to_string(),
                args: def.children.iter().map(|c| rename[c].clone()).collect(),
            }
        })
        .collect();
    // Output aliases collapse: let notation names outputs by their node.
    let mut out_names: Vec<String> = Vec::new();
    for (_, node) in outputs {
        let name = rename[node].clone();
        if !out_names.contains(&name) {
            out_names.push(name);
        }
    }
    Ok(LetProgram {
        inputs: graph
            .inputs()
            .iter()
            .map(|(n, s)| (n.to_string(), Some(s.to_string())))
            .collect(),
        bindings,
        outputs: out_names,
        recursive,
    })
}
