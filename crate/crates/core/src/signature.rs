//! Many-sorted signatures and the endofunctor they generate.
//!
//! A signature declares a finite set of sorts and a finite set of
//! operation symbols, each with an ordered list of input sorts and one
//! output sort. Constants are operations of arity zero. The signature
//! generates a polynomial endofunctor on finite sort-indexed families:
//! [`functor_elements`] materialises its action on a concrete family,
//! which the test suites use as an enumeration oracle.

use crate::family::SortedSet;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("unknown sort {0:?}")]
    UnknownSort(String),
    #[error("invalid sort name {0:?}: sort names use [A-Za-z0-9_]")]
    InvalidSortName(String),
    #[error("invalid operation name {0:?}")]
    InvalidOpName(String),
    #[error("unknown operation {0:?}")]
    UnknownOp(String),
}

/// An operation symbol: a name, an ordered list of input sorts (its
/// arity is their count) and an output sort. Symbols are immutable
/// shared descriptors, so cloning is cheap however many nodes carry one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpSym {
    name: Arc<str>,
    inputs: Arc<[String]>,
    output: Arc<str>,
}

impl OpSym {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn output(&self) -> &str {
        &self.output
    }
}

/// A validated many-sorted signature. The single-sorted case is just a
/// signature with one sort used in every arity slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    sorts: BTreeSet<String>,
    ops: BTreeMap<String, OpSym>,
}

fn valid_sort_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Signature {
    /// Build a signature from sort names and `(name, inputs, output)`
    /// operation declarations. Duplicate names and references to
    /// undeclared sorts are rejected.
    pub fn new<S, O, N, I, T>(sorts: S, ops: O) -> Result<Self, SignatureError>
    where
        S: IntoIterator<Item = N>,
        O: IntoIterator<Item = (N, I, N)>,
        N: Into<String>,
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let mut sort_set = BTreeSet::new();
        for sort in sorts {
            let sort = sort.into();
            if !valid_sort_name(&sort) {
                return Err(SignatureError::InvalidSortName(sort));
            }
            if !sort_set.insert(sort.clone()) {
                return Err(SignatureError::DuplicateName(sort));
            }
        }
        let mut op_map = BTreeMap::new();
        for (name, inputs, output) in ops {
            let name = name.into();
            crate::family::validate_name(&name)
                .map_err(|_| SignatureError::InvalidOpName(name.clone()))?;
            let inputs: Vec<String> = inputs.into_iter().map(Into::into).collect();
            let output = output.into();
            for sort in inputs.iter().chain(std::iter::once(&output)) {
                if !sort_set.contains(sort) {
                    return Err(SignatureError::UnknownSort(sort.clone()));
                }
            }
            let op = OpSym {
                name: name.as_str().into(),
                inputs: inputs.into(),
                output: output.into(),
            };
            if op_map.insert(name.clone(), op).is_some() {
                return Err(SignatureError::DuplicateName(name));
            }
        }
        Ok(Signature {
            sorts: sort_set,
            ops: op_map,
        })
    }

    pub fn has_sort(&self, sort: &str) -> bool {
        self.sorts.contains(sort)
    }

    pub fn sorts(&self) -> impl Iterator<Item = &str> {
        self.sorts.iter().map(String::as_str)
    }

    pub fn op(&self, name: &str) -> Option<&OpSym> {
        self.ops.get(name)
    }

    pub fn ops(&self) -> impl Iterator<Item = &OpSym> {
        self.ops.values()
    }
}

/// One element of the materialised functor application: an operation
/// together with a tuple of argument names drawn from the family.
pub type FunctorElement = (OpSym, Vec<String>);

/// Materialise the signature endofunctor on a finite family `X`: for
/// each sort `t`, every pair of an operation with output `t` and an
/// argument tuple drawn from `X` respecting the operation's input
/// sorts. Exposed for test oracles; production paths never enumerate
/// this for large `X`.
pub fn functor_elements(
    sig: &Signature,
    family: &SortedSet,
) -> Result<BTreeMap<String, Vec<FunctorElement>>, SignatureError> {
    for (_, sort) in family.iter() {
        if !sig.has_sort(sort) {
            return Err(SignatureError::UnknownSort(sort.to_string()));
        }
    }
    let mut by_sort: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (name, sort) in family.iter() {
        by_sort
            .entry(sort.to_string())
            .or_default()
            .push(name.to_string());
    }
    let empty = Vec::new();
    let mut out: BTreeMap<String, Vec<FunctorElement>> = sig
        .sorts()
        .map(|s| (s.to_string(), Vec::new()))
        .collect();
    for op in sig.ops() {
        let pools: Vec<&[String]> = op
            .inputs()
            .iter()
            .map(|s| by_sort.get(s).map(Vec::as_slice).unwrap_or(&empty))
            .collect();
        let mut tuples = vec![Vec::new()];
        for pool in pools {
            let mut next = Vec::with_capacity(tuples.len() * pool.len());
            for tuple in &tuples {
                for candidate in pool {
                    let mut extended = tuple.clone();
                    extended.push(candidate.clone());
                    next.push(extended);
                }
            }
            tuples = next;
        }
        let bucket = out.get_mut(op.output()).expect("output sort declared");
        for tuple in tuples {
            bucket.push((op.clone(), tuple));
        }
    }
    Ok(out)
}
