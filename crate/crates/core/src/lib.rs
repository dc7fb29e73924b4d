//! Term graphs with sharing, built coalgebraically.
//!
//! A term graph is syntax in which subterms may be shared or discarded:
//! a DAG (or, in the cyclic case, an arbitrary graph) whose nodes carry
//! operation symbols from a many-sorted signature and whose ordered edges
//! point at argument nodes. This crate provides:
//!
//! - [`signature`]: many-sorted signatures and the induced polynomial
//!   endofunctor on finite sort-indexed families;
//! - [`trees`]: finite labelled trees (the initial algebra for
//!   `X ↦ A + B×F(X)`) with root extraction, recursive subtree copying,
//!   splicing and relabelling;
//! - [`graph`]: concrete term graphs, their morphisms, and the
//!   acyclic/cyclic classification;
//! - [`coalgebra`]: abstract term graphs as comonad coalgebras, the
//!   equivalence with concrete term graphs in both directions, cyclic
//!   term graphs as step coalgebras, and bounded unfolding;
//! - [`semantics`]: algebras, evaluation of trees and term graphs
//!   (evaluating a shared node exactly once), and a fixpoint solver for
//!   guarded recursive equations;
//! - [`cospan`]: term graphs from `A` to `B` as cospans, pushout
//!   composition, identities, tensor, equivalence testing, and the
//!   interpretation of cospans in an algebra.

pub mod coalgebra;
pub mod cospan;
pub mod family;
pub mod graph;
pub mod semantics;
pub mod signature;
pub mod trees;

pub use coalgebra::{
    check_atg_morphism, classify_coalgebra, from_abstract, to_abstract, to_cyclic, unfold,
    validate_atg, AbstractTermGraph, CoalgebraError, CyclicCoalgebra, LawCheck, LawReport, Step,
    UnfoldTree,
};
pub use cospan::{
    compose, compose_coalgebra, compose_concrete, embed, equiv, identity, interpret_cospan,
    pushout, pushout_coalgebra, tensor, verify_equiv_witness, Cospan, CospanBody, CospanError,
    PushoutResult,
};
pub use family::{FamilyError, SortedSet};
pub use graph::{
    check_morphism, Classification, ConcreteTermGraph, GraphError, GraphMorphism, MorphismReport,
};
pub use semantics::{
    eval_tree, lift, solve_cyclic, Algebra, Environment, EvalError, FixpointSolver, Lifted,
    SolveError,
};
pub use signature::{functor_elements, OpSym, Signature, SignatureError};
pub use trees::{comult, counit_root, depth, flatten, relabel, Context, PTree, TreeError};
