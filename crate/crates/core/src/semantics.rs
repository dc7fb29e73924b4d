//! Algebras and the evaluation of term graphs.
//!
//! An [`Algebra`] interprets every operation as a total function on an
//! opaque carrier with user-supplied equality. [`eval_tree`] evaluates a
//! tree by structural recursion; node labels are semantically inert —
//! only the operations and the variable environment matter, which is
//! precisely what separates a term graph from a decorated tree.
//! [`lift`] evaluates an abstract term graph once per node in
//! topological order, so a shared subterm is computed exactly once and
//! the operation-application count equals the number of internal nodes.
//! [`solve_cyclic`] treats a cyclic coalgebra as a guarded system of
//! recursive equations and, when the algebra carries a fixpoint solver,
//! iterates synchronously from bottom until the values stabilise.

use crate::coalgebra::{classify_coalgebra, from_abstract, to_abstract, AbstractTermGraph,
    CyclicCoalgebra, Step};
use crate::graph::Classification;
use crate::trees::PTree;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value bound for variable {0:?}")]
    UnboundVariable(String),
    #[error("algebra has no interpretation for operation {0:?}")]
    NoInterpretation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("iteration did not stabilise within {iterations} rounds")]
    Unsolvable { iterations: usize },
    #[error("cyclic input but the algebra has no fixpoint solver")]
    MissingSolver,
    #[error("{0}")]
    Eval(#[from] EvalError),
}

/// Variable assignment, total on the variables it is used with.
pub type Environment<V> = BTreeMap<String, V>;

type OpFn<V> = Arc<dyn Fn(&[V]) -> V + Send + Sync>;
type EqFn<V> = Arc<dyn Fn(&V, &V) -> bool + Send + Sync>;
type BottomFn<V> = Arc<dyn Fn(&str) -> V + Send + Sync>;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Capability for solving guarded recursive equations by iteration:
/// a bottom value per sort, a stability predicate, and an iteration cap.
#[derive(Clone)]
pub struct FixpointSolver<V> {
    bottom: BottomFn<V>,
    stable: EqFn<V>,
    max_iterations: usize,
}

impl<V> FixpointSolver<V> {
    pub fn new(
        bottom: impl Fn(&str) -> V + Send + Sync + 'static,
        stable: impl Fn(&V, &V) -> bool + Send + Sync + 'static,
        max_iterations: usize,
    ) -> Self {
        FixpointSolver {
            bottom: Arc::new(bottom),
            stable: Arc::new(stable),
            max_iterations,
        }
    }
}

impl FixpointSolver<f64> {
    /// Numeric solver: bottom 0.0 on every sort, absolute-difference
    /// stability, default tolerance and iteration cap.
    pub fn numeric() -> Self {
        Self::numeric_with(DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)
    }

    pub fn numeric_with(tolerance: f64, max_iterations: usize) -> Self {
        FixpointSolver::new(
            |_| 0.0,
            move |a: &f64, b: &f64| (a - b).abs() <= tolerance,
            max_iterations,
        )
    }
}

/// An interpretation of operations on an opaque carrier. Values are
/// compared with the user-supplied equality; interpretations must be
/// total on their operation's arity.
#[derive(Clone)]
pub struct Algebra<V> {
    ops: BTreeMap<String, OpFn<V>>,
    equal: EqFn<V>,
    solver: Option<FixpointSolver<V>>,
}

impl<V> Algebra<V> {
    pub fn new(equal: impl Fn(&V, &V) -> bool + Send + Sync + 'static) -> Self {
        Algebra {
            ops: BTreeMap::new(),
            equal: Arc::new(equal),
            solver: None,
        }
    }

    pub fn op(mut self, name: impl Into<String>, f: impl Fn(&[V]) -> V + Send + Sync + 'static) -> Self {
        self.ops.insert(name.into(), Arc::new(f));
        self
    }

    pub fn with_solver(mut self, solver: FixpointSolver<V>) -> Self {
        self.solver = Some(solver);
        self
    }

    pub fn solver(&self) -> Option<&FixpointSolver<V>> {
        self.solver.as_ref()
    }

    pub fn interprets(&self, op: &str) -> bool {
        self.ops.contains_key(op)
    }

    pub fn apply(&self, op: &str, args: &[V]) -> Result<V, EvalError> {
        let f = self
            .ops
            .get(op)
            .ok_or_else(|| EvalError::NoInterpretation(op.to_string()))?;
        Ok(f(args))
    }

    pub fn values_equal(&self, a: &V, b: &V) -> bool {
        (self.equal)(a, b)
    }
}

impl<V: PartialEq + Send + Sync + 'static> Default for Algebra<V> {
    fn default() -> Self {
        Algebra::new(|a: &V, b: &V| a == b)
    }
}

/// Evaluate a tree: leaves from the environment, nodes by applying the
/// operation's interpretation to the children's values. Labels are
/// discarded.
pub fn eval_tree<V: Clone>(
    alg: &Algebra<V>,
    env: &Environment<V>,
    tree: &PTree,
) -> Result<V, EvalError> {
    match tree {
        PTree::Leaf(a) => env
            .get(a)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(a.clone())),
        PTree::Node { op, children, .. } => {
            let args = children
                .iter()
                .map(|c| eval_tree(alg, env, c))
                .collect::<Result<Vec<_>, _>>()?;
            alg.apply(op.name(), &args)
        }
    }
}

/// The value of every node of an abstract term graph, plus how many
/// operation applications computing them took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lifted<V> {
    pub values: BTreeMap<String, V>,
    pub op_applications: usize,
}

/// Evaluate the whole node set of an abstract term graph: variables from
/// the environment, internal nodes once each in topological order. The
/// application count therefore equals the number of internal nodes, no
/// matter how often they are referenced, and the result agrees with
/// evaluating each node's tree from scratch.
pub fn lift<V: Clone>(
    atg: &AbstractTermGraph,
    env: &Environment<V>,
    alg: &Algebra<V>,
) -> Result<Lifted<V>, EvalError> {
    let (graph, bijection) = from_abstract(atg);
    let order = match graph.classify() {
        Classification::Acyclic { order } => order,
        Classification::Cyclic { .. } => unreachable!("valid assignments extract acyclically"),
    };
    let mut values: BTreeMap<String, V> = BTreeMap::new();
    for (var, _) in graph.inputs().iter() {
        let v = env
            .get(var)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(var.to_string()))?;
        values.insert(var.to_string(), v);
    }
    let mut op_applications = 0;
    for name in &order {
        let def = graph.node(name).expect("order lists nodes");
        let args: Vec<V> = def.children.iter().map(|c| values[c].clone()).collect();
        let v = alg.apply(def.op.name(), &args)?;
        op_applications += 1;
        values.insert(name.clone(), v);
    }
    // Key the result by the coalgebra's own node names.
    let values = bijection
        .iter()
        .map(|(b, graph_name)| (b.clone(), values[graph_name].clone()))
        .collect();
    Ok(Lifted {
        values,
        op_applications,
    })
}

/// Solve the guarded recursive system a cyclic coalgebra presents. On
/// acyclic inputs this agrees with [`lift`] exactly; on cyclic inputs it
/// requires the algebra's solver and iterates all internal nodes
/// synchronously from bottom until stable.
pub fn solve_cyclic<V: Clone>(
    c: &CyclicCoalgebra,
    env: &Environment<V>,
    alg: &Algebra<V>,
) -> Result<BTreeMap<String, V>, SolveError> {
    if classify_coalgebra(c).is_acyclic() {
        let (graph, bijection) = c.to_concrete();
        let atg = to_abstract(&graph).expect("classified acyclic");
        let lifted = lift(&atg, env, alg)?;
        // lift keys by the graph's names; translate back to ours.
        let values = bijection
            .into_iter()
            .map(|(b, graph_name)| (b, lifted.values[&graph_name].clone()))
            .collect();
        return Ok(values);
    }
    let solver = alg.solver().ok_or(SolveError::MissingSolver)?;

    let ctx = c.ctx();
    let mut current: BTreeMap<String, V> = BTreeMap::new();
    for (node, sort) in ctx.nodes().iter() {
        match c.step(node).unwrap() {
            Step::Var(a) => {
                let v = env
                    .get(a)
                    .cloned()
                    .ok_or_else(|| EvalError::UnboundVariable(a.to_string()))?;
                current.insert(node.to_string(), v);
            }
            Step::Op(..) => {
                current.insert(node.to_string(), (solver.bottom)(sort));
            }
        }
    }
    for _ in 0..solver.max_iterations {
        let mut next = current.clone();
        let mut stable = true;
        for (node, step) in c.steps() {
            if let Step::Op(op, children) = step {
                let args: Vec<V> = children.iter().map(|ch| current[ch].clone()).collect();
                let v = alg.apply(op.name(), &args)?;
                if !(solver.stable)(&current[node], &v) {
                    stable = false;
                }
                next.insert(node.clone(), v);
            }
        }
        current = next;
        if stable {
            return Ok(current);
        }
    }
    Err(SolveError::Unsolvable {
        iterations: solver.max_iterations,
    })
}
