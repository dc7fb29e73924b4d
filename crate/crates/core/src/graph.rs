//! Concrete term graphs over a signature.
//!
//! A concrete term graph has a set of input nodes, a set of internal
//! nodes labelled by operations, and for each internal node an ordered
//! child list drawn from inputs and internals. Cyclic graphs are legal
//! values; [`ConcreteTermGraph::classify`] separates them from acyclic
//! ones, returning a topological order or a concrete cycle. Unreachable
//! nodes are legal and meaningful: they are the graph's irrelevant
//! computations, and evaluation still visits them.

use crate::family::SortedSet;
use crate::signature::{OpSym, Signature};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("arity mismatch at node {node:?}: op {op:?} expects {expected} children, found {found}")]
    ArityMismatch {
        node: String,
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch at {place}: expected {expected}, found {found}")]
    SortMismatch {
        place: String,
        expected: String,
        found: String,
    },
    #[error("name clash: {0:?} is both an input and an internal node")]
    NameClash(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown operation {0:?}")]
    UnknownOp(String),
    #[error("{0}")]
    Family(#[from] crate::family::FamilyError),
}

/// An internal node: its operation and ordered children. Children refer
/// to inputs or internal nodes by name; repetition expresses multiple
/// edges to the same child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDef {
    pub op: OpSym,
    pub children: Vec<String>,
}

/// A validated concrete term graph. Input and internal node names are
/// disjoint, so child references resolve by membership alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteTermGraph {
    inputs: SortedSet,
    nodes: BTreeMap<String, NodeDef>,
}

/// Result of the acyclicity check: a linear order in which every node's
/// children precede it, or a concrete cycle in which each node is a
/// child of its predecessor (cyclically).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Acyclic { order: Vec<String> },
    Cyclic { witness: Vec<String> },
}

impl Classification {
    pub fn is_acyclic(&self) -> bool {
        matches!(self, Classification::Acyclic { .. })
    }
}

impl ConcreteTermGraph {
    /// Validate and build a graph: operations must come from `sig`,
    /// arities and sorts must line up, and input/internal names must be
    /// disjoint. Cyclic graphs are accepted.
    pub fn new(
        sig: &Signature,
        inputs: SortedSet,
        nodes: BTreeMap<String, NodeDef>,
    ) -> Result<Self, GraphError> {
        for (name, sort) in inputs.iter() {
            if !sig.has_sort(sort) {
                return Err(GraphError::SortMismatch {
                    place: format!("input {name}"),
                    expected: "a declared sort".into(),
                    found: sort.to_string(),
                });
            }
        }
        for name in nodes.keys() {
            crate::family::validate_name(name)?;
            if inputs.contains(name) {
                return Err(GraphError::NameClash(name.clone()));
            }
        }
        let graph = ConcreteTermGraph { inputs, nodes };
        for (name, def) in &graph.nodes {
            match sig.op(def.op.name()) {
                Some(declared) if declared == &def.op => {}
                Some(_) | None => return Err(GraphError::UnknownOp(def.op.name().to_string())),
            }
            if def.children.len() != def.op.arity() {
                return Err(GraphError::ArityMismatch {
                    node: name.clone(),
                    op: def.op.name().to_string(),
                    expected: def.op.arity(),
                    found: def.children.len(),
                });
            }
            for (i, child) in def.children.iter().enumerate() {
                let child_sort = graph
                    .sort_of(child)
                    .ok_or_else(|| GraphError::UnknownNode(child.clone()))?;
                let expected = &def.op.inputs()[i];
                if child_sort != expected {
                    return Err(GraphError::SortMismatch {
                        place: format!("child {} of node {name}", i + 1),
                        expected: expected.clone(),
                        found: child_sort.to_string(),
                    });
                }
            }
        }
        Ok(graph)
    }

    pub fn inputs(&self) -> &SortedSet {
        &self.inputs
    }

    pub fn nodes(&self) -> &BTreeMap<String, NodeDef> {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Option<&NodeDef> {
        self.nodes.get(name)
    }

    pub fn is_input(&self, name: &str) -> bool {
        self.inputs.contains(name)
    }

    /// The sort of a node or input, if the name exists.
    pub fn sort_of(&self, name: &str) -> Option<&str> {
        self.inputs
            .sort_of(name)
            .or_else(|| self.nodes.get(name).map(|d| d.op.output()))
    }

    /// All node and input names with sorts, as one sorted set.
    pub fn all_names(&self) -> SortedSet {
        let mut out = self.inputs.clone();
        for (name, def) in &self.nodes {
            out.insert(name.clone(), def.op.output().to_string())
                .expect("names validated disjoint");
        }
        out
    }

    /// Kahn's algorithm over the child relation restricted to internal
    /// nodes, with lexicographic tie-breaking. Returns the emission
    /// order, or the set of node indices left stuck by a cycle.
    fn saturate(&self) -> Result<Vec<usize>, Vec<bool>> {
        let names: Vec<&str> = self.nodes.keys().map(String::as_str).collect();
        let index: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let n = names.len();
        let mut remaining = vec![0usize; n];
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (v, name) in names.iter().enumerate() {
            for child in &self.nodes[*name].children {
                if let Some(&w) = index.get(child.as_str()) {
                    remaining[v] += 1;
                    parents[w].push(v);
                }
            }
        }
        // Indices follow name order, so the least index is the least name.
        let mut ready: BTreeSet<usize> =
            (0..n).filter(|&v| remaining[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        let mut emitted = vec![false; n];
        while let Some(&next) = ready.iter().next() {
            ready.remove(&next);
            order.push(next);
            emitted[next] = true;
            for &parent in &parents[next] {
                remaining[parent] -= 1;
                if remaining[parent] == 0 {
                    ready.insert(parent);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(emitted)
        }
    }

    /// The acyclicity verdict alone, without materialising an order or a
    /// cycle witness.
    pub fn is_acyclic(&self) -> bool {
        self.saturate().is_ok()
    }

    /// Classify the graph: a linear order in which every node's children
    /// precede it, or a concrete cycle found by walking child edges
    /// inside the stuck set.
    pub fn classify(&self) -> Classification {
        let names: Vec<&str> = self.nodes.keys().map(String::as_str).collect();
        let emitted = match self.saturate() {
            Ok(order) => {
                return Classification::Acyclic {
                    order: order.into_iter().map(|v| names[v].to_string()).collect(),
                }
            }
            Err(emitted) => emitted,
        };
        let stuck = |name: &str| {
            names
                .binary_search(&name)
                .map(|v| !emitted[v])
                .unwrap_or(false)
        };
        let start = names
            .iter()
            .find(|n| stuck(n))
            .expect("cycle exists");
        let mut path: Vec<&str> = vec![start];
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        seen.insert(start, 0);
        loop {
            let current = *path.last().unwrap();
            let next = self.nodes[current]
                .children
                .iter()
                .find(|c| stuck(c))
                .expect("stuck node has a stuck child")
                .as_str();
            if let Some(&at) = seen.get(next) {
                // path[at..] already runs parent to child, wrapping round.
                let mut cycle: Vec<String> =
                    path[at..].iter().map(|s| s.to_string()).collect();
                let rotate = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, name)| name.as_str())
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                cycle.rotate_left(rotate);
                return Classification::Cyclic { witness: cycle };
            }
            seen.insert(next, path.len());
            path.push(next);
        }
    }
}

/// A candidate morphism of term graphs: one map on inputs, one on
/// internal nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMorphism {
    pub on_inputs: BTreeMap<String, String>,
    pub on_internal: BTreeMap<String, String>,
}

impl GraphMorphism {
    pub fn identity(graph: &ConcreteTermGraph) -> Self {
        GraphMorphism {
            on_inputs: crate::family::identity_map(graph.inputs()),
            on_internal: graph
                .nodes()
                .keys()
                .map(|n| (n.clone(), n.clone()))
                .collect(),
        }
    }

    /// The combined map on inputs and internals.
    pub fn apply(&self, name: &str, src: &ConcreteTermGraph) -> Option<&str> {
        if src.is_input(name) {
            self.on_inputs.get(name).map(String::as_str)
        } else {
            self.on_internal.get(name).map(String::as_str)
        }
    }
}

/// One reported defect in a candidate morphism. Violations are data,
/// not errors: the report lists every instance that fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismViolation {
    Unmapped { name: String },
    NotIntoTarget { name: String, image: String },
    SortChanged { name: String, image: String },
    InputToInternal { name: String, image: String },
    InternalToInput { name: String, image: String },
    LabelMismatch { node: String, src_op: String, dst_op: String },
    ChildMismatch { node: String, index: usize, expected: String, found: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MorphismReport {
    pub violations: Vec<MorphismViolation>,
}

impl MorphismReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the two morphism conditions — labels preserved and children
/// carried onto children — for every internal node and child index.
pub fn check_morphism(
    src: &ConcreteTermGraph,
    dst: &ConcreteTermGraph,
    m: &GraphMorphism,
) -> MorphismReport {
    let mut report = MorphismReport::default();
    let mut push = |v: MorphismViolation| report.violations.push(v);

    for (name, sort) in src.inputs().iter() {
        match m.on_inputs.get(name) {
            None => push(MorphismViolation::Unmapped { name: name.into() }),
            Some(image) => {
                if !dst.is_input(image) {
                    if dst.node(image).is_some() {
                        push(MorphismViolation::InputToInternal {
                            name: name.into(),
                            image: image.clone(),
                        });
                    } else {
                        push(MorphismViolation::NotIntoTarget {
                            name: name.into(),
                            image: image.clone(),
                        });
                    }
                } else if dst.sort_of(image) != Some(sort) {
                    push(MorphismViolation::SortChanged {
                        name: name.into(),
                        image: image.clone(),
                    });
                }
            }
        }
    }
    for (name, def) in src.nodes() {
        let image = match m.on_internal.get(name) {
            None => {
                push(MorphismViolation::Unmapped { name: name.clone() });
                continue;
            }
            Some(image) => image,
        };
        let image_def = match dst.node(image) {
            None => {
                if dst.is_input(image) {
                    push(MorphismViolation::InternalToInput {
                        name: name.clone(),
                        image: image.clone(),
                    });
                } else {
                    push(MorphismViolation::NotIntoTarget {
                        name: name.clone(),
                        image: image.clone(),
                    });
                }
                continue;
            }
            Some(d) => d,
        };
        if image_def.op != def.op {
            push(MorphismViolation::LabelMismatch {
                node: name.clone(),
                src_op: def.op.name().to_string(),
                dst_op: image_def.op.name().to_string(),
            });
            continue;
        }
        for (i, child) in def.children.iter().enumerate() {
            let expected = match m.apply(child, src) {
                Some(e) => e,
                None => {
                    push(MorphismViolation::Unmapped {
                        name: child.clone(),
                    });
                    continue;
                }
            };
            let found = &image_def.children[i];
            if expected != found {
                push(MorphismViolation::ChildMismatch {
                    node: name.clone(),
                    index: i + 1,
                    expected: expected.to_string(),
                    found: found.clone(),
                });
            }
        }
    }
    report
}

/// Compose two candidate morphisms.
pub fn compose_morphisms(first: &GraphMorphism, second: &GraphMorphism) -> Option<GraphMorphism> {
    // Inputs may land on inputs only, internals on internals only, for
    // the composite to stay well-typed; check_morphism reports the rest.
    Some(GraphMorphism {
        on_inputs: crate::family::compose_maps(&first.on_inputs, &second.on_inputs)?,
        on_internal: crate::family::compose_maps(&first.on_internal, &second.on_internal)?,
    })
}
