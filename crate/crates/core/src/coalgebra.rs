//! Abstract term graphs as coalgebras, and the equivalence with the
//! concrete presentation.
//!
//! An [`AbstractTermGraph`] is an injective variable embedding
//! `f : A → B` together with a tree assignment `s : B → Pf` satisfying
//! three laws:
//!
//! - leaf: `s(f(a))` is the bare leaf `[a]`;
//! - counit: the root label of `s(b)` is `b` itself;
//! - comultiplication: relabelling `s(b)` with `s` equals recursive
//!   subtree copying of `s(b)` — a node labelled `c` carries exactly the
//!   tree `s(c)` above it.
//!
//! [`to_abstract`] and [`from_abstract`] translate between this and
//! [`ConcreteTermGraph`], inverse to each other up to the canonical
//! bijection between node names. [`CyclicCoalgebra`] is the one-step
//! presentation `s : B → A + F(B)` that also covers cyclic graphs;
//! [`unfold`] produces the depth-bounded prefix of its infinite
//! unfolding, with explicit cut markers so every value stays finite.

use crate::family::SortedSet;
use crate::graph::{Classification, ConcreteTermGraph, NodeDef};
use crate::signature::OpSym;
use crate::trees::{render_atom, Context, PTree, TreeError};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoalgebraError {
    #[error("input graph is cyclic (cycle through {})", .witness.join(" -> "))]
    CyclicInput { witness: Vec<String> },
    #[error("coalgebra laws violated: {0}")]
    LawViolation(String),
    #[error("assignment is not total: no tree for node {0:?}")]
    NotTotal(String),
    #[error("assignment mentions {0:?}, which is not a node")]
    UnknownNode(String),
    #[error("malformed tree at node {node:?}: {source}")]
    MalformedTree {
        node: String,
        #[source]
        source: TreeError,
    },
    #[error("{0}")]
    Tree(#[from] TreeError),
}

/// Outcome of checking one coalgebra law: pass, or the first failing
/// node with the offending subterm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawCheck {
    Passed,
    Failed { node: String, detail: String },
}

impl LawCheck {
    pub fn passed(&self) -> bool {
        matches!(self, LawCheck::Passed)
    }
}

impl fmt::Display for LawCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawCheck::Passed => write!(f, "ok"),
            LawCheck::Failed { node, detail } => write!(f, "FAIL at {node} ({detail})"),
        }
    }
}

/// Per-law result of validating a tree assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub leaf: LawCheck,
    pub counit: LawCheck,
    pub comult: LawCheck,
}

impl LawReport {
    pub fn passes(&self) -> bool {
        self.leaf.passed() && self.counit.passed() && self.comult.passed()
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "counit: {}, comultiplication: {}, leaf: {}",
            self.counit, self.comult, self.leaf
        )
    }
}

/// Check the three coalgebra laws for a tree assignment over a context.
/// Violations are reported, not raised; errors are reserved for
/// malformed data (missing or extra assignments, ill-sorted trees).
pub fn validate_atg(
    ctx: &Context,
    s: &BTreeMap<String, PTree>,
) -> Result<LawReport, CoalgebraError> {
    for (name, _) in ctx.nodes().iter() {
        if !s.contains_key(name) {
            return Err(CoalgebraError::NotTotal(name.to_string()));
        }
    }
    for name in s.keys() {
        if !ctx.nodes().contains(name) {
            return Err(CoalgebraError::UnknownNode(name.clone()));
        }
    }
    // Structural checks: leaves must be known variables, arities and
    // sorts must line up. Node labels are deliberately not required to
    // be known names here; the laws below surface those as violations.
    for (name, tree) in s {
        check_shape(ctx, tree).map_err(|source| CoalgebraError::MalformedTree {
            node: name.clone(),
            source,
        })?;
    }

    let leaf = 'leaf: {
        for (var, _) in ctx.vars().iter() {
            let node = ctx.embed_of(var).expect("context is total");
            let expected = PTree::leaf(var.to_string());
            if s[node] != expected {
                break 'leaf LawCheck::Failed {
                    node: node.to_string(),
                    detail: format!("s({node}) = {} but variable {var} embeds here", s[node]),
                };
            }
        }
        LawCheck::Passed
    };

    let counit = 'counit: {
        for (node, _) in ctx.nodes().iter() {
            let root = match &s[node] {
                PTree::Leaf(a) => match ctx.embed_of(a) {
                    Some(image) => image.to_string(),
                    None => {
                        break 'counit LawCheck::Failed {
                            node: node.to_string(),
                            detail: format!("leaf variable {a} is not in the variable set"),
                        }
                    }
                },
                PTree::Node { label, .. } => label.clone(),
            };
            if root != node {
                break 'counit LawCheck::Failed {
                    node: node.to_string(),
                    detail: format!("root label {root} ≠ {node}"),
                };
            }
        }
        LawCheck::Passed
    };

    let comult = 'comult: {
        for (node, _) in ctx.nodes().iter() {
            // Compare s applied to every label against the subtree there:
            // at each inner node labelled c the subtree must equal s(c).
            if let Some((at, detail)) = comult_defect(&s[node], s) {
                break 'comult LawCheck::Failed {
                    node: node.to_string(),
                    detail: format!("under {at}: {detail}"),
                };
            }
        }
        LawCheck::Passed
    };

    Ok(LawReport {
        leaf,
        counit,
        comult,
    })
}

/// Arity and sort checks. Unknown node labels are tolerated here — the
/// law checks surface those — but a known label must carry the sort of
/// its operation's output, and children must fit their slots.
fn check_shape(ctx: &Context, tree: &PTree) -> Result<String, TreeError> {
    match tree {
        PTree::Leaf(a) => ctx
            .vars()
            .sort_of(a)
            .map(str::to_string)
            .ok_or_else(|| TreeError::UnknownElement(a.clone())),
        PTree::Node {
            label,
            op,
            children,
        } => {
            if let Some(sort) = ctx.nodes().sort_of(label) {
                if sort != op.output() {
                    return Err(TreeError::SortMismatch {
                        place: format!("label {label}"),
                        expected: sort.to_string(),
                        found: op.output().to_string(),
                    });
                }
            }
            if children.len() != op.arity() {
                return Err(TreeError::ArityMismatch {
                    op: op.name().to_string(),
                    expected: op.arity(),
                    found: children.len(),
                });
            }
            for (i, (child, slot)) in children.iter().zip(op.inputs()).enumerate() {
                let found = check_shape(ctx, child)?;
                if &found != slot {
                    return Err(TreeError::SortMismatch {
                        place: format!("argument {} of {}_{}", i + 1, op.name(), label),
                        expected: slot.clone(),
                        found,
                    });
                }
            }
            Ok(op.output().to_string())
        }
    }
}

/// Find the first spot where the subtree under a label differs from the
/// assignment at that label.
fn comult_defect(tree: &PTree, s: &BTreeMap<String, PTree>) -> Option<(String, String)> {
    match tree {
        PTree::Leaf(_) => None,
        PTree::Node {
            label, children, ..
        } => {
            match s.get(label) {
                None => {
                    return Some((
                        label.clone(),
                        format!("label {label} is not a node, so s cannot be applied"),
                    ))
                }
                Some(assigned) if assigned != tree => {
                    return Some((
                        label.clone(),
                        format!("subtree {tree} ≠ s({label}) = {assigned}"),
                    ))
                }
                Some(_) => {}
            }
            children.iter().find_map(|c| comult_defect(c, s))
        }
    }
}

/// A validated abstract term graph: values of this type always satisfy
/// the three coalgebra laws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractTermGraph {
    ctx: Context,
    s: BTreeMap<String, PTree>,
}

impl AbstractTermGraph {
    pub fn new(ctx: Context, s: BTreeMap<String, PTree>) -> Result<Self, CoalgebraError> {
        let report = validate_atg(&ctx, &s)?;
        if !report.passes() {
            return Err(CoalgebraError::LawViolation(report.to_string()));
        }
        Ok(AbstractTermGraph { ctx, s })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn assignment(&self) -> &BTreeMap<String, PTree> {
        &self.s
    }

    pub fn tree(&self, node: &str) -> Option<&PTree> {
        self.s.get(node)
    }
}

/// Read an acyclic concrete term graph as an abstract one: variables
/// embed as themselves, and each node's tree is built over the trees of
/// its children in topological order.
pub fn to_abstract(graph: &ConcreteTermGraph) -> Result<AbstractTermGraph, CoalgebraError> {
    let order = match graph.classify() {
        Classification::Acyclic { order } => order,
        Classification::Cyclic { witness } => {
            return Err(CoalgebraError::CyclicInput { witness })
        }
    };
    let mut s: BTreeMap<String, PTree> = BTreeMap::new();
    for (var, _) in graph.inputs().iter() {
        s.insert(var.to_string(), PTree::leaf(var.to_string()));
    }
    for name in &order {
        let def = graph.node(name).expect("order lists nodes");
        let children = def
            .children
            .iter()
            .map(|c| s[c].clone())
            .collect::<Vec<_>>();
        s.insert(name.clone(), PTree::node(name.clone(), def.op.clone(), children));
    }
    let ctx = Context::inclusion(graph.inputs().clone(), graph.all_names())?;
    let atg = AbstractTermGraph::new(ctx, s)?;
    debug_assert!(validate_atg(atg.ctx(), atg.assignment())
        .map(|r| r.passes())
        .unwrap_or(false));
    Ok(atg)
}

/// Recover the concrete term graph from a valid abstract one, together
/// with the canonical bijection from the coalgebra's node names to the
/// graph's input-or-internal names.
pub fn from_abstract(
    atg: &AbstractTermGraph,
) -> (ConcreteTermGraph, BTreeMap<String, String>) {
    let ctx = atg.ctx();
    // b in the image of the embedding corresponds to its variable; every
    // other b stays itself as an internal node.
    let mut bijection: BTreeMap<String, String> = BTreeMap::new();
    for (var, _) in ctx.vars().iter() {
        bijection.insert(ctx.embed_of(var).unwrap().to_string(), var.to_string());
    }
    for node in ctx.internal_nodes() {
        bijection.insert(node.to_string(), node.to_string());
    }

    let mut nodes: BTreeMap<String, NodeDef> = BTreeMap::new();
    for node in ctx.internal_nodes() {
        match atg.tree(node).expect("assignment is total") {
            PTree::Leaf(_) => unreachable!("counit law holds for internal nodes"),
            PTree::Node { op, children, .. } => {
                let refs = children
                    .iter()
                    .map(|z| {
                        let root = z.root_label(|a| ctx.embed_of(a).unwrap().to_string());
                        bijection[&root].clone()
                    })
                    .collect();
                nodes.insert(
                    node.to_string(),
                    NodeDef {
                        op: op.clone(),
                        children: refs,
                    },
                );
            }
        }
    }
    let graph = rebuild_graph(ctx.vars().clone(), nodes);
    (graph, bijection)
}

/// Rebuild a graph from parts already known to be coherent (ops were
/// validated when the source value was built).
pub(crate) fn rebuild_graph(
    inputs: SortedSet,
    nodes: BTreeMap<String, NodeDef>,
) -> ConcreteTermGraph {
    let mut ops: BTreeMap<&str, &OpSym> = BTreeMap::new();
    let mut sorts: std::collections::BTreeSet<String> = inputs.iter().map(|(_, s)| s.to_string()).collect();
    for def in nodes.values() {
        ops.insert(def.op.name(), &def.op);
        sorts.extend(def.op.inputs().iter().cloned());
        sorts.insert(def.op.output().to_string());
    }
    let sig = crate::signature::Signature::new(
        sorts,
        ops.values()
            .map(|op| (op.name().to_string(), op.inputs().to_vec(), op.output().to_string())),
    )
    .expect("ops of a validated value form a signature");
    ConcreteTermGraph::new(&sig, inputs, nodes).expect("validated value reconstructs")
}

/// One reported defect in a candidate map of abstract term graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtgViolation {
    SquareBroken { var: String },
    Unmapped { name: String },
    NotIntoTarget { name: String, image: String },
    SortChanged { name: String, image: String },
    TreeMismatch { node: String, relabelled: String, expected: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtgMorphismReport {
    pub violations: Vec<AtgViolation>,
}

impl AtgMorphismReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that `(h, k)` is a map of abstract term graphs: a commuting
/// square over the two embeddings that carries the source assignment
/// onto the target one (`relabel(h,k)(s(b)) = s'(k(b))`).
pub fn check_atg_morphism(
    src: &AbstractTermGraph,
    dst: &AbstractTermGraph,
    h: &BTreeMap<String, String>,
    k: &BTreeMap<String, String>,
) -> AtgMorphismReport {
    let mut report = AtgMorphismReport::default();

    for (var, sort) in src.ctx().vars().iter() {
        match h.get(var) {
            None => report.violations.push(AtgViolation::Unmapped { name: var.into() }),
            Some(image) => match dst.ctx().vars().sort_of(image) {
                None => report.violations.push(AtgViolation::NotIntoTarget {
                    name: var.into(),
                    image: image.clone(),
                }),
                Some(found) if found != sort => {
                    report.violations.push(AtgViolation::SortChanged {
                        name: var.into(),
                        image: image.clone(),
                    })
                }
                Some(_) => {}
            },
        }
    }
    for (node, sort) in src.ctx().nodes().iter() {
        match k.get(node) {
            None => report.violations.push(AtgViolation::Unmapped { name: node.into() }),
            Some(image) => match dst.ctx().nodes().sort_of(image) {
                None => report.violations.push(AtgViolation::NotIntoTarget {
                    name: node.into(),
                    image: image.clone(),
                }),
                Some(found) if found != sort => {
                    report.violations.push(AtgViolation::SortChanged {
                        name: node.into(),
                        image: image.clone(),
                    })
                }
                Some(_) => {}
            },
        }
    }
    if !report.passes() {
        return report;
    }

    for (var, _) in src.ctx().vars().iter() {
        let lhs = k.get(src.ctx().embed_of(var).unwrap());
        let rhs = dst.ctx().embed_of(&h[var]);
        if lhs.map(String::as_str) != rhs {
            report
                .violations
                .push(AtgViolation::SquareBroken { var: var.into() });
        }
    }

    for (node, _) in src.ctx().nodes().iter() {
        let relabelled = match crate::trees::relabel(h, k, src.tree(node).unwrap()) {
            Ok(t) => t,
            Err(_) => {
                report.violations.push(AtgViolation::Unmapped { name: node.into() });
                continue;
            }
        };
        let expected = dst.tree(&k[node]).expect("target assignment total");
        if &relabelled != expected {
            report.violations.push(AtgViolation::TreeMismatch {
                node: node.into(),
                relabelled: relabelled.to_string(),
                expected: expected.to_string(),
            });
        }
    }
    report
}

/// One step of a cyclic coalgebra: a node is either a variable or an
/// operation applied to node names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Var(String),
    Op(OpSym, Vec<String>),
}

/// The one-step presentation `s : B → A + F(B)` of a possibly cyclic
/// term graph over the embedding `f : A → B`. Guardedness holds by
/// construction: exactly the embedded nodes step to variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicCoalgebra {
    ctx: Context,
    step: BTreeMap<String, Step>,
}

impl CyclicCoalgebra {
    pub fn new(ctx: Context, step: BTreeMap<String, Step>) -> Result<Self, CoalgebraError> {
        for (name, _) in ctx.nodes().iter() {
            if !step.contains_key(name) {
                return Err(CoalgebraError::NotTotal(name.to_string()));
            }
        }
        for name in step.keys() {
            if !ctx.nodes().contains(name) {
                return Err(CoalgebraError::UnknownNode(name.clone()));
            }
        }
        for (node, s) in &step {
            match s {
                Step::Var(a) => {
                    let embed = ctx.embed_of(a).ok_or_else(|| {
                        CoalgebraError::LawViolation(format!(
                            "step({node}) names unknown variable {a}"
                        ))
                    })?;
                    if embed != node {
                        return Err(CoalgebraError::LawViolation(format!(
                            "step({node}) = variable {a}, but {a} embeds at {embed}"
                        )));
                    }
                }
                Step::Op(op, children) => {
                    if ctx.var_for(node).is_some() {
                        return Err(CoalgebraError::LawViolation(format!(
                            "step({node}) must be the embedded variable"
                        )));
                    }
                    if children.len() != op.arity() {
                        return Err(CoalgebraError::MalformedTree {
                            node: node.clone(),
                            source: TreeError::ArityMismatch {
                                op: op.name().to_string(),
                                expected: op.arity(),
                                found: children.len(),
                            },
                        });
                    }
                    let node_sort = ctx.nodes().sort_of(node).unwrap();
                    if op.output() != node_sort {
                        return Err(CoalgebraError::MalformedTree {
                            node: node.clone(),
                            source: TreeError::SortMismatch {
                                place: format!("node {node}"),
                                expected: node_sort.to_string(),
                                found: op.output().to_string(),
                            },
                        });
                    }
                    for (i, child) in children.iter().enumerate() {
                        let sort = ctx.nodes().sort_of(child).ok_or_else(|| {
                            CoalgebraError::UnknownNode(child.clone())
                        })?;
                        if sort != op.inputs()[i] {
                            return Err(CoalgebraError::MalformedTree {
                                node: node.clone(),
                                source: TreeError::SortMismatch {
                                    place: format!("child {} of {node}", i + 1),
                                    expected: op.inputs()[i].clone(),
                                    found: sort.to_string(),
                                },
                            });
                        }
                    }
                }
            }
        }
        Ok(CyclicCoalgebra { ctx, step })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn steps(&self) -> &BTreeMap<String, Step> {
        &self.step
    }

    pub fn step(&self, node: &str) -> Option<&Step> {
        self.step.get(node)
    }

    /// Extract the concrete term graph this coalgebra transcribes,
    /// together with the canonical bijection from coalgebra node names
    /// to graph input-or-internal names.
    pub fn to_concrete(&self) -> (ConcreteTermGraph, BTreeMap<String, String>) {
        let ctx = &self.ctx;
        let mut bijection: BTreeMap<String, String> = BTreeMap::new();
        for (var, _) in ctx.vars().iter() {
            bijection.insert(ctx.embed_of(var).unwrap().to_string(), var.to_string());
        }
        for node in ctx.internal_nodes() {
            bijection.insert(node.to_string(), node.to_string());
        }
        let mut nodes = BTreeMap::new();
        for node in ctx.internal_nodes() {
            match &self.step[node] {
                Step::Var(_) => unreachable!("guardedness validated"),
                Step::Op(op, children) => {
                    nodes.insert(
                        node.to_string(),
                        NodeDef {
                            op: op.clone(),
                            children: children.iter().map(|c| bijection[c].clone()).collect(),
                        },
                    );
                }
            }
        }
        (rebuild_graph(ctx.vars().clone(), nodes), bijection)
    }
}

/// Transcribe a concrete term graph (acyclic or not) into its one-step
/// coalgebra: inputs step to their variables, internal nodes to their
/// operation and children.
pub fn to_cyclic(graph: &ConcreteTermGraph) -> CyclicCoalgebra {
    let mut step: BTreeMap<String, Step> = BTreeMap::new();
    for (var, _) in graph.inputs().iter() {
        step.insert(var.to_string(), Step::Var(var.to_string()));
    }
    for (name, def) in graph.nodes() {
        step.insert(name.clone(), Step::Op(def.op.clone(), def.children.clone()));
    }
    let ctx = Context::inclusion(graph.inputs().clone(), graph.all_names())
        .expect("graph names are disjoint");
    CyclicCoalgebra::new(ctx, step).expect("transcription satisfies the step laws")
}

/// Classify a cyclic coalgebra through its extracted concrete graph.
pub fn classify_coalgebra(c: &CyclicCoalgebra) -> Classification {
    let (graph, bijection) = c.to_concrete();
    match graph.classify() {
        Classification::Acyclic { order } => Classification::Acyclic {
            order: order
                .into_iter()
                .map(|n| reverse_lookup(&bijection, &n))
                .collect(),
        },
        Classification::Cyclic { witness } => Classification::Cyclic {
            witness: witness
                .into_iter()
                .map(|n| reverse_lookup(&bijection, &n))
                .collect(),
        },
    }
}

fn reverse_lookup(bijection: &BTreeMap<String, String>, image: &str) -> String {
    bijection
        .iter()
        .find(|(_, v)| v.as_str() == image)
        .map(|(k, _)| k.clone())
        .expect("bijection covers all names")
}

/// A depth-bounded prefix of the infinite unfolding of a cyclic
/// coalgebra. Cut markers stand for the nodes the bound truncated away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnfoldTree {
    Leaf(String),
    Cut(String),
    Node {
        label: String,
        op: OpSym,
        children: Vec<UnfoldTree>,
    },
}

impl UnfoldTree {
    /// Re-truncate to at most `depth` operation layers.
    pub fn truncate(&self, depth: usize) -> UnfoldTree {
        match self {
            UnfoldTree::Leaf(a) => UnfoldTree::Leaf(a.clone()),
            UnfoldTree::Cut(b) => UnfoldTree::Cut(b.clone()),
            UnfoldTree::Node { label, op, children } => {
                if depth == 0 {
                    UnfoldTree::Cut(label.clone())
                } else {
                    UnfoldTree::Node {
                        label: label.clone(),
                        op: op.clone(),
                        children: children.iter().map(|c| c.truncate(depth - 1)).collect(),
                    }
                }
            }
        }
    }

    /// The underlying tree, provided no cut marker remains.
    pub fn without_cuts(&self) -> Option<PTree> {
        match self {
            UnfoldTree::Leaf(a) => Some(PTree::leaf(a.clone())),
            UnfoldTree::Cut(_) => None,
            UnfoldTree::Node { label, op, children } => {
                let children = children
                    .iter()
                    .map(UnfoldTree::without_cuts)
                    .collect::<Option<Vec<_>>>()?;
                Some(PTree::node(label.clone(), op.clone(), children))
            }
        }
    }
}

impl fmt::Display for UnfoldTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnfoldTree::Leaf(a) => write!(f, "[{a}]"),
            UnfoldTree::Cut(b) => write!(f, "<cut {b}>"),
            UnfoldTree::Node { label, op, children } => {
                write!(f, "{}_{}(", render_atom(op.name()), render_atom(label))?;
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{child}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The depth-bounded prefix of the unfolding of `root`: variables stay
/// leaves, operation steps recurse with one less depth, and at depth 0
/// an operation becomes a cut marker.
pub fn unfold(c: &CyclicCoalgebra, root: &str, depth: usize) -> Result<UnfoldTree, CoalgebraError> {
    let step = c
        .step(root)
        .ok_or_else(|| CoalgebraError::UnknownNode(root.to_string()))?;
    Ok(match step {
        Step::Var(a) => UnfoldTree::Leaf(a.clone()),
        Step::Op(op, children) => {
            if depth == 0 {
                UnfoldTree::Cut(root.to_string())
            } else {
                UnfoldTree::Node {
                    label: root.to_string(),
                    op: op.clone(),
                    children: children
                        .iter()
                        .map(|child| unfold(c, child, depth - 1))
                        .collect::<Result<Vec<_>, _>>()?,
                }
            }
        }
    })
}
