//! Finite labelled trees: the initial algebra for `X ↦ A + B×F(X)`.
//!
//! A tree is either a bare leaf holding a variable from `A`, or a node
//! holding a label from `B`, an operation symbol, and one subtree per
//! argument. The structural maps live here:
//!
//! - [`relabel`] renames leaves and labels without touching the shape;
//! - [`counit_root`] extracts the label at the root (through the
//!   variable embedding on leaves);
//! - [`comult`] replaces every node label by the subtree rooted there —
//!   recursive copying of subtrees;
//! - [`flatten`] splices trees sitting at the leaves into one tree;
//! - [`depth`] is the termination measure for everything recursive.
//!
//! The leaf and node constructors are the two components of the initial
//! algebra structure; their copairing never needs a name of its own.

use crate::family::SortedSet;
use crate::signature::OpSym;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("sort mismatch at {place}: expected {expected}, found {found}")]
    SortMismatch {
        place: String,
        expected: String,
        found: String,
    },
    #[error("arity mismatch at {op:?}: expected {expected} children, found {found}")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("context: {0}")]
    Context(#[from] crate::family::FamilyError),
}

/// A finite tree with leaves labelled in `V` and nodes labelled in `L`.
/// The default instantiation labels both with element names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PTree<V = String, L = String> {
    Leaf(V),
    Node {
        label: L,
        op: OpSym,
        children: Vec<PTree<V, L>>,
    },
}

impl<V, L> PTree<V, L> {
    pub fn leaf(var: V) -> Self {
        PTree::Leaf(var)
    }

    pub fn node(label: L, op: OpSym, children: Vec<PTree<V, L>>) -> Self {
        PTree::Node {
            label,
            op,
            children,
        }
    }

    /// Rename leaves with `h` and node labels with `k`, preserving shape.
    pub fn relabel<V2, L2>(
        &self,
        h: &impl Fn(&V) -> V2,
        k: &impl Fn(&L) -> L2,
    ) -> PTree<V2, L2> {
        match self {
            PTree::Leaf(a) => PTree::Leaf(h(a)),
            PTree::Node {
                label,
                op,
                children,
            } => PTree::Node {
                label: k(label),
                op: op.clone(),
                children: children.iter().map(|c| c.relabel(h, k)).collect(),
            },
        }
    }

    /// The label at the root, through `f` on a bare leaf.
    pub fn root_label(&self, f: impl FnOnce(&V) -> L) -> L
    where
        L: Clone,
    {
        match self {
            PTree::Leaf(a) => f(a),
            PTree::Node { label, .. } => label.clone(),
        }
    }

    /// Replace every node label by the subtree rooted at that node.
    pub fn comult(&self) -> PTree<V, PTree<V, L>>
    where
        V: Clone,
        L: Clone,
    {
        match self {
            PTree::Leaf(a) => PTree::Leaf(a.clone()),
            PTree::Node { op, children, .. } => PTree::Node {
                label: self.clone(),
                op: op.clone(),
                children: children.iter().map(|c| c.comult()).collect(),
            },
        }
    }

    /// Leaves have depth 0; a node is one deeper than its deepest child,
    /// so constants have depth 1 (max over the empty list is 0).
    pub fn depth(&self) -> usize {
        match self {
            PTree::Leaf(_) => 0,
            PTree::Node { children, .. } => {
                1 + children.iter().map(PTree::depth).max().unwrap_or(0)
            }
        }
    }

    /// Iterate over this tree and all subtrees, parents first.
    pub fn subtrees(&self) -> Vec<&PTree<V, L>> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            if let PTree::Node { children, .. } = out[i] {
                out.extend(children.iter());
            }
            i += 1;
        }
        out
    }
}

impl<V: Clone, L: Clone> PTree<PTree<V, L>, L> {
    /// Splice the trees sitting at the leaves into a single tree.
    pub fn flatten(&self) -> PTree<V, L> {
        match self {
            PTree::Leaf(t) => t.clone(),
            PTree::Node {
                label,
                op,
                children,
            } => PTree::Node {
                label: label.clone(),
                op: op.clone(),
                children: children.iter().map(PTree::flatten).collect(),
            },
        }
    }
}

/// Quote an atom for the canonical text rendering when it contains
/// characters the reader would mis-split on.
pub fn render_atom(name: &str) -> String {
    let plain = !name.is_empty()
        && name.chars().all(|c| {
            !c.is_whitespace()
                && !matches!(
                    c,
                    '_' | '(' | ')' | '[' | ']' | '{' | '}' | ',' | ';' | ':' | '=' | '"' | '$'
                        | '<' | '>' | '#'
                )
        });
    if plain {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

impl fmt::Display for PTree<String, String> {
    /// Canonical rendering: leaves `[x]`, nodes `op_label(child,...)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PTree::Leaf(a) => write!(f, "[{a}]"),
            PTree::Node {
                label,
                op,
                children,
            } => {
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

/// The ambient object `f : A → B`: a set of variables, a set of node
/// names, and a sort-preserving injective embedding of the former into
/// the latter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    vars: SortedSet,
    nodes: SortedSet,
    embed: BTreeMap<String, String>,
}

impl Context {
    pub fn new(
        vars: SortedSet,
        nodes: SortedSet,
        embed: BTreeMap<String, String>,
    ) -> Result<Self, TreeError> {
        crate::family::check_function(&vars, &nodes, &embed)?;
        crate::family::check_injective(&embed)?;
        Ok(Context { vars, nodes, embed })
    }

    /// The common case where the variables are literally a subset of the
    /// nodes under the same names.
    pub fn inclusion(vars: SortedSet, nodes: SortedSet) -> Result<Self, TreeError> {
        let embed = crate::family::identity_map(&vars);
        Context::new(vars, nodes, embed)
    }

    pub fn vars(&self) -> &SortedSet {
        &self.vars
    }

    pub fn nodes(&self) -> &SortedSet {
        &self.nodes
    }

    pub fn embed(&self) -> &BTreeMap<String, String> {
        &self.embed
    }

    pub fn embed_of(&self, var: &str) -> Option<&str> {
        self.embed.get(var).map(String::as_str)
    }

    /// The variable mapped to `node`, if any.
    pub fn var_for(&self, node: &str) -> Option<&str> {
        self.embed
            .iter()
            .find(|(_, image)| image.as_str() == node)
            .map(|(var, _)| var.as_str())
    }

    /// Node names outside the image of the embedding, in order.
    pub fn internal_nodes(&self) -> Vec<&str> {
        let image: std::collections::BTreeSet<&str> =
            self.embed.values().map(String::as_str).collect();
        self.nodes
            .names()
            .filter(|n| !image.contains(n))
            .collect()
    }
}

/// Check that a tree is well formed over a context: leaves are known
/// variables, node labels are known node names of the operation's output
/// sort, and children agree with the operation's arity and input sorts.
pub fn well_formed(ctx: &Context, tree: &PTree) -> Result<(), TreeError> {
    tree_sort(ctx, tree).map(|_| ())
}

/// The sort of a well-formed tree (checking as it goes).
pub fn tree_sort(ctx: &Context, tree: &PTree) -> Result<String, TreeError> {
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
            let label_sort = ctx
                .nodes()
                .sort_of(label)
                .ok_or_else(|| TreeError::UnknownElement(label.clone()))?;
            if label_sort != op.output() {
                return Err(TreeError::SortMismatch {
                    place: format!("label {label}"),
                    expected: op.output().to_string(),
                    found: label_sort.to_string(),
                });
            }
            if children.len() != op.arity() {
                return Err(TreeError::ArityMismatch {
                    op: op.name().to_string(),
                    expected: op.arity(),
                    found: children.len(),
                });
            }
            for (i, (child, expected)) in children.iter().zip(op.inputs()).enumerate() {
                let found = tree_sort(ctx, child)?;
                if &found != expected {
                    return Err(TreeError::SortMismatch {
                        place: format!("argument {} of {}_{}", i + 1, op.name(), label),
                        expected: expected.clone(),
                        found,
                    });
                }
            }
            Ok(op.output().to_string())
        }
    }
}

/// Rename leaves with `h` and node labels with `k`. Both maps must cover
/// every name they are applied to.
pub fn relabel(
    h: &BTreeMap<String, String>,
    k: &BTreeMap<String, String>,
    tree: &PTree,
) -> Result<PTree, TreeError> {
    match tree {
        PTree::Leaf(a) => h
            .get(a)
            .map(|a2| PTree::Leaf(a2.clone()))
            .ok_or_else(|| TreeError::UnknownElement(a.clone())),
        PTree::Node {
            label,
            op,
            children,
        } => {
            let label = k
                .get(label)
                .ok_or_else(|| TreeError::UnknownElement(label.clone()))?;
            let children = children
                .iter()
                .map(|c| relabel(h, k, c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PTree::Node {
                label: label.clone(),
                op: op.clone(),
                children,
            })
        }
    }
}

/// The root label of a tree: the embedded variable on a bare leaf, the
/// node label otherwise.
pub fn counit_root(ctx: &Context, tree: &PTree) -> Result<String, TreeError> {
    match tree {
        PTree::Leaf(a) => ctx
            .embed_of(a)
            .map(str::to_string)
            .ok_or_else(|| TreeError::UnknownElement(a.clone())),
        PTree::Node { label, .. } => Ok(label.clone()),
    }
}

/// Recursive copying of subtrees: every node label becomes the subtree
/// rooted at that node.
pub fn comult(ctx: &Context, tree: &PTree) -> Result<PTree<String, PTree>, TreeError> {
    well_formed(ctx, tree)?;
    Ok(tree.comult())
}

/// Splice trees sitting at the leaves into one tree, checking that each
/// spliced tree has the sort the surrounding slot expects.
pub fn flatten(ctx: &Context, tree: &PTree<PTree, String>) -> Result<PTree, TreeError> {
    fn check(ctx: &Context, tree: &PTree<PTree, String>, expected: Option<&str>) -> Result<(), TreeError> {
        match tree {
            PTree::Leaf(t) => {
                let found = tree_sort(ctx, t)?;
                if let Some(expected) = expected {
                    if found != expected {
                        return Err(TreeError::SortMismatch {
                            place: format!("spliced subtree {t}"),
                            expected: expected.to_string(),
                            found,
                        });
                    }
                }
                Ok(())
            }
            PTree::Node { op, children, .. } => {
                if children.len() != op.arity() {
                    return Err(TreeError::ArityMismatch {
                        op: op.name().to_string(),
                        expected: op.arity(),
                        found: children.len(),
                    });
                }
                for (child, slot) in children.iter().zip(op.inputs()) {
                    check(ctx, child, Some(slot))?;
                }
                Ok(())
            }
        }
    }
    check(ctx, tree, None)?;
    Ok(tree.flatten())
}

/// Depth of a tree; see [`PTree::depth`].
pub fn depth(tree: &PTree) -> usize {
    tree.depth()
}
