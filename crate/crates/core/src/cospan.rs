//! Term graphs from `A` to `B`: cospans with coalgebra structure.
//!
//! A [`Cospan`] is a term graph body (acyclic or cyclic) whose variables
//! form the source boundary, together with a map sending each target
//! boundary element to a carrier node. Composition glues the first
//! cospan's output leg to the second's variable embedding by pushout,
//! transports the second body across the pushout, and then composes the
//! two coalgebras; the result is canonically renamed `n0, n1, …` so that
//! equal composites usually agree name-for-name. [`equiv`] decides
//! equality up to a carrier isomorphism commuting with both legs, which
//! is the semantic notion composition is associative and unital for.
//! [`compose_concrete`] is the direct node-level construction, kept as
//! an independent route for cross-checking the pushout path.

use crate::coalgebra::{
    from_abstract, to_abstract, to_cyclic, AbstractTermGraph, CoalgebraError, CyclicCoalgebra,
    Step,
};
use crate::family::{self, SortedSet};
use crate::graph::{Classification, ConcreteTermGraph, NodeDef};
use crate::semantics::{lift, solve_cyclic, Algebra, Environment, SolveError};
use crate::trees::{Context, PTree, TreeError};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CospanError {
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("not a pushout: {0}")]
    NotAPushout(String),
    #[error("{0}")]
    Family(#[from] family::FamilyError),
    #[error("{0}")]
    Tree(#[from] TreeError),
    #[error("{0}")]
    Coalgebra(#[from] CoalgebraError),
}

/// The coalgebra structure carried by a cospan's left leg.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CospanBody {
    Acyclic(AbstractTermGraph),
    Cyclic(CyclicCoalgebra),
}

impl CospanBody {
    pub fn ctx(&self) -> &Context {
        match self {
            CospanBody::Acyclic(atg) => atg.ctx(),
            CospanBody::Cyclic(c) => c.ctx(),
        }
    }

    pub fn is_cyclic_variant(&self) -> bool {
        matches!(self, CospanBody::Cyclic(_))
    }

    /// The one-step view of the body, shared by both variants.
    pub fn steps(&self) -> CyclicCoalgebra {
        match self {
            CospanBody::Acyclic(atg) => atg_to_step(atg),
            CospanBody::Cyclic(c) => c.clone(),
        }
    }
}

/// One-layer reading of a tree assignment: each node steps to its
/// variable or to its operation applied to the root labels of its
/// children's trees.
fn atg_to_step(atg: &AbstractTermGraph) -> CyclicCoalgebra {
    let ctx = atg.ctx();
    let mut step = BTreeMap::new();
    for (node, _) in ctx.nodes().iter() {
        let entry = match atg.tree(node).expect("assignment total") {
            PTree::Leaf(a) => Step::Var(a.clone()),
            PTree::Node { op, children, .. } => {
                let kids = children
                    .iter()
                    .map(|z| z.root_label(|a| ctx.embed_of(a).unwrap().to_string()))
                    .collect();
                Step::Op(op.clone(), kids)
            }
        };
        step.insert(node.to_string(), entry);
    }
    CyclicCoalgebra::new(ctx.clone(), step).expect("valid assignment gives valid steps")
}

/// A term graph from `source` to `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cospan {
    source: SortedSet,
    target: SortedSet,
    body: CospanBody,
    out: BTreeMap<String, String>,
}

impl Cospan {
    pub fn new(
        source: SortedSet,
        target: SortedSet,
        body: CospanBody,
        out: BTreeMap<String, String>,
    ) -> Result<Self, CospanError> {
        if !body.ctx().vars().same_as(&source) {
            return Err(CospanError::BoundaryMismatch(
                "body variables differ from the source boundary".into(),
            ));
        }
        family::check_function(&target, body.ctx().nodes(), &out)?;
        Ok(Cospan {
            source,
            target,
            body,
            out,
        })
    }

    pub fn source(&self) -> &SortedSet {
        &self.source
    }

    pub fn target(&self) -> &SortedSet {
        &self.target
    }

    pub fn body(&self) -> &CospanBody {
        &self.body
    }

    pub fn carrier(&self) -> &SortedSet {
        self.body.ctx().nodes()
    }

    pub fn out(&self) -> &BTreeMap<String, String> {
        &self.out
    }
}

/// The identity cospan on `a`: both legs the identity, each variable's
/// tree its own bare leaf — the only possible coalgebra structure.
pub fn identity(a: &SortedSet) -> Cospan {
    let ctx = Context::inclusion(a.clone(), a.clone()).expect("identity embedding");
    let s = a
        .names()
        .map(|n| (n.to_string(), PTree::leaf(n.to_string())))
        .collect();
    let atg = AbstractTermGraph::new(ctx, s).expect("leaves satisfy the laws");
    Cospan::new(
        a.clone(),
        a.clone(),
        CospanBody::Acyclic(atg),
        family::identity_map(a),
    )
    .expect("identity cospan is well formed")
}

/// Embed a function `f : A → B` contravariantly as the cospan
/// `B → B ← A` whose left leg is the identity with its unique coalgebra.
pub fn embed(
    a: &SortedSet,
    b: &SortedSet,
    f: &BTreeMap<String, String>,
) -> Result<Cospan, CospanError> {
    family::check_function(a, b, f)?;
    let mut cospan = identity(b);
    cospan.target = a.clone();
    cospan.out = f.clone();
    Ok(cospan)
}

/// Result of gluing two sorted sets along a common boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutResult {
    pub carrier: SortedSet,
    pub from_left: BTreeMap<String, String>,
    pub from_right: BTreeMap<String, String>,
}

/// Pushout of `g1 : B → X` and `g2 : B → Y` in finite sorted sets:
/// the disjoint union of `X` and `Y` quotiented by `g1(b) ~ g2(b)`.
/// Classes are named by their lexicographically least member, suffixed
/// on collision.
pub fn pushout(
    boundary: &SortedSet,
    x: &SortedSet,
    y: &SortedSet,
    g1: &BTreeMap<String, String>,
    g2: &BTreeMap<String, String>,
) -> Result<PushoutResult, CospanError> {
    family::check_function(boundary, x, g1)?;
    family::check_function(boundary, y, g2)?;

    let left: Vec<(&str, &str)> = x.iter().collect();
    let right: Vec<(&str, &str)> = y.iter().collect();
    let index_left: BTreeMap<&str, usize> =
        left.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
    let index_right: BTreeMap<&str, usize> = right
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (*n, i + left.len()))
        .collect();

    let mut uf = UnionFind::new(left.len() + right.len());
    for (b, _) in boundary.iter() {
        uf.unite(index_left[g1[b].as_str()], index_right[g2[b].as_str()]);
    }

    // Gather classes, keyed by representative.
    let total = left.len() + right.len();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..total {
        members.entry(uf.find(i)).or_default().push(i);
    }
    let name_of = |i: usize| -> &str {
        if i < left.len() {
            left[i].0
        } else {
            right[i - left.len()].0
        }
    };
    let sort_of = |i: usize| -> &str {
        if i < left.len() {
            left[i].1
        } else {
            right[i - left.len()].1
        }
    };

    // Deterministic class order: by least member name, left side first.
    let mut classes: Vec<Vec<usize>> = members.into_values().collect();
    for class in &mut classes {
        class.sort_by_key(|&i| (name_of(i).to_string(), i >= left.len()));
    }
    classes.sort_by_key(|class| (name_of(class[0]).to_string(), class[0] >= left.len()));

    let mut carrier = SortedSet::new();
    let mut assigned: BTreeMap<usize, String> = BTreeMap::new();
    for class in &classes {
        let sort = sort_of(class[0]).to_string();
        debug_assert!(class.iter().all(|&i| sort_of(i) == sort));
        let name = family::fresh_name(name_of(class[0]), &|n| carrier.contains(n));
        carrier.insert(name.clone(), sort)?;
        for &i in class {
            assigned.insert(i, name.clone());
        }
    }
    let mut from_left = BTreeMap::new();
    for (i, (n, _)) in left.iter().enumerate() {
        from_left.insert(n.to_string(), assigned[&uf.find(i)].clone());
    }
    let mut from_right = BTreeMap::new();
    for (i, (n, _)) in right.iter().enumerate() {
        from_right.insert(n.to_string(), assigned[&uf.find(i + left.len())].clone());
    }
    Ok(PushoutResult {
        carrier,
        from_left,
        from_right,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn unite(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index wins, keeping representatives stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Verify that `(h, k)` together with `target` completes the span
/// `(f, h)` to a pushout square, where `f` is the coalgebra's embedding.
fn check_pushout_square(
    atg_vars: &SortedSet,
    atg_nodes: &SortedSet,
    f: &BTreeMap<String, String>,
    h: &BTreeMap<String, String>,
    h_cod: &SortedSet,
    target: &Context,
    k: &BTreeMap<String, String>,
) -> Result<(), CospanError> {
    family::check_function(atg_vars, h_cod, h)?;
    family::check_function(atg_nodes, target.nodes(), k)?;
    for (a, _) in atg_vars.iter() {
        let via_k = &k[&f[a]];
        let via_g = target.embed_of(&h[a]).ok_or_else(|| {
            CospanError::NotAPushout(format!("{} is not in the target's variable set", h[a]))
        })?;
        if via_k != via_g {
            return Err(CospanError::NotAPushout(format!(
                "square does not commute at variable {a}"
            )));
        }
    }
    let canonical = pushout(atg_vars, atg_nodes, h_cod, f, h)?;
    // The square is a pushout exactly when the induced comparison map
    // from the canonical pushout is a sort-preserving bijection.
    let mut image: BTreeMap<&str, &str> = BTreeMap::new();
    for (b, z) in &canonical.from_left {
        let d = &k[b];
        if let Some(prev) = image.insert(z, d) {
            if prev != d {
                return Err(CospanError::NotAPushout(format!(
                    "comparison map is ill-defined at {z}"
                )));
            }
        }
    }
    for (c, z) in &canonical.from_right {
        let d = target.embed_of(c).unwrap();
        if let Some(prev) = image.insert(z, d) {
            if prev != d {
                return Err(CospanError::NotAPushout(format!(
                    "comparison map is ill-defined at {z}"
                )));
            }
        }
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for (z, d) in &image {
        if !seen.insert(d) {
            return Err(CospanError::NotAPushout(format!(
                "comparison map is not injective at {d}"
            )));
        }
        let z_sort = canonical.carrier.sort_of(z).unwrap();
        let d_sort = target.nodes().sort_of(d).ok_or_else(|| {
            CospanError::NotAPushout(format!("{d} is not in the target's node set"))
        })?;
        if z_sort != d_sort {
            return Err(CospanError::NotAPushout(format!(
                "comparison map changes the sort of {d}"
            )));
        }
    }
    if seen.len() != target.nodes().len() {
        return Err(CospanError::NotAPushout(
            "comparison map is not surjective".into(),
        ));
    }
    Ok(())
}

/// Transport a coalgebra across a pushout square: given `s` on
/// `f : A → B` and a pushout square `(h : A → C, k : B → D)` over the
/// opposite leg `g : C → D`, produce the unique coalgebra `t` on `g`
/// with `t(g(c)) = [c]` and `t(k(b)) = relabel(h,k)(s(b))`.
pub fn pushout_coalgebra(
    atg: &AbstractTermGraph,
    h: &BTreeMap<String, String>,
    h_cod: &SortedSet,
    target: &Context,
    k: &BTreeMap<String, String>,
) -> Result<AbstractTermGraph, CospanError> {
    check_pushout_square(
        atg.ctx().vars(),
        atg.ctx().nodes(),
        atg.ctx().embed(),
        h,
        h_cod,
        target,
        k,
    )?;
    let mut t: BTreeMap<String, PTree> = BTreeMap::new();
    for (c, _) in target.vars().iter() {
        t.insert(
            target.embed_of(c).unwrap().to_string(),
            PTree::leaf(c.to_string()),
        );
    }
    for (b, _) in atg.ctx().nodes().iter() {
        let d = k[b].clone();
        if t.contains_key(&d) {
            continue;
        }
        let relabelled = crate::trees::relabel(h, k, atg.tree(b).unwrap())?;
        t.insert(d, relabelled);
    }
    Ok(AbstractTermGraph::new(target.clone(), t)?)
}

/// Compose two coalgebras along a shared middle object: substitute the
/// lower assignment's trees for the leaves of the upper one and splice.
pub fn compose_coalgebra(
    lower: &AbstractTermGraph,
    upper: &AbstractTermGraph,
) -> Result<AbstractTermGraph, CospanError> {
    if !lower.ctx().nodes().same_as(upper.ctx().vars()) {
        return Err(CospanError::BoundaryMismatch(
            "lower node set differs from upper variable set".into(),
        ));
    }
    let g = upper.ctx().embed();
    let embed = family::compose_maps(lower.ctx().embed(), g)
        .expect("upper embedding total on lower nodes");
    let ctx = Context::new(
        lower.ctx().vars().clone(),
        upper.ctx().nodes().clone(),
        embed,
    )?;
    // ξ(b): the lower tree at b with labels pushed along the upper embedding.
    let xi = |b: &String| -> PTree {
        lower
            .tree(b)
            .expect("lower assignment total")
            .relabel(&|a: &String| a.clone(), &|l: &String| g[l].clone())
    };
    let mut s = BTreeMap::new();
    for (c, _) in upper.ctx().nodes().iter() {
        let widened: PTree<PTree, String> = upper
            .tree(c)
            .unwrap()
            .relabel(&|b: &String| xi(b), &|l: &String| l.clone());
        s.insert(c.to_string(), widened.flatten());
    }
    Ok(AbstractTermGraph::new(ctx, s)?)
}

/// Step-level analogue of [`pushout_coalgebra`] for cyclic bodies: the
/// transported step map reads off the pushout structure directly.
fn pushout_step(
    body: &CyclicCoalgebra,
    h: &BTreeMap<String, String>,
    target: &Context,
    k: &BTreeMap<String, String>,
) -> Result<CyclicCoalgebra, CospanError> {
    let mut step = BTreeMap::new();
    for (c, _) in target.vars().iter() {
        step.insert(
            target.embed_of(c).unwrap().to_string(),
            Step::Var(c.to_string()),
        );
    }
    for (b, _) in body.ctx().nodes().iter() {
        let d = k[b].clone();
        if step.contains_key(&d) {
            continue;
        }
        let entry = match body.step(b).unwrap() {
            Step::Var(a) => {
                // b = f(a), so d = k(f(a)) = g(h(a)) and the first loop
                // already covered it; keep the same shape for safety.
                Step::Var(h[a].clone())
            }
            Step::Op(op, kids) => {
                Step::Op(op.clone(), kids.iter().map(|x| k[x].clone()).collect())
            }
        };
        step.insert(d, entry);
    }
    Ok(CyclicCoalgebra::new(target.clone(), step)?)
}

/// Step-level composition: one substitution step, no splicing needed.
fn compose_step(
    lower: &CyclicCoalgebra,
    upper: &CyclicCoalgebra,
) -> Result<CyclicCoalgebra, CospanError> {
    if !lower.ctx().nodes().same_as(upper.ctx().vars()) {
        return Err(CospanError::BoundaryMismatch(
            "lower node set differs from upper variable set".into(),
        ));
    }
    let p = upper.ctx().embed();
    let embed = family::compose_maps(lower.ctx().embed(), p)
        .expect("upper embedding total on lower nodes");
    let ctx = Context::new(
        lower.ctx().vars().clone(),
        upper.ctx().nodes().clone(),
        embed,
    )?;
    let mut step = BTreeMap::new();
    for (z, _) in upper.ctx().nodes().iter() {
        let entry = match upper.step(z).unwrap() {
            Step::Op(op, kids) => Step::Op(op.clone(), kids.clone()),
            Step::Var(x) => match lower.step(x).unwrap() {
                Step::Var(a) => Step::Var(a.clone()),
                Step::Op(op, kids) => {
                    Step::Op(op.clone(), kids.iter().map(|b| p[b].clone()).collect())
                }
            },
        };
        step.insert(z.to_string(), entry);
    }
    Ok(CyclicCoalgebra::new(ctx, step)?)
}

/// Compose two cospans by pushout. Both bodies acyclic gives an acyclic
/// body (asserted, not assumed); otherwise the composite is built at the
/// step level and may be cyclic. The carrier is canonically renamed.
pub fn compose(c1: &Cospan, c2: &Cospan) -> Result<Cospan, CospanError> {
    if !c1.target().same_as(c2.source()) {
        return Err(CospanError::BoundaryMismatch(
            "target of the first cospan differs from source of the second".into(),
        ));
    }
    let boundary = c1.target();
    let x = c1.carrier();
    let y = c2.carrier();
    let po = pushout(boundary, x, y, c1.out(), c2.body().ctx().embed())?;

    // Context for the pushout leg p : X → Z.
    let p_ctx = Context::new(x.clone(), po.carrier.clone(), po.from_left.clone())?;

    let (body, out) = match (c1.body(), c2.body()) {
        (CospanBody::Acyclic(lower), CospanBody::Acyclic(upper)) => {
            let transported = pushout_coalgebra(upper, c1.out(), x, &p_ctx, &po.from_right)?;
            let composed = compose_coalgebra(lower, &transported)?;
            let out = compose_out(c2.out(), &po.from_right);
            let (graph, _) = from_abstract(&composed);
            assert!(
                graph.classify().is_acyclic(),
                "composite of acyclic cospans is acyclic"
            );
            (CospanBody::Acyclic(composed), out)
        }
        _ => {
            let lower = c1.body().steps();
            let upper = c2.body().steps();
            let transported = pushout_step(&upper, c1.out(), &p_ctx, &po.from_right)?;
            let composed = compose_step(&lower, &transported)?;
            let out = compose_out(c2.out(), &po.from_right);
            (CospanBody::Cyclic(composed), out)
        }
    };
    let renamed = canonical_rename(Cospan::new(
        c1.source().clone(),
        c2.target().clone(),
        body,
        out,
    )?);
    Ok(renamed)
}

fn compose_out(
    out: &BTreeMap<String, String>,
    along: &BTreeMap<String, String>,
) -> BTreeMap<String, String> {
    out.iter()
        .map(|(b, n)| (b.clone(), along[n].clone()))
        .collect()
}

/// Rename the carrier to `n0, n1, …`: embedded variables first in
/// variable order, then internal nodes in topological order when the
/// body is acyclic, in name order otherwise.
fn canonical_rename(cospan: Cospan) -> Cospan {
    let ctx = cospan.body.ctx();
    let mut order: Vec<String> = cospan
        .source
        .names()
        .map(|a| ctx.embed_of(a).unwrap().to_string())
        .collect();
    match &cospan.body {
        CospanBody::Acyclic(atg) => {
            let (graph, bijection) = from_abstract(atg);
            // Graph names back to carrier names, in topological order.
            let reverse: BTreeMap<&String, &String> =
                bijection.iter().map(|(b, g)| (g, b)).collect();
            if let Classification::Acyclic { order: topo } = graph.classify() {
                order.extend(topo.iter().map(|n| reverse[n].clone()));
            }
        }
        CospanBody::Cyclic(c) => {
            order.extend(c.ctx().internal_nodes().iter().map(|s| s.to_string()));
        }
    }
    let rename: BTreeMap<String, String> = order
        .iter()
        .enumerate()
        .map(|(i, old)| (old.clone(), format!("n{i}")))
        .collect();
    debug_assert_eq!(rename.len(), ctx.nodes().len());

    let mut nodes = SortedSet::new();
    for (old, sort) in ctx.nodes().iter() {
        nodes
            .insert(rename[old].clone(), sort.to_string())
            .expect("renaming is a bijection");
    }
    let embed = ctx
        .embed()
        .iter()
        .map(|(a, b)| (a.clone(), rename[b].clone()))
        .collect();
    let new_ctx = Context::new(ctx.vars().clone(), nodes, embed).expect("renamed context");
    let body = match &cospan.body {
        CospanBody::Acyclic(atg) => {
            let s = atg
                .assignment()
                .iter()
                .map(|(b, t)| {
                    let renamed =
                        t.relabel(&|a: &String| a.clone(), &|l: &String| rename[l].clone());
                    (rename[b].clone(), renamed)
                })
                .collect();
            CospanBody::Acyclic(
                AbstractTermGraph::new(new_ctx, s).expect("renaming preserves the laws"),
            )
        }
        CospanBody::Cyclic(c) => {
            let step = c
                .steps()
                .iter()
                .map(|(b, st)| {
                    let st = match st {
                        Step::Var(a) => Step::Var(a.clone()),
                        Step::Op(op, kids) => Step::Op(
                            op.clone(),
                            kids.iter().map(|ki| rename[ki].clone()).collect(),
                        ),
                    };
                    (rename[b].clone(), st)
                })
                .collect();
            CospanBody::Cyclic(
                CyclicCoalgebra::new(new_ctx, step).expect("renaming preserves the laws"),
            )
        }
    };
    let out = cospan
        .out
        .iter()
        .map(|(b, n)| (b.clone(), rename[n].clone()))
        .collect();
    Cospan::new(cospan.source, cospan.target, body, out).expect("renamed cospan is well formed")
}

/// The direct node-level composition: keep both internal node sets,
/// redirect the second graph's references through the first's output
/// leg, and route the composite outputs the same way. Kept independent
/// of the pushout path so the two can be compared.
pub fn compose_concrete(c1: &Cospan, c2: &Cospan) -> Result<Cospan, CospanError> {
    if !c1.target().same_as(c2.source()) {
        return Err(CospanError::BoundaryMismatch(
            "target of the first cospan differs from source of the second".into(),
        ));
    }
    let (g1, bij1) = extract_body(c1);
    let (g2, bij2) = extract_body(c2);
    // Output legs in graph-name coordinates.
    let out1: BTreeMap<String, String> = c1
        .out()
        .iter()
        .map(|(b, n)| (b.clone(), bij1[n].clone()))
        .collect();
    let out2: BTreeMap<String, String> = c2
        .out()
        .iter()
        .map(|(caudal, n)| (caudal.clone(), bij2[n].clone()))
        .collect();

    // The second graph's internal nodes, renamed away from clashes with
    // the composite's inputs and the first graph's internal nodes.
    let mut rename2: BTreeMap<String, String> = BTreeMap::new();
    {
        let mut taken: BTreeSet<String> = g1.inputs().names().map(str::to_string).collect();
        taken.extend(g1.nodes().keys().cloned());
        for name in g2.nodes().keys() {
            let fresh = family::fresh_name(name, &|n| taken.contains(n));
            taken.insert(fresh.clone());
            rename2.insert(name.clone(), fresh);
        }
    }
    // A reference of the second graph lands either on its own internal
    // node or on a boundary input, which the first output leg resolves.
    let resolve2 = |name: &str| -> String {
        if g2.nodes().contains_key(name) {
            rename2[name].clone()
        } else {
            out1[name].clone()
        }
    };

    let mut nodes: BTreeMap<String, NodeDef> = g1.nodes().clone();
    for (name, def) in g2.nodes() {
        nodes.insert(
            rename2[name].clone(),
            NodeDef {
                op: def.op.clone(),
                children: def.children.iter().map(|c| resolve2(c)).collect(),
            },
        );
    }
    let graph = crate::coalgebra::rebuild_graph(g1.inputs().clone(), nodes);
    let out: BTreeMap<String, String> = out2
        .iter()
        .map(|(c, n)| (c.clone(), resolve2(n)))
        .collect();

    let body = match graph.classify() {
        Classification::Acyclic { .. } => CospanBody::Acyclic(to_abstract(&graph)?),
        Classification::Cyclic { .. } => CospanBody::Cyclic(to_cyclic(&graph)),
    };
    Cospan::new(c1.source().clone(), c2.target().clone(), body, out)
}

/// The body's concrete graph plus the carrier-to-graph name bijection.
fn extract_body(c: &Cospan) -> (ConcreteTermGraph, BTreeMap<String, String>) {
    match c.body() {
        CospanBody::Acyclic(atg) => from_abstract(atg),
        CospanBody::Cyclic(cc) => cc.to_concrete(),
    }
}

/// Tensor (disjoint union) of two cospans. Clashing names on the right
/// operand are renamed apart, separately in each of the three name
/// spaces.
pub fn tensor(c1: &Cospan, c2: &Cospan) -> Cospan {
    let rename_apart = |left: &SortedSet, right: &SortedSet| -> BTreeMap<String, String> {
        let mut taken: BTreeSet<String> = left.names().map(str::to_string).collect();
        let mut map = BTreeMap::new();
        for (name, _) in right.iter() {
            let fresh = family::fresh_name(name, &|n| taken.contains(n));
            taken.insert(fresh.clone());
            map.insert(name.to_string(), fresh);
        }
        map
    };
    let var_rename = rename_apart(c1.source(), c2.source());
    let tgt_rename = rename_apart(c1.target(), c2.target());
    let node_rename = rename_apart(c1.carrier(), c2.carrier());

    let mut source = c1.source().clone();
    for (name, sort) in c2.source().iter() {
        source
            .insert(var_rename[name].clone(), sort.to_string())
            .expect("renamed apart");
    }
    let mut target = c1.target().clone();
    for (name, sort) in c2.target().iter() {
        target
            .insert(tgt_rename[name].clone(), sort.to_string())
            .expect("renamed apart");
    }
    let mut nodes = c1.carrier().clone();
    for (name, sort) in c2.carrier().iter() {
        nodes
            .insert(node_rename[name].clone(), sort.to_string())
            .expect("renamed apart");
    }
    let mut embed = c1.body().ctx().embed().clone();
    for (a, b) in c2.body().ctx().embed() {
        embed.insert(var_rename[a].clone(), node_rename[b].clone());
    }
    let ctx = Context::new(source.clone(), nodes, embed).expect("disjoint union context");

    let body = match (c1.body(), c2.body()) {
        (CospanBody::Acyclic(a1), CospanBody::Acyclic(a2)) => {
            let mut s = a1.assignment().clone();
            for (b, t) in a2.assignment() {
                let renamed = t.relabel(&|a: &String| var_rename[a].clone(), &|l: &String| {
                    node_rename[l].clone()
                });
                s.insert(node_rename[b].clone(), renamed);
            }
            CospanBody::Acyclic(
                AbstractTermGraph::new(ctx, s).expect("coproduct of coalgebras is a coalgebra"),
            )
        }
        (b1, b2) => {
            let s1 = b1.steps();
            let s2 = b2.steps();
            let mut step = s1.steps().clone();
            for (b, st) in s2.steps() {
                let st = match st {
                    Step::Var(a) => Step::Var(var_rename[a].clone()),
                    Step::Op(op, kids) => Step::Op(
                        op.clone(),
                        kids.iter().map(|ki| node_rename[ki].clone()).collect(),
                    ),
                };
                step.insert(node_rename[b].clone(), st);
            }
            CospanBody::Cyclic(
                CyclicCoalgebra::new(ctx, step).expect("coproduct of coalgebras is a coalgebra"),
            )
        }
    };
    let mut out = c1.out().clone();
    for (b, n) in c2.out() {
        out.insert(tgt_rename[b].clone(), node_rename[n].clone());
    }
    Cospan::new(source, target, body, out).expect("tensor is well formed")
}

/// Search for an isomorphism of carriers commuting with both legs and
/// carrying one body onto the other. Returns the witness if one exists.
/// Backtracking over label-compatible candidates; fine at desk scale.
pub fn equiv(c1: &Cospan, c2: &Cospan) -> Option<BTreeMap<String, String>> {
    if !c1.source().same_as(c2.source()) || !c1.target().same_as(c2.target()) {
        return None;
    }
    if c1.carrier().len() != c2.carrier().len() {
        return None;
    }
    let steps1 = c1.body().steps();
    let steps2 = c2.body().steps();

    // Both legs pin part of the isomorphism.
    let mut pinned: BTreeMap<String, String> = BTreeMap::new();
    for (a, _) in c1.source().iter() {
        let from = steps1.ctx().embed_of(a).unwrap();
        let to = steps2.ctx().embed_of(a).unwrap();
        if let Some(prev) = pinned.insert(from.to_string(), to.to_string()) {
            if prev != to {
                return None;
            }
        }
    }
    for (b, _) in c1.target().iter() {
        let from = c1.out()[b].clone();
        let to = c2.out()[b].clone();
        if let Some(prev) = pinned.insert(from, to.clone()) {
            if prev != to {
                return None;
            }
        }
    }
    let mut used: BTreeSet<String> = pinned.values().cloned().collect();
    if used.len() != pinned.len() {
        return None; // pins collapse two nodes
    }
    let free: Vec<String> = c1
        .carrier()
        .names()
        .filter(|n| !pinned.contains_key(*n))
        .map(str::to_string)
        .collect();

    let mut assignment = pinned.clone();
    if !assign(&steps1, &steps2, &free, 0, &mut assignment, &mut used) {
        return None;
    }
    debug_assert!(verify_equiv_witness(c1, c2, &assignment));
    Some(assignment)
}

fn assign(
    steps1: &CyclicCoalgebra,
    steps2: &CyclicCoalgebra,
    free: &[String],
    at: usize,
    assignment: &mut BTreeMap<String, String>,
    used: &mut BTreeSet<String>,
) -> bool {
    if at == free.len() {
        return full_check(steps1, steps2, assignment);
    }
    let v = &free[at];
    let v_sort = steps1.ctx().nodes().sort_of(v).unwrap().to_string();
    let v_op = match steps1.step(v).unwrap() {
        Step::Var(_) => None,
        Step::Op(op, _) => Some(op.clone()),
    };
    let candidates: Vec<String> = steps2
        .ctx()
        .nodes()
        .names()
        .filter(|w| !used.contains(*w))
        .filter(|w| steps2.ctx().nodes().sort_of(w) == Some(v_sort.as_str()))
        .filter(|w| match (v_op.as_ref(), steps2.step(w).unwrap()) {
            (None, Step::Var(_)) => true,
            (Some(op), Step::Op(op2, _)) => op == op2,
            _ => false,
        })
        .map(str::to_string)
        .collect();
    for w in candidates {
        // Prune: children already decided must already match.
        let consistent = match (steps1.step(v).unwrap(), steps2.step(&w).unwrap()) {
            (Step::Op(_, kids1), Step::Op(_, kids2)) => kids1
                .iter()
                .zip(kids2)
                .all(|(k1, k2)| assignment.get(k1).map(|img| img == k2).unwrap_or(true)),
            _ => true,
        };
        if !consistent {
            continue;
        }
        assignment.insert(v.clone(), w.clone());
        used.insert(w.clone());
        if assign(steps1, steps2, free, at + 1, assignment, used) {
            return true;
        }
        assignment.remove(v);
        used.remove(&w);
    }
    false
}

fn full_check(
    steps1: &CyclicCoalgebra,
    steps2: &CyclicCoalgebra,
    assignment: &BTreeMap<String, String>,
) -> bool {
    for (v, st) in steps1.steps() {
        let w = &assignment[v];
        match (st, steps2.step(w).unwrap()) {
            (Step::Var(a1), Step::Var(a2)) => {
                if a1 != a2 {
                    return false;
                }
            }
            (Step::Op(op1, kids1), Step::Op(op2, kids2)) => {
                if op1 != op2 {
                    return false;
                }
                for (k1, k2) in kids1.iter().zip(kids2) {
                    if &assignment[k1] != k2 {
                        return false;
                    }
                }
            }
            _ => return false,
        }
    }
    true
}

/// Check a claimed equivalence witness: a sort-preserving bijection of
/// carriers commuting with both legs and preserving the step structure.
pub fn verify_equiv_witness(
    c1: &Cospan,
    c2: &Cospan,
    witness: &BTreeMap<String, String>,
) -> bool {
    if !c1.source().same_as(c2.source()) || !c1.target().same_as(c2.target()) {
        return false;
    }
    if family::check_function(c1.carrier(), c2.carrier(), witness).is_err()
        || family::check_injective(witness).is_err()
        || witness.len() != c2.carrier().len()
    {
        return false;
    }
    let steps1 = c1.body().steps();
    let steps2 = c2.body().steps();
    for (a, _) in c1.source().iter() {
        if witness[steps1.ctx().embed_of(a).unwrap()] != *steps2.ctx().embed_of(a).unwrap() {
            return false;
        }
    }
    for (b, _) in c1.target().iter() {
        if witness[&c1.out()[b]] != c2.out()[b] {
            return false;
        }
    }
    full_check(&steps1, &steps2, witness)
}

/// Interpret a cospan in an algebra: evaluate the body on the given
/// source environment, then read the values off along the output leg.
/// Cyclic bodies fall back to the fixpoint solver.
pub fn interpret_cospan<V: Clone>(
    c: &Cospan,
    env: &Environment<V>,
    alg: &Algebra<V>,
) -> Result<Environment<V>, SolveError> {
    let values = match c.body() {
        CospanBody::Acyclic(atg) => lift(atg, env, alg)?.values,
        CospanBody::Cyclic(cc) => solve_cyclic(cc, env, alg)?,
    };
    Ok(c.out()
        .iter()
        .map(|(b, node)| (b.clone(), values[node].clone()))
        .collect())
}
