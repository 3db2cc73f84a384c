//! Rooted ribbon trees with numbered semi-infinite edges, sprinkle
//! decompositions, flavour and weight propagation, and the stability
//! predicate. These are the skeletons of every moduli stratum.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// One flag (half-edge) at a vertex, listed in ribbon order. Flag 0 of
/// every vertex points toward the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flag {
    /// The distinguished semi-infinite edge.
    Root,
    /// Semi-infinite edge numbered `1..=d` by the planar embedding.
    Leaf(usize),
    /// Finite edge toward the given vertex.
    Edge(usize),
}

/// A rooted planar tree with `d + 1` semi-infinite edges. Vertices store
/// their flags explicitly in ribbon order; planarity of the leaf
/// numbering is a validation step, not a construction invariant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RibbonTree {
    flags: Vec<Vec<Flag>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeError {
    Unstable { d: usize, sprinkles: usize },
    Malformed(String),
    CompatibilityViolation { vertex: usize, sprinkle: usize },
    WeightLaw { expected: u32, got: u32 },
    BadWeights(String),
    BadFlavour(String),
    NoSuchEdge(usize),
}

impl core::fmt::Display for TreeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TreeError::Unstable { d, sprinkles } => {
                write!(f, "unstable configuration d={} |F|={}", d, sprinkles)
            }
            TreeError::Malformed(m) => write!(f, "malformed tree: {}", m),
            TreeError::CompatibilityViolation { vertex, sprinkle } => write!(
                f,
                "sprinkle f{} not supported on vertex {}",
                sprinkle + 1,
                vertex
            ),
            TreeError::WeightLaw { expected, got } => {
                write!(f, "weight law violated: w^0 should be {}, got {}", expected, got)
            }
            TreeError::BadWeights(m) => write!(f, "bad weights: {}", m),
            TreeError::BadFlavour(m) => write!(f, "bad flavour: {}", m),
            TreeError::NoSuchEdge(e) => write!(f, "no finite edge with index {}", e),
        }
    }
}

/// Sprinkle labels: sprinkle `s` (0-based) is attached to the line toward
/// the positive end `p[s]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Flavour {
    p: Vec<usize>,
}

impl Flavour {
    pub fn new(p: Vec<usize>, d: usize) -> Result<Self, TreeError> {
        for &v in &p {
            if v < 1 || v > d {
                return Err(TreeError::BadFlavour(format!(
                    "label {} outside 1..={}",
                    v, d
                )));
            }
        }
        Ok(Flavour { p })
    }

    pub fn empty() -> Self {
        Flavour { p: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn label(&self, sprinkle: usize) -> usize {
        self.p[sprinkle]
    }

    pub fn labels(&self) -> &[usize] {
        &self.p
    }

    /// The symmetry group of the flavour is trivial exactly when no two
    /// sprinkles share a label.
    pub fn is_injective(&self) -> bool {
        let set: BTreeSet<usize> = self.p.iter().copied().collect();
        set.len() == self.p.len()
    }

    /// All permutations of the sprinkles stabilizing the labels, as
    /// images `perm[s]`.
    pub fn sym_group(&self) -> Vec<Vec<usize>> {
        let n = self.p.len();
        let mut perms = vec![Vec::new()];
        for s in 0..n {
            let mut next = Vec::new();
            for partial in perms {
                for t in 0..n {
                    if partial.contains(&t) || self.p[t] != self.p[s] {
                        continue;
                    }
                    let mut ext = partial.clone();
                    ext.push(t);
                    next.push(ext);
                }
            }
            perms = next;
        }
        perms
    }
}

impl RibbonTree {
    /// The unique tree with a single vertex.
    pub fn one_vertex(d: usize) -> Self {
        let mut flags = vec![Flag::Root];
        flags.extend((1..=d).map(Flag::Leaf));
        RibbonTree { flags: vec![flags] }
    }

    pub fn vertex_count(&self) -> usize {
        self.flags.len()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.flags[v].len()
    }

    pub fn flags_at(&self, v: usize) -> &[Flag] {
        &self.flags[v]
    }

    pub fn d(&self) -> usize {
        self.flags
            .iter()
            .flatten()
            .filter(|f| matches!(f, Flag::Leaf(_)))
            .count()
    }

    pub fn root_vertex(&self) -> usize {
        self.flags
            .iter()
            .position(|fs| fs.contains(&Flag::Root))
            .expect("tree has a root stub")
    }

    /// Finite edges as `(parent, child)` pairs with the parent closer to
    /// the root, sorted; positions in this list are the edge indices used
    /// everywhere else.
    pub fn finite_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (v, fs) in self.flags.iter().enumerate() {
            for f in fs.iter().skip(1) {
                if let Flag::Edge(w) = f {
                    edges.push((v, *w));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.flags[v][0] {
            Flag::Edge(p) => Some(p),
            _ => None,
        }
    }

    pub fn leaf_vertex(&self, leaf: usize) -> usize {
        self.flags
            .iter()
            .position(|fs| fs.contains(&Flag::Leaf(leaf)))
            .expect("leaf exists")
    }

    /// Vertices on the path from the root vertex to the vertex carrying
    /// the given leaf, inclusive.
    pub fn path_to_leaf(&self, leaf: usize) -> Vec<usize> {
        let mut path = vec![self.leaf_vertex(leaf)];
        while let Some(p) = self.parent(*path.last().unwrap()) {
            path.push(p);
        }
        path.reverse();
        path
    }

    /// The ribbon index of the flag at `v` through which the path toward
    /// the given leaf departs.
    pub fn departing_flag(&self, v: usize, leaf: usize) -> Option<usize> {
        let path = self.path_to_leaf(leaf);
        let pos = path.iter().position(|&u| u == v)?;
        if pos + 1 < path.len() {
            let next = path[pos + 1];
            self.flags[v].iter().position(|f| *f == Flag::Edge(next))
        } else {
            self.flags[v].iter().position(|f| *f == Flag::Leaf(leaf))
        }
    }

    /// Checks connectivity, acyclicity, flag orientation, and that the
    /// leaf numbering is the one induced by the planar embedding: a DFS
    /// from the root in ribbon order must visit leaves `1..=d` in order.
    pub fn validate(&self) -> Result<(), TreeError> {
        let n = self.vertex_count();
        if n == 0 {
            return Err(TreeError::Malformed("no vertices".into()));
        }
        let roots = self
            .flags
            .iter()
            .flatten()
            .filter(|f| matches!(f, Flag::Root))
            .count();
        if roots != 1 {
            return Err(TreeError::Malformed(format!("{} root stubs", roots)));
        }
        for (v, fs) in self.flags.iter().enumerate() {
            if fs.len() < 2 {
                return Err(TreeError::Malformed(format!("vertex {} has valence < 2", v)));
            }
            for f in fs {
                if let Flag::Edge(w) = f {
                    if *w >= n || *w == v {
                        return Err(TreeError::Malformed(format!("bad edge {} -> {}", v, w)));
                    }
                    let back = self.flags[*w]
                        .iter()
                        .filter(|g| **g == Flag::Edge(v))
                        .count();
                    if back != 1 {
                        return Err(TreeError::Malformed(format!(
                            "edge {} -> {} not mirrored",
                            v, w
                        )));
                    }
                }
            }
        }
        let root = self.root_vertex();
        if self.flags[root][0] != Flag::Root {
            return Err(TreeError::Malformed("root stub is not flag 0".into()));
        }
        // Orientation plus reachability: flag 0 of every other vertex must
        // point to its DFS parent.
        let mut seen = vec![false; n];
        let mut order = Vec::new();
        let mut stack = vec![(root, usize::MAX)];
        let mut leaves = Vec::new();
        while let Some((v, from)) = stack.pop() {
            if seen[v] {
                return Err(TreeError::Malformed("cycle".into()));
            }
            seen[v] = true;
            order.push(v);
            if from != usize::MAX && self.flags[v][0] != Flag::Edge(from) {
                return Err(TreeError::Malformed(format!(
                    "flag 0 of vertex {} does not point to the root",
                    v
                )));
            }
            for f in self.flags[v].iter().skip(1).rev() {
                match f {
                    Flag::Edge(w) => stack.push((*w, v)),
                    Flag::Leaf(_) | Flag::Root => {}
                }
            }
        }
        if order.len() != n {
            return Err(TreeError::Malformed("disconnected".into()));
        }
        // Planar leaf numbering.
        fn visit(tree: &RibbonTree, v: usize, leaves: &mut Vec<usize>) {
            for f in tree.flags[v].iter().skip(1) {
                match f {
                    Flag::Leaf(k) => leaves.push(*k),
                    Flag::Edge(w) => visit(tree, *w, leaves),
                    Flag::Root => {}
                }
            }
        }
        visit(self, root, &mut leaves);
        let d = self.d();
        if leaves != (1..=d).collect::<Vec<_>>() {
            return Err(TreeError::Malformed(format!(
                "leaf numbering {:?} is not planar",
                leaves
            )));
        }
        Ok(())
    }

    /// Contracts the finite edge with the given index, merging the child
    /// into the parent. Returns the new tree and the old-to-new vertex
    /// map.
    pub fn contract_edge(&self, edge: usize) -> Result<(RibbonTree, Vec<usize>), TreeError> {
        let edges = self.finite_edges();
        let &(p, c) = edges.get(edge).ok_or(TreeError::NoSuchEdge(edge))?;
        let mut flags = self.flags.clone();
        let spliced: Vec<Flag> = self.flags[c][1..].to_vec();
        let pos = flags[p]
            .iter()
            .position(|f| *f == Flag::Edge(c))
            .expect("edge flag present");
        flags[p].splice(pos..=pos, spliced);
        // Re-point the grandchildren.
        for fs in flags.iter_mut() {
            for f in fs.iter_mut() {
                if *f == Flag::Edge(c) {
                    *f = Flag::Edge(p);
                }
            }
        }
        flags[p].retain(|f| *f != Flag::Edge(p));
        // Self-references created by the splice point from p to itself;
        // drop them (the merged vertex keeps the child's outgoing flags).
        flags.remove(c);
        let mut map = Vec::with_capacity(self.vertex_count());
        for v in 0..self.vertex_count() {
            map.push(if v == c {
                if p > c {
                    p - 1
                } else {
                    p
                }
            } else if v > c {
                v - 1
            } else {
                v
            });
        }
        for fs in flags.iter_mut() {
            for f in fs.iter_mut() {
                if let Flag::Edge(w) = f {
                    if *w > c {
                        *w -= 1;
                    }
                }
            }
        }
        Ok((RibbonTree { flags }, map))
    }

    /// Canonical parenthesized encoding; equal trees encode equally.
    pub fn encode(&self) -> String {
        fn enc(tree: &RibbonTree, v: usize, out: &mut String) {
            out.push('(');
            for f in tree.flags[v].iter().skip(1) {
                match f {
                    Flag::Leaf(k) => out.push_str(&format!("l{}", k)),
                    Flag::Edge(w) => enc(tree, *w, out),
                    Flag::Root => {}
                }
            }
            out.push(')');
        }
        let mut out = String::new();
        enc(self, self.root_vertex(), &mut out);
        out
    }
}

/// Planar shapes used by the tree generator.
enum Shape {
    Leaf,
    Vertex(Vec<Shape>),
}

fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 1..=(n - parts + 1) {
        for rest in compositions(n - first, parts - 1) {
            let mut c = vec![first];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

/// All subtree shapes with `n` leaves using at most `budget` two-valent
/// vertices; returns the budget actually consumed alongside each shape.
fn subtree_shapes(n: usize, budget: usize) -> Vec<(Shape, usize)> {
    let mut out = Vec::new();
    if n == 1 {
        out.push((Shape::Leaf, 0));
    }
    out.extend(vertex_shapes(n, budget));
    out
}

fn vertex_shapes(n: usize, budget: usize) -> Vec<(Shape, usize)> {
    let mut out = Vec::new();
    for children in 1..=n {
        let own_cost = if children == 1 { 1 } else { 0 };
        if own_cost > budget {
            continue;
        }
        for comp in compositions(n, children) {
            let mut partials: Vec<(Vec<Shape>, usize)> = vec![(Vec::new(), own_cost)];
            for &part in &comp {
                let mut next = Vec::new();
                for (prefix, used) in partials {
                    for (child, child_used) in subtree_shapes(part, budget - used) {
                        let mut ext: Vec<Shape> = prefix
                            .iter()
                            .map(|s| clone_shape(s))
                            .collect();
                        ext.push(child);
                        next.push((ext, used + child_used));
                    }
                }
                partials = next;
            }
            for (kids, used) in partials {
                out.push((Shape::Vertex(kids), used));
            }
        }
    }
    out
}

fn clone_shape(s: &Shape) -> Shape {
    match s {
        Shape::Leaf => Shape::Leaf,
        Shape::Vertex(kids) => Shape::Vertex(kids.iter().map(clone_shape).collect()),
    }
}

fn shape_to_tree(shape: &Shape, d: usize) -> RibbonTree {
    fn build(
        shape: &Shape,
        parent: usize,
        flags: &mut Vec<Vec<Flag>>,
        next_leaf: &mut usize,
    ) -> Flag {
        match shape {
            Shape::Leaf => {
                let f = Flag::Leaf(*next_leaf);
                *next_leaf += 1;
                f
            }
            Shape::Vertex(kids) => {
                let v = flags.len();
                flags.push(vec![if parent == usize::MAX {
                    Flag::Root
                } else {
                    Flag::Edge(parent)
                }]);
                for kid in kids {
                    let f = build(kid, v, flags, next_leaf);
                    flags[v].push(f);
                }
                Flag::Edge(v)
            }
        }
    }
    let mut flags = Vec::new();
    let mut next_leaf = 1;
    build(shape, usize::MAX, &mut flags, &mut next_leaf);
    debug_assert_eq!(next_leaf, d + 1);
    RibbonTree { flags }
}

/// All rooted ribbon trees with `d` numbered leaves and at most
/// `two_valent_budget` two-valent vertices, in canonical form.
pub fn enumerate_trees(d: usize, two_valent_budget: usize) -> Vec<RibbonTree> {
    let mut out: Vec<RibbonTree> = vertex_shapes(d, two_valent_budget)
        .iter()
        .map(|(s, _)| shape_to_tree(s, d))
        .collect();
    out.sort_by_key(|t| t.encode());
    out
}

/// A tree together with a distribution of the sprinkles over its
/// vertices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FDecomposition {
    pub tree: RibbonTree,
    /// Sprinkle subsets per vertex; their disjoint union is the full set.
    pub parts: Vec<BTreeSet<usize>>,
}

impl FDecomposition {
    pub fn one_vertex(d: usize, flavour: &Flavour) -> Self {
        FDecomposition {
            tree: RibbonTree::one_vertex(d),
            parts: vec![(0..flavour.len()).collect()],
        }
    }

    pub fn codim(&self) -> usize {
        self.tree.finite_edges().len()
    }

    /// Sprinkle compatibility: each sprinkle must sit on the path from
    /// the root to its leaf.
    pub fn validate(&self, flavour: &Flavour) -> Result<(), TreeError> {
        self.tree.validate()?;
        if self.parts.len() != self.tree.vertex_count() {
            return Err(TreeError::Malformed("parts/vertex mismatch".into()));
        }
        let mut seen = BTreeSet::new();
        for (v, part) in self.parts.iter().enumerate() {
            for &s in part {
                if s >= flavour.len() || !seen.insert(s) {
                    return Err(TreeError::Malformed(format!("sprinkle {} misused", s)));
                }
                let path = self.tree.path_to_leaf(flavour.label(s));
                if !path.contains(&v) {
                    return Err(TreeError::CompatibilityViolation {
                        vertex: v,
                        sprinkle: s,
                    });
                }
            }
        }
        if seen.len() != flavour.len() {
            return Err(TreeError::Malformed("sprinkles not exhausted".into()));
        }
        Ok(())
    }

    /// Stability: every two-valent vertex carries at least one sprinkle.
    pub fn is_stable(&self) -> bool {
        (0..self.tree.vertex_count())
            .all(|v| self.tree.valence(v) >= 3 || !self.parts[v].is_empty())
    }

    /// Contracts a set of finite edges, merging sprinkle parts.
    pub fn contract(&self, edges: &BTreeSet<usize>) -> Result<FDecomposition, TreeError> {
        let mut tree = self.tree.clone();
        let mut parts = self.parts.clone();
        // Re-derive edge endpoints each round; indices shift under
        // contraction, so resolve them to endpoint pairs first.
        let all = self.tree.finite_edges();
        let mut targets: Vec<(usize, usize)> = Vec::new();
        for &e in edges {
            targets.push(*all.get(e).ok_or(TreeError::NoSuchEdge(e))?);
        }
        let mut vertex_map: Vec<usize> = (0..tree.vertex_count()).collect();
        for &(p0, c0) in &targets {
            let p = vertex_map[p0];
            let c = vertex_map[c0];
            let idx = tree
                .finite_edges()
                .iter()
                .position(|&(a, b)| (a, b) == (p, c))
                .ok_or_else(|| TreeError::Malformed("edge lost in contraction".into()))?;
            let (next, map) = tree.contract_edge(idx)?;
            let mut next_parts = vec![BTreeSet::new(); next.vertex_count()];
            for (v, part) in parts.iter().enumerate() {
                next_parts[map[v]].extend(part.iter().copied());
            }
            for m in vertex_map.iter_mut() {
                *m = map[*m];
            }
            tree = next;
            parts = next_parts;
        }
        Ok(FDecomposition { tree, parts })
    }

    pub fn encode(&self) -> String {
        fn enc(dec: &FDecomposition, v: usize, out: &mut String) {
            out.push('(');
            if !dec.parts[v].is_empty() {
                out.push('F');
                for s in &dec.parts[v] {
                    out.push_str(&format!("{},", s + 1));
                }
                out.push(';');
            }
            for f in dec.tree.flags[v].iter().skip(1) {
                match f {
                    Flag::Leaf(k) => out.push_str(&format!("l{}", k)),
                    Flag::Edge(w) => enc(dec, *w, out),
                    Flag::Root => {}
                }
            }
            out.push(')');
        }
        let mut out = String::new();
        enc(self, self.tree.root_vertex(), &mut out);
        out
    }
}

/// Every stable `(tree, sprinkle distribution)` pair, each exactly once,
/// ordered by codimension and canonical encoding. The one-vertex pair is
/// always included.
pub fn enumerate_stable_decompositions(
    d: usize,
    flavour: &Flavour,
) -> Result<Vec<FDecomposition>, TreeError> {
    if d < 1 || d + flavour.len() < 2 {
        return Err(TreeError::Unstable {
            d,
            sprinkles: flavour.len(),
        });
    }
    Ok(enumerate_decompositions_unchecked(d, flavour))
}

/// Stability is local, so the same enumeration serves cascade spaces,
/// where `d + |F| = 1` simply yields nothing.
pub(crate) fn enumerate_decompositions_unchecked(
    d: usize,
    flavour: &Flavour,
) -> Vec<FDecomposition> {
    let mut out = Vec::new();
    for tree in enumerate_trees(d, flavour.len()) {
        let paths: Vec<Vec<usize>> = (0..flavour.len())
            .map(|s| tree.path_to_leaf(flavour.label(s)))
            .collect();
        let mut assignments: Vec<Vec<usize>> = vec![Vec::new()];
        for path in &paths {
            let mut next = Vec::new();
            for partial in &assignments {
                for &v in path {
                    let mut ext = partial.clone();
                    ext.push(v);
                    next.push(ext);
                }
            }
            assignments = next;
        }
        for assignment in assignments {
            let mut parts = vec![BTreeSet::new(); tree.vertex_count()];
            for (s, &v) in assignment.iter().enumerate() {
                parts[v].insert(s);
            }
            let dec = FDecomposition {
                tree: tree.clone(),
                parts,
            };
            if dec.is_stable() {
                out.push(dec);
            }
        }
    }
    out.sort_by_key(|dec| (dec.codim(), dec.encode()));
    out
}

/// Per-vertex sprinkle labels: sprinkle `f` at vertex `v` maps to the
/// ribbon index of the flag through which the path to its leaf departs.
pub fn induce_flavours(
    dec: &FDecomposition,
    flavour: &Flavour,
) -> Result<Vec<BTreeMap<usize, usize>>, TreeError> {
    let mut out = vec![BTreeMap::new(); dec.tree.vertex_count()];
    for (v, part) in dec.parts.iter().enumerate() {
        for &s in part {
            let flag = dec
                .tree
                .departing_flag(v, flavour.label(s))
                .ok_or(TreeError::CompatibilityViolation { vertex: v, sprinkle: s })?;
            out[v].insert(s, flag);
        }
    }
    Ok(out)
}

/// Weights at the semi-infinite ends; `w[0]` is the root weight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Weights {
    pub w: Vec<u32>,
}

impl Weights {
    pub fn new(w: Vec<u32>) -> Self {
        Weights { w }
    }

    pub fn d(&self) -> usize {
        self.w.len() - 1
    }

    /// The weight law: the root weight is the sum of the leaf weights
    /// plus the number of sprinkles.
    pub fn validate(&self, flavour: &Flavour) -> Result<(), TreeError> {
        if self.w.is_empty() {
            return Err(TreeError::BadWeights("empty".into()));
        }
        if self.w.iter().any(|&x| x == 0) {
            return Err(TreeError::BadWeights("weights must be positive".into()));
        }
        let expected: u32 = self.w[1..].iter().sum::<u32>() + flavour.len() as u32;
        if self.w[0] != expected {
            return Err(TreeError::WeightLaw {
                expected,
                got: self.w[0],
            });
        }
        Ok(())
    }
}

/// Induced weights per vertex: semi-infinite flags carry the given
/// weights, the two flags of a finite edge agree, and the per-vertex
/// weight law holds. The assignment is unique and found by a
/// leaf-to-root sweep.
pub fn propagate_weights(
    dec: &FDecomposition,
    flavour: &Flavour,
    weights: &Weights,
) -> Result<Vec<Weights>, TreeError> {
    weights.validate(flavour)?;
    if weights.d() != dec.tree.d() {
        return Err(TreeError::BadWeights(format!(
            "{} weights for {} ends",
            weights.w.len(),
            dec.tree.d() + 1
        )));
    }
    let n = dec.tree.vertex_count();
    let mut upward: Vec<Option<u32>> = vec![None; n];
    // Process vertices deepest-first so all child edges are resolved.
    let mut depth = vec![0usize; n];
    for v in 0..n {
        depth[v] = {
            let mut d = 0;
            let mut u = v;
            while let Some(p) = dec.tree.parent(u) {
                u = p;
                d += 1;
            }
            d
        };
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| core::cmp::Reverse(depth[v]));
    let mut per_vertex: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &v in &order {
        let mut positive_sum: u32 = 0;
        let mut row: Vec<u32> = Vec::with_capacity(dec.tree.valence(v));
        row.push(0); // placeholder for flag 0
        for f in dec.tree.flags_at(v).iter().skip(1) {
            let w = match f {
                Flag::Leaf(k) => weights.w[*k],
                Flag::Edge(c) => upward[*c].expect("children processed first"),
                Flag::Root => unreachable!("root stub is flag 0"),
            };
            positive_sum += w;
            row.push(w);
        }
        let w0 = positive_sum + dec.parts[v].len() as u32;
        row[0] = w0;
        upward[v] = Some(w0);
        per_vertex[v] = row;
    }
    let root = dec.tree.root_vertex();
    // On a tree the sweep always closes up with the global law.
    if per_vertex[root][0] != weights.w[0] {
        return Err(TreeError::Malformed(format!(
            "weight sweep inconsistent: root carries {}, expected {}",
            per_vertex[root][0], weights.w[0]
        )));
    }
    Ok(per_vertex.into_iter().map(Weights::new).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flavour(p: &[usize], d: usize) -> Flavour {
        Flavour::new(p.to_vec(), d).unwrap()
    }

    #[test]
    fn one_vertex_tree_is_valid() {
        for d in 1..5 {
            let t = RibbonTree::one_vertex(d);
            t.validate().unwrap();
            assert_eq!(t.d(), d);
            assert_eq!(t.finite_edges().len(), 0);
        }
    }

    #[test]
    fn enumerated_trees_validate() {
        for d in 1..=5 {
            for budget in 0..=2 {
                for t in enumerate_trees(d, budget) {
                    t.validate().unwrap();
                    assert_eq!(t.d(), d);
                }
            }
        }
    }

    #[test]
    fn stable_trees_without_sprinkles_match_associahedron_counts() {
        // d = 3: one vertex plus two binary trees.
        let decs = enumerate_stable_decompositions(3, &Flavour::empty()).unwrap();
        assert_eq!(decs.len(), 3);
        assert_eq!(decs.iter().filter(|d| d.codim() == 0).count(), 1);
        assert_eq!(decs.iter().filter(|d| d.codim() == 1).count(), 2);
    }

    #[test]
    fn hexagon_and_pentagon_counts() {
        let hex = enumerate_stable_decompositions(2, &flavour(&[1, 1], 2)).unwrap();
        let count = |k: usize| hex.iter().filter(|d| d.codim() == k).count();
        assert_eq!((count(0), count(1), count(2)), (1, 6, 6));

        let pent = enumerate_stable_decompositions(2, &flavour(&[1, 2], 2)).unwrap();
        let count = |k: usize| pent.iter().filter(|d| d.codim() == k).count();
        assert_eq!((count(0), count(1), count(2)), (1, 5, 5));
    }

    #[test]
    fn rejects_unstable_input() {
        assert!(matches!(
            enumerate_stable_decompositions(1, &Flavour::empty()),
            Err(TreeError::Unstable { .. })
        ));
    }

    #[test]
    fn enumeration_round_trip() {
        for (d, p) in [(2, vec![1usize, 1]), (2, vec![1, 2]), (3, vec![]), (3, vec![2])] {
            let fl = flavour(&p, d);
            let decs = enumerate_stable_decompositions(d, &fl).unwrap();
            let mut seen = BTreeSet::new();
            for dec in &decs {
                dec.validate(&fl).unwrap();
                assert!(dec.is_stable());
                assert!(dec.codim() <= d - 2 + fl.len());
                assert!(seen.insert(dec.encode()), "duplicate {}", dec.encode());
            }
        }
    }

    #[test]
    fn induced_flavour_on_one_vertex_is_p() {
        let fl = flavour(&[1, 2], 2);
        let dec = FDecomposition::one_vertex(2, &fl);
        let induced = induce_flavours(&dec, &fl).unwrap();
        assert_eq!(induced[0].get(&0), Some(&1));
        assert_eq!(induced[0].get(&1), Some(&2));
    }

    #[test]
    fn induced_flavour_on_two_valent_root() {
        // Two-vertex tree, root vertex two-valent carrying f1; the path to
        // leaf 1 departs through flag 1.
        let fl = flavour(&[1, 1], 2);
        let decs = enumerate_stable_decompositions(2, &fl).unwrap();
        let dec = decs
            .iter()
            .find(|dec| {
                dec.codim() == 1
                    && dec.tree.valence(dec.tree.root_vertex()) == 2
                    && dec.parts[dec.tree.root_vertex()].len() == 1
                    && dec.parts[dec.tree.root_vertex()].contains(&0)
            })
            .unwrap();
        let induced = induce_flavours(dec, &fl).unwrap();
        assert_eq!(induced[dec.tree.root_vertex()].get(&0), Some(&1));
    }

    #[test]
    fn empty_flavour_induces_empty_maps() {
        let fl = Flavour::empty();
        let decs = enumerate_stable_decompositions(3, &fl).unwrap();
        for dec in &decs {
            for m in induce_flavours(dec, &fl).unwrap() {
                assert!(m.is_empty());
            }
        }
    }

    #[test]
    fn weight_propagation_identity_on_one_vertex() {
        let fl = flavour(&[1, 1], 2);
        let dec = FDecomposition::one_vertex(2, &fl);
        let w = Weights::new(vec![5, 1, 2]);
        let per = propagate_weights(&dec, &fl, &w).unwrap();
        assert_eq!(per[0].w, vec![5, 1, 2]);
    }

    #[test]
    fn weight_propagation_hexagon_example() {
        // Far vertex carries both leaves and f1; the root vertex carries
        // f2. Far weights (4,1,2), root weights (5,4).
        let fl = flavour(&[1, 1], 2);
        let decs = enumerate_stable_decompositions(2, &fl).unwrap();
        let dec = decs
            .iter()
            .find(|dec| {
                let root = dec.tree.root_vertex();
                dec.codim() == 1
                    && dec.tree.valence(root) == 2
                    && dec.parts[root].contains(&1)
                    && dec.parts[root].len() == 1
            })
            .unwrap();
        let per = propagate_weights(dec, &fl, &Weights::new(vec![5, 1, 2])).unwrap();
        let root = dec.tree.root_vertex();
        let far = (0..2).find(|&v| v != root).unwrap();
        assert_eq!(per[root].w, vec![5, 4]);
        assert_eq!(per[far].w, vec![4, 1, 2]);
    }

    #[test]
    fn weight_law_violation_rejected() {
        let fl = flavour(&[1, 1], 2);
        let dec = FDecomposition::one_vertex(2, &fl);
        let bad = Weights::new(vec![4, 1, 2]);
        assert!(matches!(
            propagate_weights(&dec, &fl, &bad),
            Err(TreeError::WeightLaw { expected: 5, got: 4 })
        ));
    }

    #[test]
    fn stability_predicate() {
        let fl = flavour(&[1], 1);
        // Single two-valent vertex with one sprinkle: stable.
        let dec = FDecomposition::one_vertex(1, &fl);
        assert!(dec.is_stable());
        // Same tree with the sprinkle removed is unstable.
        let bare = FDecomposition {
            tree: dec.tree.clone(),
            parts: vec![BTreeSet::new()],
        };
        assert!(!bare.is_stable());
    }

    #[test]
    fn contraction_merges_parts() {
        let fl = flavour(&[1, 1], 2);
        let decs = enumerate_stable_decompositions(2, &fl).unwrap();
        let dec = decs.iter().find(|d| d.codim() == 1).unwrap();
        let contracted = dec.contract(&[0usize].into_iter().collect()).unwrap();
        assert_eq!(contracted.codim(), 0);
        assert_eq!(contracted.parts[0].len(), 2);
        contracted.validate(&fl).unwrap();
    }
}
