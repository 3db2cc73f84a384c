//! Strata of the partially compactified cascade spaces: causal ordering,
//! the `(tree, parts, contracted edges, equal edges)` bookkeeping,
//! collapsed trees, the pairing of codimension-one faces, order-polytope
//! faces, and the end/boundary classification of one-dimensional spaces
//! of cascade maps.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::tree::{
    enumerate_decompositions_unchecked, FDecomposition, Flavour, TreeError, Weights,
};

/// A stratum of the partial compactification: equalities are declared on
/// the edges in `e`, and the subset `ebar` of those is additionally
/// contracted in the limit description. Codimension is `|e|`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CascadeStratum {
    pub dec: FDecomposition,
    pub e: BTreeSet<usize>,
    pub ebar: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CascadeError {
    Tree(TreeError),
    PartnerNeedsCodimOne { codim: usize },
    EbarOutsideE,
}

impl From<TreeError> for CascadeError {
    fn from(e: TreeError) -> Self {
        CascadeError::Tree(e)
    }
}

impl core::fmt::Display for CascadeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CascadeError::Tree(e) => write!(f, "{}", e),
            CascadeError::PartnerNeedsCodimOne { codim } => {
                write!(f, "partner is defined on codimension one, got {}", codim)
            }
            CascadeError::EbarOutsideE => write!(f, "contracted edges must be declared equal"),
        }
    }
}

impl CascadeStratum {
    pub fn codim(&self) -> usize {
        self.e.len()
    }

    pub fn validate(&self, flavour: &Flavour) -> Result<(), CascadeError> {
        self.dec.validate(flavour)?;
        let edge_count = self.dec.tree.finite_edges().len();
        for &e in self.e.iter() {
            if e >= edge_count {
                return Err(CascadeError::Tree(TreeError::NoSuchEdge(e)));
            }
        }
        if !self.ebar.is_subset(&self.e) {
            return Err(CascadeError::EbarOutsideE);
        }
        Ok(())
    }

    pub fn encode(&self) -> String {
        format!(
            "{} E={:?} Ebar={:?}",
            self.dec.encode(),
            self.e.iter().collect::<Vec<_>>(),
            self.ebar.iter().collect::<Vec<_>>()
        )
    }
}

/// Connected components of the cascade space: the stable decompositions.
/// Each has dimension `d - 1 + |F|`.
pub fn enumerate_components(d: usize, flavour: &Flavour) -> Vec<FDecomposition> {
    enumerate_decompositions_unchecked(d, flavour)
}

/// All strata `(dec, E, Ebar)` with `|E| <= max_codim`.
pub fn enumerate_cascade_strata(
    d: usize,
    flavour: &Flavour,
    max_codim: usize,
) -> Vec<CascadeStratum> {
    let mut out = Vec::new();
    for dec in enumerate_components(d, flavour) {
        let edges: Vec<usize> = (0..dec.codim()).collect();
        for e_mask in 0u32..(1 << edges.len()) {
            let e: BTreeSet<usize> = edges
                .iter()
                .filter(|&&i| e_mask >> i & 1 == 1)
                .copied()
                .collect();
            if e.len() > max_codim {
                continue;
            }
            let e_vec: Vec<usize> = e.iter().copied().collect();
            for ebar_mask in 0u32..(1 << e_vec.len()) {
                let ebar: BTreeSet<usize> = e_vec
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| ebar_mask >> j & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                out.push(CascadeStratum {
                    dec: dec.clone(),
                    e: e.clone(),
                    ebar,
                });
            }
        }
    }
    out.sort_by_key(|s| (s.codim(), s.encode()));
    out
}

/// Contracts the edges in `ebar`, merging the sprinkle parts over the
/// collapsed fibres.
pub fn collapse(stratum: &CascadeStratum) -> Result<FDecomposition, CascadeError> {
    Ok(stratum.dec.contract(&stratum.ebar)?)
}

/// The isomorphic partner of a codimension-one stratum: toggles the
/// contracted subset between empty and full. A fixed-point-free
/// involution preserving `(dec, e)`.
pub fn partner(stratum: &CascadeStratum) -> Result<CascadeStratum, CascadeError> {
    if stratum.e.len() != 1 {
        return Err(CascadeError::PartnerNeedsCodimOne {
            codim: stratum.e.len(),
        });
    }
    let ebar = if stratum.ebar.is_empty() {
        stratum.e.clone()
    } else {
        BTreeSet::new()
    };
    Ok(CascadeStratum {
        dec: stratum.dec.clone(),
        e: stratum.e.clone(),
        ebar,
    })
}

/// Declared order relations among the per-vertex parameters of a
/// stratum: strictly increasing along edges away from the root, equal on
/// the edges in `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalChain {
    /// `(parent vertex, child vertex, equal?)` per finite edge.
    pub relations: Vec<(usize, usize, bool)>,
    /// Vertices pinned at parameter value one (closed toward the leaves).
    pub at_one: BTreeSet<usize>,
}

impl CausalChain {
    pub fn from_stratum(stratum: &CascadeStratum) -> Self {
        let edges = stratum.dec.tree.finite_edges();
        let relations = edges
            .iter()
            .enumerate()
            .map(|(i, &(p, c))| (p, c, stratum.e.contains(&i)))
            .collect();
        CausalChain {
            relations,
            at_one: BTreeSet::new(),
        }
    }

    /// Strict relations must stay strict: no strict edge may connect two
    /// vertices forced equal, and pinned vertices must be closed toward
    /// the leaves.
    pub fn is_consistent(&self) -> bool {
        // Union-find over equalities.
        let n = self
            .relations
            .iter()
            .flat_map(|&(p, c, _)| [p, c])
            .max()
            .map_or(0, |m| m + 1);
        let mut repr: Vec<usize> = (0..n).collect();
        fn find(repr: &mut Vec<usize>, mut v: usize) -> usize {
            while repr[v] != v {
                repr[v] = repr[repr[v]];
                v = repr[v];
            }
            v
        }
        for &(p, c, equal) in &self.relations {
            if equal {
                let (a, b) = (find(&mut repr, p), find(&mut repr, c));
                repr[a] = b;
            }
        }
        for &(p, c, equal) in &self.relations {
            if !equal && find(&mut repr, p) == find(&mut repr, c) {
                return false;
            }
        }
        for &(p, c, _) in &self.relations {
            if self.at_one.contains(&p) && !self.at_one.contains(&c) {
                return false;
            }
        }
        true
    }
}

/// Face counts, by codimension, of the half-open order polytope of a
/// tree: parameters in `(0, 1]` weakly increasing from the root, faces
/// cut out by equalities along edges and by pinning an upward-closed set
/// of vertices at one.
pub fn order_polytope_faces(dec: &FDecomposition) -> Vec<usize> {
    let edges = dec.tree.finite_edges();
    let n = dec.tree.vertex_count();
    let mut counts = vec![0usize; n + 1];
    for mask in 0u32..(1 << edges.len()) {
        let contracted: BTreeSet<usize> = (0..edges.len()).filter(|i| mask >> i & 1 == 1).collect();
        let merged = dec
            .contract(&contracted)
            .expect("edge indices are in range");
        // Upward-closed pinned sets of the contracted tree, counted by
        // size via a subtree product.
        let m = merged.tree.vertex_count();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (p, c) in merged.tree.finite_edges() {
            children[p].push(c);
        }
        fn poly(v: usize, children: &Vec<Vec<usize>>, out: &mut Vec<Vec<u64>>) {
            // out[v][k] = number of upward-closed sets of the subtree at v
            // with k elements.
            let mut not_in = vec![1u64];
            for &c in &children[v] {
                poly(c, children, out);
                let mut next = vec![0u64; not_in.len() + out[c].len() - 1];
                for (i, a) in not_in.iter().enumerate() {
                    for (j, b) in out[c].iter().enumerate() {
                        next[i + j] += a * b;
                    }
                }
                not_in = next;
            }
            let size = subtree_size(v, children);
            let mut total = vec![0u64; size + 1];
            for (i, a) in not_in.iter().enumerate() {
                total[i] += a;
            }
            total[size] += 1; // v pinned forces the whole subtree
            out[v] = total;
        }
        fn subtree_size(v: usize, children: &Vec<Vec<usize>>) -> usize {
            1 + children[v]
                .iter()
                .map(|&c| subtree_size(c, children))
                .sum::<usize>()
        }
        let mut table = vec![Vec::new(); m];
        let root = merged.tree.root_vertex();
        poly(root, &children, &mut table);
        for (k, &ways) in table[root].iter().enumerate() {
            counts[contracted.len() + k] += ways as usize;
        }
    }
    while counts.last() == Some(&0) {
        counts.pop();
    }
    counts
}

/// One end of a one-dimensional space of cascade maps: the root-most
/// component escapes to small parameter values, its inputs fed by lower
/// cascades indexed by a partition of the inputs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EndPattern {
    /// The partition `d = d_1 + .. + d_l`.
    pub parts: Vec<usize>,
    /// Sprinkles staying on the escaping component, with induced labels.
    pub f_plus: BTreeMap<usize, usize>,
    /// Sprinkles delegated to the j-th lower cascade, with induced labels.
    pub f_minus: Vec<BTreeMap<usize, usize>>,
    /// Weights of the escaping component.
    pub weights_plus: Weights,
    /// Weights of each lower cascade.
    pub weights_minus: Vec<Weights>,
}

/// A boundary point where a leaf-most component reaches parameter one:
/// an inner popsicle factor on `d_minus` inputs in slot `i`, the rest of
/// the cascade outside.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryPattern {
    pub d_minus: usize,
    pub i: usize,
    /// Sprinkles on the inner popsicle factor, with induced labels.
    pub f_inner: BTreeMap<usize, usize>,
    /// Sprinkles staying on the cascade, with induced labels.
    pub f_outer: BTreeMap<usize, usize>,
    pub weights_inner: Weights,
    pub weights_outer: Weights,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndReport {
    pub ends: Vec<EndPattern>,
    pub boundaries: Vec<BoundaryPattern>,
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(acc.clone());
            return;
        }
        for first in 1..=n {
            acc.push(first);
            rec(n - first, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut out);
    out
}

/// Classifies the ends and the parameter-one boundary points of a
/// one-dimensional cascade-map space with the given inputs.
pub fn classify_ends(
    d: usize,
    flavour: &Flavour,
    weights: &Weights,
) -> Result<EndReport, TreeError> {
    weights.validate(flavour)?;
    if weights.d() != d {
        return Err(TreeError::BadWeights(format!(
            "{} weights for d={}",
            weights.w.len(),
            d
        )));
    }
    let mut ends = Vec::new();
    for parts in compositions(d) {
        let l = parts.len();
        let offsets: Vec<usize> = parts
            .iter()
            .scan(0usize, |acc, &p| {
                let o = *acc;
                *acc += p;
                Some(o)
            })
            .collect();
        // Each sprinkle sits in exactly one block and may stay on the
        // escaping component or join that block's cascade.
        let block_of = |s: usize| -> usize {
            let p = flavour.label(s);
            (0..l)
                .find(|&j| offsets[j] < p && p <= offsets[j] + parts[j])
                .expect("label in range")
        };
        let mut choices: Vec<(BTreeMap<usize, usize>, Vec<BTreeMap<usize, usize>>)> =
            vec![(BTreeMap::new(), vec![BTreeMap::new(); l])];
        for s in 0..flavour.len() {
            let j = block_of(s);
            let mut next = Vec::new();
            for (fp, fm) in &choices {
                let mut up = fp.clone();
                up.insert(s, j + 1);
                next.push((up, fm.clone()));
                let mut down = fm.clone();
                down[j].insert(s, flavour.label(s) - offsets[j]);
                next.push((fp.clone(), down));
            }
            choices = next;
        }
        for (f_plus, f_minus) in choices {
            let mut weights_minus = Vec::with_capacity(l);
            let mut w_plus = vec![weights.w[0]];
            for j in 0..l {
                let mut block: Vec<u32> = vec![0];
                for k in 1..=parts[j] {
                    block.push(weights.w[offsets[j] + k]);
                }
                block[0] = block[1..].iter().sum::<u32>() + f_minus[j].len() as u32;
                w_plus.push(block[0]);
                weights_minus.push(Weights::new(block));
            }
            let weights_plus = Weights::new(w_plus);
            debug_assert_eq!(
                weights_plus.w[0],
                weights_plus.w[1..].iter().sum::<u32>() + f_plus.len() as u32
            );
            ends.push(EndPattern {
                parts: parts.clone(),
                f_plus,
                f_minus,
                weights_plus,
                weights_minus,
            });
        }
    }
    ends.sort();

    let mut boundaries = Vec::new();
    for d_minus in 1..=d {
        let d_plus = d + 1 - d_minus;
        for i in 1..=d_plus {
            let window = i..=(i + d_minus - 1);
            let mut choices: Vec<(BTreeMap<usize, usize>, BTreeMap<usize, usize>)> =
                vec![(BTreeMap::new(), BTreeMap::new())];
            for s in 0..flavour.len() {
                let p = flavour.label(s);
                let mut next = Vec::new();
                for (inner, outer) in &choices {
                    if window.contains(&p) {
                        let mut to_inner = inner.clone();
                        to_inner.insert(s, p - i + 1);
                        next.push((to_inner, outer.clone()));
                        let mut to_outer = outer.clone();
                        to_outer.insert(s, i);
                        next.push((inner.clone(), to_outer));
                    } else {
                        let mut to_outer = outer.clone();
                        to_outer.insert(s, if p < i { p } else { p - d_minus + 1 });
                        next.push((inner.clone(), to_outer));
                    }
                }
                choices = next;
            }
            for (f_inner, f_outer) in choices {
                let mut w_inner = vec![0u32];
                for k in window.clone() {
                    w_inner.push(weights.w[k]);
                }
                w_inner[0] = w_inner[1..].iter().sum::<u32>() + f_inner.len() as u32;
                let mut w_outer = vec![weights.w[0]];
                for k in 1..=d_plus {
                    w_outer.push(if k < i {
                        weights.w[k]
                    } else if k == i {
                        w_inner[0]
                    } else {
                        weights.w[k + d_minus - 1]
                    });
                }
                boundaries.push(BoundaryPattern {
                    d_minus,
                    i,
                    f_inner,
                    f_outer,
                    weights_inner: Weights::new(w_inner),
                    weights_outer: Weights::new(w_outer),
                });
            }
        }
    }
    boundaries.sort();
    Ok(EndReport { ends, boundaries })
}
