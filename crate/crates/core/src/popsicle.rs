//! Stratification of compactified popsicle moduli spaces: f-vectors,
//! the sprinkle-permutation action and its isotropy loci, virtual
//! dimensions, and poset emission.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::tree::{
    enumerate_stable_decompositions, FDecomposition, Flavour, TreeError,
};

/// A boundary stratum of the compactified moduli space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PopsicleStratum {
    pub dec: FDecomposition,
    pub codim: usize,
}

/// Dimension of the open stratum. The formula `d - 2 + |F|` covers the
/// unstable pair `(d, F) = (1, empty)` as well, where the value `-1` is
/// the standing convention for the strip.
pub fn dimension(d: usize, flavour: &Flavour) -> i64 {
    d as i64 - 2 + flavour.len() as i64
}

/// Virtual dimension of a moduli space with prescribed chord degrees.
pub fn vdim(d: usize, flavour: &Flavour, deg0: i64, degs: &[i64]) -> i64 {
    debug_assert_eq!(degs.len(), d);
    dimension(d, flavour) + deg0 - degs.iter().sum::<i64>()
}

/// All strata grouped by codimension; level 0 holds the unique open
/// stratum. Order within a level is lexicographic on the canonical
/// encoding.
pub fn enumerate_strata(
    d: usize,
    flavour: &Flavour,
) -> Result<Vec<Vec<PopsicleStratum>>, TreeError> {
    let decs = enumerate_stable_decompositions(d, flavour)?;
    let max_codim = decs.iter().map(|dec| dec.codim()).max().unwrap_or(0);
    let mut levels = vec![Vec::new(); max_codim + 1];
    for dec in decs {
        let codim = dec.codim();
        levels[codim].push(PopsicleStratum { dec, codim });
    }
    Ok(levels)
}

/// Stratum counts by codimension, open stratum first.
pub fn f_vector(d: usize, flavour: &Flavour) -> Result<Vec<usize>, TreeError> {
    Ok(enumerate_strata(d, flavour)?
        .iter()
        .map(|level| level.len())
        .collect())
}

/// Relabels the sprinkles of a stratum by a permutation stabilizing the
/// flavour. `perm[s]` is the image of sprinkle `s`.
pub fn sym_act(
    stratum: &PopsicleStratum,
    flavour: &Flavour,
    perm: &[usize],
) -> Result<PopsicleStratum, TreeError> {
    if perm.len() != flavour.len() {
        return Err(TreeError::BadFlavour("permutation length mismatch".into()));
    }
    let mut seen = BTreeSet::new();
    for (s, &t) in perm.iter().enumerate() {
        if t >= flavour.len() || !seen.insert(t) {
            return Err(TreeError::BadFlavour("not a permutation".into()));
        }
        if flavour.label(s) != flavour.label(t) {
            return Err(TreeError::BadFlavour(format!(
                "permutation moves sprinkle {} across labels",
                s + 1
            )));
        }
    }
    let parts = stratum
        .dec
        .parts
        .iter()
        .map(|part| part.iter().map(|&s| perm[s]).collect())
        .collect();
    Ok(PopsicleStratum {
        dec: FDecomposition {
            tree: stratum.dec.tree.clone(),
            parts,
        },
        codim: stratum.codim,
    })
}

/// Orbits of one codimension level under the full symmetry group of the
/// flavour, as index sets into the level.
pub fn sym_orbits(
    level: &[PopsicleStratum],
    flavour: &Flavour,
) -> Result<Vec<Vec<usize>>, TreeError> {
    let group = flavour.sym_group();
    let index: BTreeMap<String, usize> = level
        .iter()
        .enumerate()
        .map(|(i, s)| (s.dec.encode(), i))
        .collect();
    let mut seen = vec![false; level.len()];
    let mut orbits = Vec::new();
    for start in 0..level.len() {
        if seen[start] {
            continue;
        }
        let mut orbit = BTreeSet::new();
        for perm in &group {
            let image = sym_act(&level[start], flavour, perm)?;
            let idx = *index
                .get(&image.dec.encode())
                .ok_or_else(|| TreeError::Malformed("orbit left the level".into()))?;
            orbit.insert(idx);
        }
        for &i in &orbit {
            seen[i] = true;
        }
        orbits.push(orbit.into_iter().collect());
    }
    Ok(orbits)
}

/// A partition of the sprinkles on which the flavour is constant; these
/// index the isotropy subgroups of the symmetry action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymPartition {
    pub parts: Vec<BTreeSet<usize>>,
}

impl SymPartition {
    pub fn validate(&self, flavour: &Flavour) -> Result<(), TreeError> {
        let mut seen = BTreeSet::new();
        for part in &self.parts {
            let mut labels = BTreeSet::new();
            for &s in part {
                if s >= flavour.len() || !seen.insert(s) {
                    return Err(TreeError::BadFlavour("partition misuses a sprinkle".into()));
                }
                labels.insert(flavour.label(s));
            }
            if labels.len() > 1 {
                return Err(TreeError::BadFlavour(
                    "flavour not constant on a part".into(),
                ));
            }
        }
        if seen.len() != flavour.len() {
            return Err(TreeError::BadFlavour("partition not exhaustive".into()));
        }
        Ok(())
    }
}

/// Virtual codimension of the fixed locus of the isotropy subgroup
/// attached to a partition.
pub fn isotropy_codim(partition: &SymPartition) -> usize {
    partition.parts.iter().map(|p| p.len() - 1).sum()
}

/// The closure poset: stratum `a` lies in the closure of stratum `b`
/// exactly when `b` is obtained from `a` by contracting finite edges and
/// merging the sprinkle parts accordingly. Edges of the poset are the
/// one-edge contractions.
#[derive(Clone, Debug)]
pub struct StratumPoset {
    /// `(codim, canonical encoding)` per node, sorted.
    pub nodes: Vec<(usize, String)>,
    /// `(deeper stratum, its one-edge contraction)` index pairs.
    pub covers: Vec<(usize, usize)>,
}

pub fn closure_poset(levels: &[Vec<PopsicleStratum>]) -> StratumPoset {
    let mut nodes = Vec::new();
    let mut index = BTreeMap::new();
    for level in levels {
        for stratum in level {
            let enc = stratum.dec.encode();
            index.insert(enc.clone(), nodes.len());
            nodes.push((stratum.codim, enc));
        }
    }
    let mut covers = Vec::new();
    for level in levels {
        for stratum in level {
            let from = index[&stratum.dec.encode()];
            for e in 0..stratum.dec.codim() {
                let mut edge = BTreeSet::new();
                edge.insert(e);
                if let Ok(contracted) = stratum.dec.contract(&edge) {
                    if let Some(&to) = index.get(&contracted.encode()) {
                        covers.push((from, to));
                    }
                }
            }
        }
    }
    covers.sort_unstable();
    covers.dedup();
    StratumPoset { nodes, covers }
}

impl StratumPoset {
    /// Line records, one `stratum` line per node and one `face` line per
    /// covering pair.
    pub fn emit_lines(&self) -> String {
        let mut out = String::new();
        for (i, (codim, enc)) in self.nodes.iter().enumerate() {
            out.push_str(&format!("stratum {} codim={} {}\n", i, codim, enc));
        }
        for (a, b) in &self.covers {
            out.push_str(&format!("face {} {}\n", a, b));
        }
        out
    }

    pub fn emit_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {} {{\n", name);
        out.push_str("  rankdir=BT;\n");
        for (i, (codim, enc)) in self.nodes.iter().enumerate() {
            out.push_str(&format!(
                "  n{} [label=\"{}\\ncodim {}\"];\n",
                i,
                enc.replace('"', ""),
                codim
            ));
        }
        for (a, b) in &self.covers {
            out.push_str(&format!("  n{} -> n{};\n", a, b));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flavour(p: &[usize], d: usize) -> Flavour {
        Flavour::new(p.to_vec(), d).unwrap()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(2, &flavour(&[1, 1], 2)), 2);
        assert_eq!(dimension(1, &Flavour::empty()), -1);
        assert_eq!(dimension(1, &flavour(&[1], 1)), 0);
    }

    #[test]
    fn vdim_examples() {
        // Rigid Floer trajectory: deg x^0 = deg x^1 + 1.
        assert_eq!(vdim(1, &Flavour::empty(), 3, &[2]), 0);
        // Continuation map: equal degrees.
        assert_eq!(vdim(1, &flavour(&[1], 1), 2, &[2]), 0);
        assert_eq!(vdim(2, &Flavour::empty(), 0, &[0, 0]), 0);
    }

    #[test]
    fn f_vectors_match_figures() {
        assert_eq!(f_vector(2, &flavour(&[1, 1], 2)).unwrap(), vec![1, 6, 6]);
        assert_eq!(f_vector(2, &flavour(&[1, 2], 2)).unwrap(), vec![1, 5, 5]);
        assert_eq!(f_vector(4, &Flavour::empty()).unwrap(), vec![1, 5, 5]);
    }

    #[test]
    fn euler_characteristic_is_one() {
        // The compactification is a ball, so the alternating sum of
        // stratum counts by dimension is one. For even-dimensional cases
        // this is the same as alternating by codimension (hexagon:
        // 1-6+6, pentagon: 1-5+5).
        for (d, p) in [
            (2usize, vec![1usize, 1]),
            (2, vec![1, 2]),
            (3, vec![]),
            (4, vec![]),
            (3, vec![1, 3]),
            (3, vec![2, 2]),
        ] {
            let fl = flavour(&p, d);
            let top = dimension(d, &fl);
            let fv = f_vector(d, &fl).unwrap();
            let euler: i64 = fv
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    if (top - k as i64).rem_euclid(2) == 0 {
                        n as i64
                    } else {
                        -(n as i64)
                    }
                })
                .sum();
            assert_eq!(euler, 1, "d={} p={:?} fv={:?}", d, p, fv);
        }
    }

    #[test]
    fn sym_act_is_a_group_action() {
        let fl = flavour(&[1, 1], 2);
        let levels = enumerate_strata(2, &fl).unwrap();
        let swap = vec![1, 0];
        for level in &levels {
            for s in level {
                let once = sym_act(s, &fl, &swap).unwrap();
                let twice = sym_act(&once, &fl, &swap).unwrap();
                assert_eq!(&twice, s);
                assert_eq!(once.codim, s.codim);
                assert_eq!(once.dec.tree, s.dec.tree);
            }
        }
    }

    #[test]
    fn sym_act_rejects_label_crossing_permutation() {
        let fl = flavour(&[1, 2], 2);
        let levels = enumerate_strata(2, &fl).unwrap();
        assert!(sym_act(&levels[0][0], &fl, &[1, 0]).is_err());
        // Identity is always admissible.
        let id = sym_act(&levels[0][0], &fl, &[0, 1]).unwrap();
        assert_eq!(id, levels[0][0]);
        assert_eq!(fl.sym_group().len(), 1);
    }

    #[test]
    fn hexagon_orbit_structure() {
        let fl = flavour(&[1, 1], 2);
        let levels = enumerate_strata(2, &fl).unwrap();
        // Corners pair up freely: three two-element orbits.
        let corner_orbits = sym_orbits(&levels[2], &fl).unwrap();
        assert_eq!(corner_orbits.len(), 3);
        assert!(corner_orbits.iter().all(|o| o.len() == 2));
        // Two edges are fixed (both sprinkles on one vertex), the other
        // four pair up.
        let edge_orbits = sym_orbits(&levels[1], &fl).unwrap();
        let sizes: Vec<usize> = {
            let mut s: Vec<usize> = edge_orbits.iter().map(|o| o.len()).collect();
            s.sort_unstable();
            s
        };
        assert_eq!(sizes, vec![1, 1, 2, 2]);
    }

    #[test]
    fn isotropy_codim_examples() {
        let fl = flavour(&[1, 1, 1, 1], 2);
        let singletons = SymPartition {
            parts: (0..4).map(|s| [s].into_iter().collect()).collect(),
        };
        singletons.validate(&fl).unwrap();
        assert_eq!(isotropy_codim(&singletons), 0);

        let one_pair = SymPartition {
            parts: vec![
                [0, 1].into_iter().collect(),
                [2].into_iter().collect(),
                [3].into_iter().collect(),
            ],
        };
        one_pair.validate(&fl).unwrap();
        assert_eq!(isotropy_codim(&one_pair), 1);

        let two_pairs = SymPartition {
            parts: vec![[0, 1].into_iter().collect(), [2, 3].into_iter().collect()],
        };
        two_pairs.validate(&fl).unwrap();
        assert_eq!(isotropy_codim(&two_pairs), 2);
        // Consistency: codim = |F| - #parts.
        assert_eq!(isotropy_codim(&two_pairs), 4 - 2);
    }

    #[test]
    fn partition_must_refine_flavour_fibres() {
        let fl = flavour(&[1, 2], 2);
        let bad = SymPartition {
            parts: vec![[0, 1].into_iter().collect()],
        };
        assert!(bad.validate(&fl).is_err());
    }

    #[test]
    fn poset_is_graded_by_one_edge_contractions() {
        let fl = flavour(&[1, 1], 2);
        let levels = enumerate_strata(2, &fl).unwrap();
        let poset = closure_poset(&levels);
        assert_eq!(poset.nodes.len(), 13);
        for &(a, b) in &poset.covers {
            assert_eq!(poset.nodes[a].0, poset.nodes[b].0 + 1);
        }
        // Every positive-codimension stratum has at least one contraction.
        for (i, (codim, _)) in poset.nodes.iter().enumerate() {
            if *codim > 0 {
                assert!(poset.covers.iter().any(|&(a, _)| a == i));
            }
        }
        let lines = poset.emit_lines();
        assert!(lines.contains("stratum 0 codim=0"));
        assert!(poset.emit_dot("hexagon").starts_with("digraph hexagon {"));
    }
}
