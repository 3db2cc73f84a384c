//! Formal certification that the boundary relations span the expansion
//! of the associativity equations after the q-translation.
//!
//! Structure constants are treated as opaque symbols; an expansion
//! collects, per composition pattern, the integer coefficient with which
//! the symbol pair appears when the equations are evaluated on a generic
//! q-monomial input. Exact elimination against the relation vectors then
//! certifies the sign bookkeeping: a zero residual for every
//! configuration pins the conventions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::sign::{ad_hoc_parity_with, cut_sign_with, enumerate_cuts, parity, Mutation};

/// One composition pattern. Sprinkle subsets are local to each factor;
/// `out_q` distinguishes the two output components.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Composite {
        i: usize,
        d_minus: usize,
        f_minus: BTreeSet<usize>,
        f_plus: BTreeSet<usize>,
        out_q: bool,
    },
    /// A lone symbol surviving from the identity-like part of the linear
    /// operation; these must cancel among themselves.
    Single { f: BTreeSet<usize>, out_q: bool },
}

impl Term {
    pub fn out_q(&self) -> bool {
        match self {
            Term::Composite { out_q, .. } | Term::Single { out_q, .. } => *out_q,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Term::Composite {
                i,
                d_minus,
                f_minus,
                f_plus,
                out_q,
            } => format!(
                "m(d+,F{:?}) o_{} m({},F{:?}){}",
                f_plus.iter().collect::<Vec<_>>(),
                i,
                d_minus,
                f_minus.iter().collect::<Vec<_>>(),
                if *out_q { " [q]" } else { "" }
            ),
            Term::Single { f, out_q } => format!(
                "m(d,F{:?}){}",
                f.iter().collect::<Vec<_>>(),
                if *out_q { " [q]" } else { "" }
            ),
        }
    }
}

/// Finitely supported integer combination of composition patterns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormalSum {
    pub terms: BTreeMap<Term, i64>,
}

impl FormalSum {
    pub fn add(&mut self, term: Term, coeff: i64) {
        if coeff == 0 {
            return;
        }
        match self.terms.entry(term) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Restriction to one output component.
    pub fn component(&self, out_q: bool) -> FormalSum {
        FormalSum {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.out_q() == out_q)
                .map(|(t, &c)| (t.clone(), c))
                .collect(),
        }
    }

    pub fn describe(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(t, c)| format!("{:+} {}", c, t.describe()))
            .collect::<Vec<_>>()
            .join("  ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolicError {
    BoundExceeded { d: usize, bound: usize },
    BadInput(String),
}

impl core::fmt::Display for SymbolicError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SymbolicError::BoundExceeded { d, bound } => {
                write!(f, "arity {} exceeds the configured bound {}", d, bound)
            }
            SymbolicError::BadInput(m) => write!(f, "{}", m),
        }
    }
}

pub const DEFAULT_ARITY_BOUND: usize = 6;

/// One route through a symbolic operation: which local sprinkle set the
/// constant carries, the coefficient, and the output q flag.
struct Route {
    flavour: BTreeSet<usize>,
    coeff: i64,
    out_q: bool,
    hand: bool,
}

/// All routes of the symbolic operation on a block of slots with the
/// given chord degree parities and q flags (slot-local indexing).
fn routes(degs: &[i64], flags: &[bool], mutation: Option<Mutation>) -> Vec<Route> {
    let d = degs.len();
    let support: BTreeSet<usize> = (1..=d).filter(|&k| flags[k - 1]).collect();
    let mut out = Vec::new();
    // All q's consumed by the constant.
    let twist = ad_hoc_parity_with(d, &support, degs, mutation);
    out.push(Route {
        flavour: support.clone(),
        coeff: if twist { -1 } else { 1 },
        out_q: false,
        hand: false,
    });
    // One q survives.
    for &k in &support {
        let mut flavour = support.clone();
        flavour.remove(&k);
        let sigma = parity(
            ((k + 1)..=d)
                .map(|j| degs[j - 1] - i64::from(flags[j - 1]) - 1)
                .sum(),
        );
        let twist = sigma ^ ad_hoc_parity_with(d, &flavour, degs, mutation);
        out.push(Route {
            flavour,
            coeff: if twist { -1 } else { 1 },
            out_q: true,
            hand: false,
        });
    }
    // The identity-like part of the linear operation.
    if d == 1 && flags[0] {
        out.push(Route {
            flavour: BTreeSet::new(),
            coeff: if parity(degs[0] + 1) { -1 } else { 1 },
            out_q: false,
            hand: true,
        });
    }
    out
}

/// Coefficient, per composition pattern, of the associativity equations
/// evaluated on the generic q-monomial input with q's on `q_slots` and
/// chord degree parities `degs`.
pub fn expand_as(
    d: usize,
    q_slots: &BTreeSet<usize>,
    degs: &[i64],
    mutation: Option<Mutation>,
) -> Result<FormalSum, SymbolicError> {
    if d > DEFAULT_ARITY_BOUND {
        return Err(SymbolicError::BoundExceeded {
            d,
            bound: DEFAULT_ARITY_BOUND,
        });
    }
    if degs.len() != d {
        return Err(SymbolicError::BadInput(format!(
            "{} degrees for arity {}",
            degs.len(),
            d
        )));
    }
    if q_slots.iter().any(|&k| k < 1 || k > d) {
        return Err(SymbolicError::BadInput("q slot out of range".into()));
    }
    let flags: Vec<bool> = (1..=d).map(|k| q_slots.contains(&k)).collect();
    let mut sum = FormalSum::default();
    for d_minus in 1..=d {
        let d_plus = d + 1 - d_minus;
        for i in 1..=d_plus {
            let prefix = parity(
                (1..i)
                    .map(|j| degs[j - 1] - i64::from(flags[j - 1]) - 1)
                    .sum(),
            );
            let prefix = if prefix { -1 } else { 1 };
            let window = (i - 1)..(i - 1 + d_minus);
            let wdegs: Vec<i64> = degs[window.clone()].to_vec();
            let wflags: Vec<bool> = flags[window.clone()].to_vec();
            for inner in routes(&wdegs, &wflags, mutation) {
                // Degree parity of the intermediate chord.
                let new_deg: i64 = if inner.hand {
                    wdegs[0]
                } else {
                    wdegs.iter().sum::<i64>() + d_minus as i64 + inner.flavour.len() as i64
                };
                let mut odegs: Vec<i64> = Vec::with_capacity(d_plus);
                let mut oflags: Vec<bool> = Vec::with_capacity(d_plus);
                for j in 1..=d_plus {
                    if j < i {
                        odegs.push(degs[j - 1]);
                        oflags.push(flags[j - 1]);
                    } else if j == i {
                        odegs.push(new_deg);
                        oflags.push(inner.out_q);
                    } else {
                        odegs.push(degs[j + d_minus - 2]);
                        oflags.push(flags[j + d_minus - 2]);
                    }
                }
                for outer in routes(&odegs, &oflags, mutation) {
                    let coeff = prefix * inner.coeff * outer.coeff;
                    let term = match (inner.hand, outer.hand) {
                        (false, false) => Term::Composite {
                            i,
                            d_minus,
                            f_minus: inner.flavour.clone(),
                            f_plus: outer.flavour.clone(),
                            out_q: outer.out_q,
                        },
                        (true, false) => Term::Single {
                            f: outer.flavour.clone(),
                            out_q: outer.out_q,
                        },
                        (false, true) => Term::Single {
                            f: inner.flavour.clone(),
                            out_q: false,
                        },
                        (true, true) => continue,
                    };
                    sum.add(term, coeff);
                }
            }
        }
    }
    Ok(sum)
}

/// The boundary relation for one ambient sprinkle set, lifted to one
/// output component: one signed pattern per admissible cut.
pub fn relation_vector(
    d: usize,
    ambient_f: &BTreeSet<usize>,
    degs: &[i64],
    out_q: bool,
    mutation: Option<Mutation>,
) -> FormalSum {
    let mut sum = FormalSum::default();
    for cut in enumerate_cuts(d, ambient_f) {
        let bit = cut_sign_with(d, &cut, degs, mutation);
        sum.add(
            Term::Composite {
                i: cut.i,
                d_minus: cut.d_minus,
                f_minus: cut.f_minus.clone(),
                f_plus: cut.f_plus.clone(),
                out_q,
            },
            if bit { -1 } else { 1 },
        );
    }
    sum
}

/// One relation vector per ambient sprinkle set and output component.
pub fn relation_basis(d: usize, degs: &[i64], mutation: Option<Mutation>) -> Vec<FormalSum> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << d) {
        let f: BTreeSet<usize> = (1..=d).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        for out_q in [false, true] {
            let v = relation_vector(d, &f, degs, out_q, mutation);
            if !v.is_zero() {
                out.push(v);
            }
        }
    }
    out
}

/// Residual of an expansion modulo the span of the basis, by exact
/// elimination. A zero residual certifies that the expansion is a
/// combination of boundary relations.
pub fn reduce(expansion: &FormalSum, basis: &[FormalSum]) -> FormalSum {
    type Vector = BTreeMap<Term, BigRational>;
    let to_vec = |s: &FormalSum| -> Vector {
        s.terms
            .iter()
            .map(|(t, &c)| (t.clone(), BigRational::from(BigInt::from(c))))
            .collect()
    };
    fn eliminate(v: &mut Vector, pivots: &[(Term, Vector)]) {
        for (pivot, row) in pivots {
            let Some(c) = v.get(pivot).cloned() else { continue };
            for (t, rv) in row {
                let delta = &c * rv;
                let entry = v.entry(t.clone()).or_insert_with(BigRational::zero);
                *entry -= delta;
            }
            v.remove(pivot);
            v.retain(|_, c| !c.is_zero());
        }
    }
    // Mutually reduced pivot rows: a single elimination pass is complete.
    let mut pivots: Vec<(Term, Vector)> = Vec::new();
    for b in basis {
        let mut v = to_vec(b);
        eliminate(&mut v, &pivots);
        let Some((pivot, lead)) = v.iter().next().map(|(t, c)| (t.clone(), c.clone())) else {
            continue;
        };
        let mut row: Vector = v.iter().map(|(t, c)| (t.clone(), c / &lead)).collect();
        row.remove(&pivot);
        for (_, existing) in pivots.iter_mut() {
            let Some(c) = existing.get(&pivot).cloned() else { continue };
            for (t, rv) in &row {
                let delta = &c * rv;
                let entry = existing.entry(t.clone()).or_insert_with(BigRational::zero);
                *entry -= delta;
            }
            existing.remove(&pivot);
            existing.retain(|_, c| !c.is_zero());
        }
        pivots.push((pivot, row));
    }
    let mut v = to_vec(expansion);
    eliminate(&mut v, &pivots);
    // Scale back to integers; elimination over the rationals can leave
    // denominators, and a positive scaling does not change vanishing.
    let mut denom = BigInt::one();
    for c in v.values() {
        denom = num_integer::lcm(denom, c.denom().clone());
    }
    let mut out = FormalSum::default();
    for (t, c) in v {
        let scaled = &c * BigRational::from(denom.clone());
        debug_assert!(scaled.denom().is_one());
        let n = scaled.numer();
        let small: i64 = i64::try_from(n).unwrap_or(if n.is_negative() { -1 } else { 1 });
        out.add(t, small);
    }
    out
}

/// Result of certifying one configuration.
#[derive(Clone, Debug)]
pub struct CertificateLine {
    pub d: usize,
    pub q_slots: BTreeSet<usize>,
    pub degs: Vec<i64>,
    pub residual: FormalSum,
}

/// Runs the reduction for every q-slot pattern and degree-parity vector
/// at one arity.
pub fn certify(d: usize, mutation: Option<Mutation>) -> Result<Vec<CertificateLine>, SymbolicError> {
    let mut out = Vec::new();
    for q_mask in 0u32..(1 << d) {
        let q_slots: BTreeSet<usize> = (1..=d).filter(|k| q_mask >> (k - 1) & 1 == 1).collect();
        for deg_mask in 0u32..(1 << d) {
            let degs: Vec<i64> = (1..=d)
                .map(|k| i64::from(deg_mask >> (k - 1) & 1))
                .collect();
            let expansion = expand_as(d, &q_slots, &degs, mutation)?;
            let basis = relation_basis(d, &degs, mutation);
            let residual = reduce(&expansion, &basis);
            out.push(CertificateLine {
                d,
                q_slots: q_slots.clone(),
                degs,
                residual,
            });
        }
    }
    Ok(out)
}

/// The two displayed low-arity relations, frozen: returns true when the
/// relation vectors reproduce them verbatim.
pub fn verbatim_examples_hold(mutation: Option<Mutation>) -> bool {
    // Arity one, one sprinkle: +(continuation after differential)
    // -(differential after continuation).
    for deg in [0i64, 1] {
        let f: BTreeSet<usize> = [1].into_iter().collect();
        let v = relation_vector(1, &f, &[deg], false, mutation);
        let plus = Term::Composite {
            i: 1,
            d_minus: 1,
            f_minus: BTreeSet::new(),
            f_plus: [1].into_iter().collect(),
            out_q: false,
        };
        let minus = Term::Composite {
            i: 1,
            d_minus: 1,
            f_minus: [1].into_iter().collect(),
            f_plus: BTreeSet::new(),
            out_q: false,
        };
        if v.terms.len() != 2
            || v.terms.get(&plus) != Some(&1)
            || v.terms.get(&minus) != Some(&-1)
        {
            return false;
        }
    }
    // Arity two, both sprinkles: seven terms with the displayed signs.
    for d2 in [0i64, 1] {
        for d1 in [0i64, 1] {
            let f: BTreeSet<usize> = [1, 2].into_iter().collect();
            let v = relation_vector(2, &f, &[d1, d2], false, mutation);
            if v.terms.len() != 7 {
                return false;
            }
            let composite = |i: usize, dm: usize, fm: &[usize], fp: &[usize]| Term::Composite {
                i,
                d_minus: dm,
                f_minus: fm.iter().copied().collect(),
                f_plus: fp.iter().copied().collect(),
                out_q: false,
            };
            let expected: [(Term, i64); 7] = [
                (composite(1, 2, &[1], &[1]), -1),
                (composite(1, 2, &[2], &[1]), 1),
                (composite(2, 1, &[1], &[1]), 1),
                (composite(1, 1, &[1], &[2]), -1),
                (composite(1, 2, &[1, 2], &[]), 1),
                (composite(2, 1, &[], &[1, 2]), -1),
                (composite(1, 1, &[], &[1, 2]), if parity(d2 + 1) { -1 } else { 1 }),
            ];
            for (term, coeff) in expected {
                if v.terms.get(&term) != Some(&coeff) {
                    return false;
                }
            }
        }
    }
    true
}

/// Every single-term mutation of the sign conventions must be caught by
/// the suite: a nonzero reduction residual somewhere, or a verbatim
/// mismatch against the frozen low-arity relations.
pub fn mutation_is_caught(mutation: Mutation) -> Result<bool, SymbolicError> {
    if !verbatim_examples_hold(Some(mutation)) {
        return Ok(true);
    }
    for d in 1..=3 {
        for line in certify(d, Some(mutation))? {
            if !line.residual.is_zero() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

pub fn all_mutations() -> Vec<Mutation> {
    let mut out = Vec::new();
    for t in 0..2 {
        out.push(Mutation::AdHocTerm(t));
    }
    for t in 0..6 {
        out.push(Mutation::AlephTerm(t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn arity_one_expansion_matches_displayed_patterns() {
        for deg in [0i64, 1] {
            let sum = expand_as(1, &set(&[1]), &[deg], None).unwrap();
            let value_part = sum.component(false);
            // Exactly the two composition patterns, with opposite signs.
            let composites: Vec<(&Term, &i64)> = value_part
                .terms
                .iter()
                .filter(|(t, _)| matches!(t, Term::Composite { .. }))
                .collect();
            assert_eq!(composites.len(), 2, "{}", value_part.describe());
            let total: i64 = composites.iter().map(|(_, &c)| c).sum();
            assert_eq!(total, 0);
            // The lone symbols cancel.
            assert!(value_part
                .terms
                .iter()
                .all(|(t, _)| matches!(t, Term::Composite { .. })));
        }
    }

    #[test]
    fn zero_input_expansion_is_empty() {
        // No q's and no relations triggered at arity one with no
        // admissible degree pattern: the expansion on a plain input has
        // only the differential-squared pattern, which the basis absorbs.
        let sum = expand_as(1, &set(&[]), &[0], None).unwrap();
        let basis = relation_basis(1, &[0], None);
        assert!(reduce(&sum, &basis).is_zero());
    }

    #[test]
    fn verbatim_examples_pass_unmutated() {
        assert!(verbatim_examples_hold(None));
    }

    #[test]
    fn certification_zero_residual_up_to_arity_three() {
        for d in 1..=3 {
            for line in certify(d, None).unwrap() {
                assert!(
                    line.residual.is_zero(),
                    "d={} q={:?} degs={:?}: {}",
                    line.d,
                    line.q_slots,
                    line.degs,
                    line.residual.describe()
                );
            }
        }
    }

    #[test]
    fn every_mutation_is_caught() {
        for m in all_mutations() {
            assert!(mutation_is_caught(m).unwrap(), "mutation {:?} slipped through", m);
        }
    }

    #[test]
    fn bound_is_enforced() {
        assert!(matches!(
            expand_as(7, &BTreeSet::new(), &[0; 7], None),
            Err(SymbolicError::BoundExceeded { .. })
        ));
    }
}
