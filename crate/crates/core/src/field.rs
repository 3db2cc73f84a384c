//! Exact coefficient fields, graded modules with distinguished bases,
//! sparse linear maps, and homology of finite complexes.
//!
//! All arithmetic is exact: rationals are arbitrary precision, prime
//! fields are reduced residues. No floating point appears anywhere.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Which coefficient field scalars live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldDescriptor {
    Rationals,
    /// Prime field of the given characteristic, `p < 2^31`.
    Prime(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    NotPrime(u32),
    CharacteristicTooLarge(u32),
    MixedFields,
    DivisionByZero,
    ParseScalar(String),
}

impl core::fmt::Display for FieldError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "{} is not prime", p),
            FieldError::CharacteristicTooLarge(p) => write!(f, "characteristic {} exceeds 2^31", p),
            FieldError::MixedFields => write!(f, "scalars from different fields"),
            FieldError::DivisionByZero => write!(f, "division by zero"),
            FieldError::ParseScalar(s) => write!(f, "cannot parse scalar {:?}", s),
        }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    let n = n as u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

impl FieldDescriptor {
    pub fn validate(self) -> Result<(), FieldError> {
        match self {
            FieldDescriptor::Rationals => Ok(()),
            FieldDescriptor::Prime(p) => {
                if p >= 1 << 31 {
                    Err(FieldError::CharacteristicTooLarge(p))
                } else if !is_prime(p) {
                    Err(FieldError::NotPrime(p))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn zero(self) -> Scalar {
        self.from_integer(0)
    }

    pub fn one(self) -> Scalar {
        self.from_integer(1)
    }

    pub fn from_integer(self, n: i64) -> Scalar {
        match self {
            FieldDescriptor::Rationals => Scalar::Rational(BigRational::from(BigInt::from(n))),
            FieldDescriptor::Prime(p) => Scalar::Prime {
                p,
                value: n.rem_euclid(p as i64) as u32,
            },
        }
    }

    /// Parses `"a"`, `"a/b"` or `"a mod p"` (the `p` must match).
    pub fn parse_scalar(self, s: &str) -> Result<Scalar, FieldError> {
        let s = s.trim();
        let bad = || FieldError::ParseScalar(s.to_owned());
        if let Some((lhs, rhs)) = s.split_once(" mod ") {
            let p: u32 = rhs.trim().parse().map_err(|_| bad())?;
            if self != FieldDescriptor::Prime(p) {
                return Err(FieldError::MixedFields);
            }
            let a: i64 = lhs.trim().parse().map_err(|_| bad())?;
            return Ok(self.from_integer(a));
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let n: BigInt = num.parse().map_err(|_| bad())?;
        let d: BigInt = match den {
            Some(d) => d.parse().map_err(|_| bad())?,
            None => BigInt::one(),
        };
        if d.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        match self {
            FieldDescriptor::Rationals => Ok(Scalar::Rational(BigRational::new(n, d))),
            FieldDescriptor::Prime(p) => {
                let pb = BigInt::from(p);
                let reduce = |x: &BigInt| -> i64 {
                    let r = x % &pb;
                    let r = if r.is_negative() { r + &pb } else { r };
                    i64::try_from(&r).unwrap()
                };
                let nv = self.from_integer(reduce(&n));
                let dv = self.from_integer(reduce(&d));
                nv.div(&dv)
            }
        }
    }
}

/// An exact field element. Mixing fields in arithmetic is a caller bug
/// and panics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scalar {
    Rational(BigRational),
    Prime { p: u32, value: u32 },
}

impl Scalar {
    pub fn descriptor(&self) -> FieldDescriptor {
        match self {
            Scalar::Rational(_) => FieldDescriptor::Rationals,
            Scalar::Prime { p, .. } => FieldDescriptor::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Prime { p, value: a }, Scalar::Prime { p: q, value: b }) if p == q => {
                Scalar::Prime {
                    p: *p,
                    value: (((*a as u64) + (*b as u64)) % (*p as u64)) as u32,
                }
            }
            _ => panic!("scalar arithmetic across fields"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Prime { p, value: a }, Scalar::Prime { p: q, value: b }) if p == q => {
                Scalar::Prime {
                    p: *p,
                    value: (((*a as u64) * (*b as u64)) % (*p as u64)) as u32,
                }
            }
            _ => panic!("scalar arithmetic across fields"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Prime { p, value } => Scalar::Prime {
                p: *p,
                value: if *value == 0 { 0 } else { p - value },
            },
        }
    }

    pub fn inverse(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        match self {
            Scalar::Rational(a) => Ok(Scalar::Rational(a.recip())),
            Scalar::Prime { p, value } => {
                // Fermat: value^(p-2) mod p.
                let mut base = *value as u64;
                let mut exp = (*p as u64) - 2;
                let m = *p as u64;
                let mut acc = 1u64;
                while exp > 0 {
                    if exp & 1 == 1 {
                        acc = acc * base % m;
                    }
                    base = base * base % m;
                    exp >>= 1;
                }
                Ok(Scalar::Prime {
                    p: *p,
                    value: acc as u32,
                })
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Multiplies by `(-1)^bit`.
    pub fn signed(&self, bit: bool) -> Scalar {
        if bit {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Decimal serialization: `"a"`, `"a/b"`, or `"a mod p"`.
    pub fn serialize(&self) -> String {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    format!("{}", r.numer())
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Prime { p, value } => format!("{} mod {}", value, p),
        }
    }
}

impl core::fmt::Display for Scalar {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// A graded module with a distinguished, uniquely named basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedModule<G: Ord + Clone> {
    field: FieldDescriptor,
    basis: Vec<(G, i64)>,
    degree: BTreeMap<G, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleError<G> {
    DuplicateGenerator(G),
    UnknownGenerator(G),
    DegreeMismatch { target: G, source: G, shift: i64 },
    ShiftMismatch { left: i64, right: i64 },
    NotADifferential { witness: G },
}

impl<G: Ord + Clone + core::fmt::Debug> core::fmt::Display for ModuleError<G> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModuleError::DuplicateGenerator(g) => write!(f, "duplicate generator {:?}", g),
            ModuleError::UnknownGenerator(g) => write!(f, "unknown generator {:?}", g),
            ModuleError::DegreeMismatch { target, source, shift } => write!(
                f,
                "entry ({:?}, {:?}) violates degree shift {}",
                target, source, shift
            ),
            ModuleError::ShiftMismatch { left, right } => {
                write!(f, "composed maps with shifts {} and {}", left, right)
            }
            ModuleError::NotADifferential { witness } => {
                write!(f, "d\u{b2} != 0 on generator {:?}", witness)
            }
        }
    }
}

impl<G: Ord + Clone> GradedModule<G> {
    pub fn new(field: FieldDescriptor, basis: Vec<(G, i64)>) -> Result<Self, ModuleError<G>> {
        let mut degree = BTreeMap::new();
        for (g, deg) in &basis {
            if degree.insert(g.clone(), *deg).is_some() {
                return Err(ModuleError::DuplicateGenerator(g.clone()));
            }
        }
        Ok(GradedModule { field, basis, degree })
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn basis(&self) -> &[(G, i64)] {
        &self.basis
    }

    pub fn degree_of(&self, g: &G) -> Option<i64> {
        self.degree.get(g).copied()
    }

    pub fn dims_by_degree(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for (_, deg) in &self.basis {
            *out.entry(*deg).or_insert(0) += 1;
        }
        out
    }
}

/// A degree-homogeneous linear map stored sparsely. Keys are
/// `(target generator, source generator)`; only nonzero entries are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMap<G: Ord + Clone> {
    shift: i64,
    entries: BTreeMap<(G, G), Scalar>,
}

impl<G: Ord + Clone> SparseMap<G> {
    pub fn new(shift: i64) -> Self {
        SparseMap {
            shift,
            entries: BTreeMap::new(),
        }
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(G, G), &Scalar)> {
        self.entries.iter()
    }

    pub fn is_zero_map(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add_entry(&mut self, target: G, source: G, value: Scalar) {
        if value.is_zero() {
            return;
        }
        match self.entries.entry((target, source)) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&value);
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn entry(&self, target: &G, source: &G) -> Option<&Scalar> {
        self.entries.get(&(target.clone(), source.clone()))
    }

    /// Checks that every referenced id exists and every entry respects the
    /// degree shift.
    pub fn validate(
        &self,
        target_module: &GradedModule<G>,
        source_module: &GradedModule<G>,
    ) -> Result<(), ModuleError<G>> {
        for ((t, s), _) in &self.entries {
            let td = target_module
                .degree_of(t)
                .ok_or_else(|| ModuleError::UnknownGenerator(t.clone()))?;
            let sd = source_module
                .degree_of(s)
                .ok_or_else(|| ModuleError::UnknownGenerator(s.clone()))?;
            if td - sd != self.shift {
                return Err(ModuleError::DegreeMismatch {
                    target: t.clone(),
                    source: s.clone(),
                    shift: self.shift,
                });
            }
        }
        Ok(())
    }

    /// Matrix product `self . other`; shifts add.
    pub fn compose(&self, other: &SparseMap<G>) -> SparseMap<G> {
        let mut by_source: BTreeMap<&G, Vec<(&G, &Scalar)>> = BTreeMap::new();
        for ((t, s), v) in &self.entries {
            by_source.entry(s).or_default().push((t, v));
        }
        let mut out = SparseMap::new(self.shift + other.shift);
        for ((mid, s), v) in &other.entries {
            if let Some(rows) = by_source.get(mid) {
                for (t, w) in rows {
                    out.add_entry((*t).clone(), s.clone(), w.mul(v));
                }
            }
        }
        out
    }

    /// Applies the map to a vector given in basis coordinates.
    pub fn apply(&self, vector: &BTreeMap<G, Scalar>) -> BTreeMap<G, Scalar> {
        let mut out: BTreeMap<G, Scalar> = BTreeMap::new();
        for ((t, s), v) in &self.entries {
            if let Some(c) = vector.get(s) {
                let term = v.mul(c);
                add_into(&mut out, t.clone(), term);
            }
        }
        out
    }
}

pub(crate) fn add_into<G: Ord>(acc: &mut BTreeMap<G, Scalar>, key: G, value: Scalar) {
    if value.is_zero() {
        return;
    }
    match acc.entry(key) {
        alloc::collections::btree_map::Entry::Vacant(e) => {
            e.insert(value);
        }
        alloc::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get().add(&value);
            if sum.is_zero() {
                e.remove();
            } else {
                e.insert(sum);
            }
        }
    }
}

/// Rank of a dense matrix by Gaussian elimination with deterministic
/// pivoting (first nonzero in id order).
fn rank(mut rows: Vec<Vec<Scalar>>, field: FieldDescriptor) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..ncols {
        let pivot = (row..nrows).find(|&r| !rows[r][col].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(row, p);
        let inv = rows[row][col].inverse().expect("nonzero pivot");
        for c in col..ncols {
            rows[row][c] = rows[row][c].mul(&inv);
        }
        for r in 0..nrows {
            if r != row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..ncols {
                    let delta = rows[row][c].mul(&factor);
                    rows[r][c] = rows[r][c].sub(&delta);
                }
            }
        }
        row += 1;
        rank += 1;
        if row == nrows {
            break;
        }
    }
    let _ = field;
    rank
}

/// Betti numbers per degree of `(module, d)`, where `d` is a differential
/// of homogeneous degree `d.shift()`.
///
/// `d . d = 0` is verified first; a violation is reported with a witness
/// source generator.
pub fn homology<G: Ord + Clone>(
    d: &SparseMap<G>,
    module: &GradedModule<G>,
) -> Result<BTreeMap<i64, usize>, ModuleError<G>> {
    d.validate(module, module)?;
    let dd = d.compose(d);
    if let Some(((_, s), _)) = dd.entries().next() {
        return Err(ModuleError::NotADifferential { witness: s.clone() });
    }

    // Generators per degree, in id order.
    let mut by_degree: BTreeMap<i64, Vec<G>> = BTreeMap::new();
    for (g, deg) in module.basis() {
        by_degree.entry(*deg).or_default().push(g.clone());
    }
    for gens in by_degree.values_mut() {
        gens.sort();
    }

    let field = module.field();
    let shift = d.shift();
    let mut rank_from: BTreeMap<i64, usize> = BTreeMap::new();
    for (deg, sources) in &by_degree {
        let Some(targets) = by_degree.get(&(deg + shift)) else {
            rank_from.insert(*deg, 0);
            continue;
        };
        let col_index: BTreeMap<&G, usize> =
            sources.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let row_index: BTreeMap<&G, usize> =
            targets.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut rows = alloc::vec![alloc::vec![field.zero(); sources.len()]; targets.len()];
        for ((t, s), v) in d.entries() {
            if let (Some(&r), Some(&c)) = (row_index.get(t), col_index.get(s)) {
                rows[r][c] = v.clone();
            }
        }
        rank_from.insert(*deg, rank(rows, field));
    }

    let mut betti = BTreeMap::new();
    for (deg, gens) in &by_degree {
        let out_rank = rank_from.get(deg).copied().unwrap_or(0);
        let in_rank = rank_from.get(&(deg - shift)).copied().unwrap_or(0);
        betti.insert(*deg, gens.len() - out_rank - in_rank);
    }
    Ok(betti)
}

/// Kernel dimension minus image dimension bookkeeping used by tests:
/// rank plus nullity must equal the domain dimension.
pub fn rank_of<G: Ord + Clone>(
    map: &SparseMap<G>,
    target_module: &GradedModule<G>,
    source_module: &GradedModule<G>,
) -> Result<BTreeMap<i64, usize>, ModuleError<G>> {
    map.validate(target_module, source_module)?;
    let mut sources: BTreeMap<i64, Vec<G>> = BTreeMap::new();
    for (g, deg) in source_module.basis() {
        sources.entry(*deg).or_default().push(g.clone());
    }
    let mut targets: BTreeMap<i64, BTreeSet<G>> = BTreeMap::new();
    for (g, deg) in target_module.basis() {
        targets.entry(*deg).or_default().insert(g.clone());
    }
    let field = source_module.field();
    let mut out = BTreeMap::new();
    for (deg, cols) in &sources {
        let mut cols = cols.clone();
        cols.sort();
        let Some(rows_set) = targets.get(&(deg + map.shift())) else {
            out.insert(*deg, 0);
            continue;
        };
        let rows_list: Vec<&G> = rows_set.iter().collect();
        let row_index: BTreeMap<&G, usize> =
            rows_list.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let col_index: BTreeMap<&G, usize> =
            cols.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut rows = alloc::vec![alloc::vec![field.zero(); cols.len()]; rows_list.len()];
        for ((t, s), v) in map.entries() {
            if let (Some(&r), Some(&c)) = (row_index.get(t), col_index.get(s)) {
                rows[r][c] = v.clone();
            }
        }
        out.insert(*deg, rank(rows, field));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    #[test]
    fn scalar_round_trip() {
        let f = FieldDescriptor::Rationals;
        assert_eq!(f.parse_scalar("3/4").unwrap(), q(3, 4));
        assert_eq!(q(-6, 8).serialize(), "-3/4");
        assert_eq!(f.parse_scalar("5").unwrap().serialize(), "5");
        let f5 = FieldDescriptor::Prime(5);
        let s = f5.parse_scalar("7 mod 5").unwrap();
        assert_eq!(s, Scalar::Prime { p: 5, value: 2 });
        assert_eq!(s.serialize(), "2 mod 5");
        assert_eq!(
            f5.parse_scalar("1/2").unwrap(),
            Scalar::Prime { p: 5, value: 3 }
        );
    }

    #[test]
    fn prime_field_inverse() {
        let f = FieldDescriptor::Prime(7);
        for v in 1..7 {
            let s = f.from_integer(v);
            assert_eq!(s.mul(&s.inverse().unwrap()), f.one());
        }
        assert!(FieldDescriptor::Prime(6).validate().is_err());
        assert!(FieldDescriptor::Prime(2147483647).validate().is_ok());
    }

    #[test]
    fn compose_identity_and_zero() {
        let field = FieldDescriptor::Prime(5);
        let mut id = SparseMap::new(0);
        id.add_entry("a", "a", field.one());
        id.add_entry("b", "b", field.one());
        let mut f = SparseMap::new(1);
        f.add_entry("b", "a", field.from_integer(3));
        assert_eq!(id.compose(&f), f);
        let zero: SparseMap<&str> = SparseMap::new(2);
        assert!(zero.compose(&f).is_zero_map());
    }

    #[test]
    fn compose_two_by_two_over_f5() {
        // f = [[1,2],[3,4]], g = [[2,0],[1,1]] over F_5 (target,source) indexing;
        // f.g = [[4,2],[0,4]] computed by hand.
        let field = FieldDescriptor::Prime(5);
        let mut f = SparseMap::new(0);
        f.add_entry("x", "x", field.from_integer(1));
        f.add_entry("x", "y", field.from_integer(2));
        f.add_entry("y", "x", field.from_integer(3));
        f.add_entry("y", "y", field.from_integer(4));
        let mut g = SparseMap::new(0);
        g.add_entry("x", "x", field.from_integer(2));
        g.add_entry("y", "x", field.from_integer(1));
        g.add_entry("y", "y", field.from_integer(1));
        let fg = f.compose(&g);
        assert_eq!(fg.entry(&"x", &"x"), Some(&field.from_integer(4)));
        assert_eq!(fg.entry(&"x", &"y"), Some(&field.from_integer(2)));
        assert_eq!(fg.entry(&"y", &"x"), None); // 3*2 + 4*1 = 10 = 0
        assert_eq!(fg.entry(&"y", &"y"), Some(&field.from_integer(4)));
    }

    #[test]
    fn homology_zero_differential_is_dimension() {
        let field = FieldDescriptor::Rationals;
        let m = GradedModule::new(field, alloc::vec![("a", 0), ("b", 0), ("c", 1)]).unwrap();
        let d = SparseMap::new(1);
        let h = homology(&d, &m).unwrap();
        assert_eq!(h.get(&0), Some(&2));
        assert_eq!(h.get(&1), Some(&1));
    }

    #[test]
    fn homology_identity_arrow_is_acyclic() {
        let field = FieldDescriptor::Rationals;
        let m = GradedModule::new(field, alloc::vec![("a", 0), ("b", 1)]).unwrap();
        let mut d = SparseMap::new(1);
        d.add_entry("b", "a", field.one());
        let h = homology(&d, &m).unwrap();
        assert!(h.values().all(|&b| b == 0));
    }

    #[test]
    fn homology_rejects_non_differential() {
        let field = FieldDescriptor::Rationals;
        let m =
            GradedModule::new(field, alloc::vec![("a", 0), ("b", 1), ("c", 2)]).unwrap();
        let mut d = SparseMap::new(1);
        d.add_entry("b", "a", field.one());
        d.add_entry("c", "b", field.one());
        match homology(&d, &m) {
            Err(ModuleError::NotADifferential { witness }) => assert_eq!(witness, "a"),
            other => panic!("expected d^2 violation, got {:?}", other),
        }
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        // Two copies of a rank-2 space joined by the identity.
        let field = FieldDescriptor::Prime(2);
        let m = GradedModule::new(
            field,
            alloc::vec![("a0", 0), ("a1", 1), ("qa0", -1), ("qa1", 0)],
        )
        .unwrap();
        let mut d = SparseMap::new(1);
        d.add_entry("a0", "qa0", field.one());
        d.add_entry("a1", "qa1", field.one());
        let h = homology(&d, &m).unwrap();
        assert!(h.values().all(|&b| b == 0), "{:?}", h);
    }

    #[test]
    fn rank_nullity() {
        let field = FieldDescriptor::Rationals;
        let src = GradedModule::new(field, alloc::vec![("s1", 0), ("s2", 0), ("s3", 0)]).unwrap();
        let tgt = GradedModule::new(field, alloc::vec![("t1", 0), ("t2", 0)]).unwrap();
        let mut f = SparseMap::new(0);
        f.add_entry("t1", "s1", field.one());
        f.add_entry("t2", "s1", field.one());
        f.add_entry("t1", "s2", field.from_integer(2));
        f.add_entry("t2", "s2", field.from_integer(2));
        let r = rank_of(&f, &tgt, &src).unwrap();
        assert_eq!(r.get(&0), Some(&1));
    }
}
