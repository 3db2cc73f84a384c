//! Structure-constant tables, assembly of the operations on the
//! q-extended groups, and checkers for the boundary relation and the
//! associativity equations.
//!
//! Constants are scalars per chord tuple; bases of orientation lines are
//! implicitly trivialized, and all signs live in the conventions of
//! [`crate::sign`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::field::{FieldDescriptor, Scalar};
use crate::sign;

/// Where a chord sits relative to the dividing hypersurface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    Inside,
    Outside,
}

/// A generator record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chord {
    pub id: String,
    pub weight: u32,
    pub degree: i64,
    pub action: Option<BigRational>,
    pub object_from: Option<String>,
    pub object_to: Option<String>,
    pub winding: Option<i64>,
    pub location: Option<Location>,
}

impl Chord {
    pub fn new(id: &str, weight: u32, degree: i64) -> Self {
        Chord {
            id: id.into(),
            weight,
            degree,
            action: None,
            object_from: None,
            object_to: None,
            winding: None,
            location: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ChordTable {
    chords: BTreeMap<String, Chord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChordError {
    Duplicate(String),
    Unknown(String),
    ZeroWeight(String),
}

impl core::fmt::Display for ChordError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChordError::Duplicate(id) => write!(f, "duplicate chord id {}", id),
            ChordError::Unknown(id) => write!(f, "unknown chord id {}", id),
            ChordError::ZeroWeight(id) => write!(f, "chord {} has weight 0", id),
        }
    }
}

impl ChordTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, chord: Chord) -> Result<(), ChordError> {
        if chord.weight == 0 {
            return Err(ChordError::ZeroWeight(chord.id.clone()));
        }
        let id = chord.id.clone();
        if self.chords.insert(id.clone(), chord).is_some() {
            return Err(ChordError::Duplicate(id));
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&Chord, ChordError> {
        self.chords.get(id).ok_or_else(|| ChordError::Unknown(id.into()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Chord> {
        self.chords.values()
    }

    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    pub fn with_weight_and_degree(&self, weight: u32, degree: i64) -> Vec<&Chord> {
        self.chords
            .values()
            .filter(|c| c.weight == weight && c.degree == degree)
            .collect()
    }

    pub fn weights(&self) -> BTreeSet<u32> {
        self.chords.values().map(|c| c.weight).collect()
    }
}

/// Key of one structure constant. The flavour is kept as the raw sorted
/// label list so that invalid (repeated) labels survive until validation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Key {
    pub d: usize,
    pub flavour: Vec<usize>,
    pub weights: Vec<u32>,
    pub inputs: Vec<String>,
    pub output: String,
}

impl Key {
    pub fn flavour_set(&self) -> BTreeSet<usize> {
        self.flavour.iter().copied().collect()
    }

    pub fn describe(&self) -> String {
        format!(
            "d={} F={:?} w={:?} ({}; {})",
            self.d,
            self.flavour,
            self.weights,
            self.output,
            self.inputs.join(",")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownChord(String),
    KeyShape(String),
    WeightLaw { expected: u32, got: u32 },
    WeightMismatch { slot: usize, key: u32, chord: u32 },
    Rigidity { expected_deg0: i64, got: i64 },
    NonInjectiveFlavour,
    FlavourOutOfRange(usize),
    Composability { slot: usize },
    WindingConservation { expected: i64, got: i64 },
    FieldMismatch,
    OutputNotInside,
    CascadeFlavourTooLarge,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::UnknownChord(id) => write!(f, "unknown chord {}", id),
            Violation::KeyShape(m) => write!(f, "malformed key: {}", m),
            Violation::WeightLaw { expected, got } => {
                write!(f, "weight law: expected w^0={}, got {}", expected, got)
            }
            Violation::WeightMismatch { slot, key, chord } => write!(
                f,
                "weight of slot {} is {} but the chord has weight {}",
                slot, key, chord
            ),
            Violation::Rigidity { expected_deg0, got } => write!(
                f,
                "rigidity: output degree should be {}, got {}",
                expected_deg0, got
            ),
            Violation::NonInjectiveFlavour => write!(f, "repeated flavour label"),
            Violation::FlavourOutOfRange(k) => write!(f, "flavour label {} out of range", k),
            Violation::Composability { slot } => {
                write!(f, "objects do not compose at slot {}", slot)
            }
            Violation::WindingConservation { expected, got } => {
                write!(f, "winding: expected {}, got {}", expected, got)
            }
            Violation::FieldMismatch => write!(f, "scalar from the wrong field"),
            Violation::OutputNotInside => write!(f, "output chord must be inside"),
            Violation::CascadeFlavourTooLarge => {
                write!(f, "linear cascade constants vanish for more than one sprinkle")
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<(Key, Violation)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl core::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_valid() {
            return writeln!(f, "valid");
        }
        for (key, v) in &self.violations {
            writeln!(f, "{}: {}", key.describe(), v)?;
        }
        Ok(())
    }
}

/// Rigidity offset: operation constants live on virtual dimension zero,
/// cascade constants one lower.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Operations,
    Cascade,
}

#[derive(Clone, Debug)]
pub struct ConstantsTable {
    field: FieldDescriptor,
    entries: BTreeMap<Key, Scalar>,
}

impl ConstantsTable {
    pub fn new(field: FieldDescriptor) -> Self {
        ConstantsTable {
            field,
            entries: BTreeMap::new(),
        }
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn insert(&mut self, key: Key, value: Scalar) {
        if value.is_zero() {
            return;
        }
        self.entries.insert(key, value);
    }

    pub fn get(&self, key: &Key) -> Option<&Scalar> {
        self.entries.get(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Key, &Scalar)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn validate_key(
        kind: TableKind,
        chords: &ChordTable,
        key: &Key,
        value: &Scalar,
        field: FieldDescriptor,
        out: &mut Vec<(Key, Violation)>,
    ) {
        let push = |out: &mut Vec<(Key, Violation)>, v: Violation| out.push((key.clone(), v));
        if value.descriptor() != field {
            push(out, Violation::FieldMismatch);
        }
        if key.inputs.len() != key.d || key.weights.len() != key.d + 1 || key.d == 0 {
            push(
                out,
                Violation::KeyShape(format!(
                    "d={} with {} inputs and {} weights",
                    key.d,
                    key.inputs.len(),
                    key.weights.len()
                )),
            );
            return;
        }
        let mut labels = BTreeSet::new();
        for &k in &key.flavour {
            if k < 1 || k > key.d {
                push(out, Violation::FlavourOutOfRange(k));
            }
            if !labels.insert(k) {
                push(out, Violation::NonInjectiveFlavour);
            }
        }
        if kind == TableKind::Cascade && key.d == 1 && key.flavour.len() > 1 {
            push(out, Violation::CascadeFlavourTooLarge);
        }
        let expected_w0: u32 =
            key.weights[1..].iter().sum::<u32>() + key.flavour.len() as u32;
        if key.weights[0] != expected_w0 {
            push(
                out,
                Violation::WeightLaw {
                    expected: expected_w0,
                    got: key.weights[0],
                },
            );
        }
        let mut resolved: Vec<&Chord> = Vec::new();
        let mut missing = false;
        for (slot, id) in core::iter::once(&key.output).chain(key.inputs.iter()).enumerate() {
            match chords.get(id) {
                Ok(c) => {
                    if c.weight != key.weights[slot] {
                        push(
                            out,
                            Violation::WeightMismatch {
                                slot,
                                key: key.weights[slot],
                                chord: c.weight,
                            },
                        );
                    }
                    resolved.push(c);
                }
                Err(_) => {
                    push(out, Violation::UnknownChord(id.clone()));
                    missing = true;
                }
            }
        }
        if missing {
            return;
        }
        let offset = match kind {
            TableKind::Operations => 2,
            TableKind::Cascade => 1,
        };
        let expected_deg0: i64 = resolved[1..].iter().map(|c| c.degree).sum::<i64>() + offset
            - key.d as i64
            - key.flavour.len() as i64;
        if resolved[0].degree != expected_deg0 {
            push(
                out,
                Violation::Rigidity {
                    expected_deg0,
                    got: resolved[0].degree,
                },
            );
        }
        if kind == TableKind::Cascade {
            if resolved[0].location != Some(Location::Inside) {
                push(out, Violation::OutputNotInside);
            }
        }
        // Object labels compose head to tail when present.
        let labelled = resolved.iter().any(|c| c.object_from.is_some());
        if labelled {
            for slot in 1..key.d {
                if resolved[slot].object_to != resolved[slot + 1].object_from {
                    push(out, Violation::Composability { slot });
                }
            }
            if resolved[0].object_from != resolved[1].object_from
                || resolved[0].object_to != resolved[key.d].object_to
            {
                push(out, Violation::Composability { slot: 0 });
            }
        }
        if resolved.iter().all(|c| c.winding.is_some()) {
            let expected: i64 = resolved[1..].iter().map(|c| c.winding.unwrap()).sum();
            if resolved[0].winding.unwrap() != expected {
                push(
                    out,
                    Violation::WindingConservation {
                        expected,
                        got: resolved[0].winding.unwrap(),
                    },
                );
            }
        }
    }

    /// Lists every violated invariant with its key; valid iff empty.
    pub fn validate(&self, kind: TableKind, chords: &ChordTable) -> ValidationReport {
        let mut violations = Vec::new();
        for (key, value) in &self.entries {
            Self::validate_key(kind, chords, key, value, self.field, &mut violations);
        }
        ValidationReport { violations }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    InvalidTable(String),
    DimensionPrecondition { expected_deg0: i64, got: i64 },
    Chord(ChordError),
    TooManyTuples { requested: u64, cap: u64 },
}

impl From<ChordError> for EngineError {
    fn from(e: ChordError) -> Self {
        EngineError::Chord(e)
    }
}

impl core::fmt::Display for EngineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EngineError::InvalidTable(m) => write!(f, "invalid table: {}", m),
            EngineError::DimensionPrecondition { expected_deg0, got } => write!(
                f,
                "not a virtual-dimension-one configuration: output degree {} expected, got {}",
                expected_deg0, got
            ),
            EngineError::Chord(e) => write!(f, "{}", e),
            EngineError::TooManyTuples { requested, cap } => {
                write!(f, "{} basis tuples exceed the cap {}", requested, cap)
            }
        }
    }
}

/// A basis vector of the q-extended group: chord id plus q flag.
pub type QGen = (String, bool);

/// A finite linear combination of q-extended basis vectors.
pub type Element = BTreeMap<QGen, Scalar>;

pub(crate) fn element_add(acc: &mut Element, gen: QGen, value: Scalar) {
    crate::field::add_into(acc, gen, value)
}

/// Anything that evaluates like a multilinear family on q-extended basis
/// tuples given in slot order `x^1..x^d`.
pub trait OpFamily {
    fn apply(&self, inputs: &[(String, bool)]) -> Element;
}

/// The assembled operations of a validated constants table.
pub struct MuOps<'a> {
    table: &'a ConstantsTable,
    chords: &'a ChordTable,
    index: BTreeMap<(usize, Vec<usize>, Vec<String>), Vec<(String, Scalar)>>,
}

impl<'a> MuOps<'a> {
    pub fn new(table: &'a ConstantsTable, chords: &'a ChordTable) -> Result<Self, EngineError> {
        let report = table.validate(TableKind::Operations, chords);
        if !report.is_valid() {
            return Err(EngineError::InvalidTable(format!("{}", report)));
        }
        Ok(Self::new_unchecked(table, chords))
    }

    pub(crate) fn new_unchecked(table: &'a ConstantsTable, chords: &'a ChordTable) -> Self {
        let mut index: BTreeMap<(usize, Vec<usize>, Vec<String>), Vec<(String, Scalar)>> =
            BTreeMap::new();
        for (key, value) in table.entries() {
            index
                .entry((key.d, key.flavour.clone(), key.inputs.clone()))
                .or_default()
                .push((key.output.clone(), value.clone()));
        }
        MuOps { table, chords, index }
    }

    pub fn chords(&self) -> &ChordTable {
        self.chords
    }

    pub fn table(&self) -> &ConstantsTable {
        self.table
    }

    fn constants_for(&self, d: usize, flavour: &BTreeSet<usize>, inputs: &[String]) -> &[(String, Scalar)] {
        let key = (
            d,
            flavour.iter().copied().collect::<Vec<usize>>(),
            inputs.to_vec(),
        );
        self.index.get(&key).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

impl<'a> OpFamily for MuOps<'a> {
    /// Applies the degree `2 - d` operation to a q-extended basis tuple.
    ///
    /// The sprinkled summand carries the twisted constants; the q-valued
    /// summand is the unique extension commuting with the q-derivation on
    /// reduced degrees; at `d = 1` the identity-like term on the q part
    /// is added by hand.
    fn apply(&self, inputs: &[(String, bool)]) -> Element {
        let d = inputs.len();
        let mut out = Element::new();
        if d == 0 {
            return out;
        }
        let degs: Vec<i64> = inputs
            .iter()
            .map(|(id, _)| self.chords.get(id).map(|c| c.degree).unwrap_or(0))
            .collect();
        let eps: BTreeSet<usize> = (1..=d).filter(|&k| inputs[k - 1].1).collect();
        let chord_ids: Vec<String> = inputs.iter().map(|(id, _)| id.clone()).collect();

        // Sprinkled summand: all q's consumed.
        let twist = sign::sign_ad_hoc(d, &eps, &degs);
        for (output, value) in self.constants_for(d, &eps, &chord_ids) {
            element_add(&mut out, (output.clone(), false), value.signed(twist));
        }

        // q-valued summand: one q survives.
        for &k in &eps {
            let mut flavour = eps.clone();
            flavour.remove(&k);
            let sigma = sign::parity(
                ((k + 1)..=d)
                    .map(|j| degs[j - 1] - if eps.contains(&j) { 1 } else { 0 } - 1)
                    .sum(),
            );
            let twist = sigma ^ sign::sign_ad_hoc(d, &flavour, &degs);
            for (output, value) in self.constants_for(d, &flavour, &chord_ids) {
                element_add(&mut out, (output.clone(), true), value.signed(twist));
            }
        }

        // Hand term at d = 1.
        if d == 1 && inputs[0].1 {
            let field = self.table.field();
            element_add(
                &mut out,
                (inputs[0].0.clone(), false),
                field.one().signed(sign::parity(degs[0] + 1)),
            );
        }
        out
    }
}

/// Scalar residual of the boundary relation at one virtual-dimension-one
/// configuration: the signed sum over all admissible cuts and all
/// intermediate chords of the product of the two constants.
pub fn check_boundary_relation(
    table: &ConstantsTable,
    chords: &ChordTable,
    d: usize,
    flavour: &BTreeSet<usize>,
    weights: &[u32],
    output: &str,
    inputs: &[String],
) -> Result<Scalar, EngineError> {
    let degs: Vec<i64> = inputs
        .iter()
        .map(|id| chords.get(id).map(|c| c.degree))
        .collect::<Result<_, _>>()?;
    let deg0 = chords.get(output)?.degree;
    let expected = degs.iter().sum::<i64>() + 3 - d as i64 - flavour.len() as i64;
    if deg0 != expected {
        return Err(EngineError::DimensionPrecondition {
            expected_deg0: expected,
            got: deg0,
        });
    }
    let field = table.field();
    let mut total = field.zero();
    for cut in sign::enumerate_cuts(d, flavour) {
        let window = cut.i..=(cut.i + cut.d_minus - 1);
        let w_new: u32 = window.clone().map(|k| weights[k]).sum::<u32>()
            + cut.f_minus.len() as u32;
        let deg_new: i64 = window.clone().map(|k| degs[k - 1]).sum::<i64>() + 2
            - cut.d_minus as i64
            - cut.f_minus.len() as i64;
        let bit = sign::cut_sign(d, &cut, &degs);
        for x_new in chords.with_weight_and_degree(w_new, deg_new) {
            let inner = Key {
                d: cut.d_minus,
                flavour: cut.f_minus.iter().copied().collect(),
                weights: core::iter::once(w_new)
                    .chain(window.clone().map(|k| weights[k]))
                    .collect(),
                inputs: window.clone().map(|k| inputs[k - 1].clone()).collect(),
                output: x_new.id.clone(),
            };
            let Some(inner_value) = table.get(&inner) else { continue };
            let outer_inputs: Vec<String> = (1..=cut.d_plus)
                .map(|k| {
                    if k < cut.i {
                        inputs[k - 1].clone()
                    } else if k == cut.i {
                        x_new.id.clone()
                    } else {
                        inputs[k + cut.d_minus - 2].clone()
                    }
                })
                .collect();
            let outer_weights: Vec<u32> = core::iter::once(weights[0])
                .chain((1..=cut.d_plus).map(|k| {
                    if k < cut.i {
                        weights[k]
                    } else if k == cut.i {
                        w_new
                    } else {
                        weights[k + cut.d_minus - 1]
                    }
                }))
                .collect();
            let outer = Key {
                d: cut.d_plus,
                flavour: cut.f_plus.iter().copied().collect(),
                weights: outer_weights,
                inputs: outer_inputs,
                output: output.into(),
            };
            let Some(outer_value) = table.get(&outer) else { continue };
            total = total.add(&outer_value.mul(inner_value).signed(bit));
        }
    }
    Ok(total)
}

/// One nonzero residual of an equation check, with the tuple it was
/// evaluated at.
#[derive(Clone, Debug)]
pub struct ResidualWitness {
    pub inputs: Vec<QGen>,
    pub residual: Element,
}

#[derive(Clone, Debug, Default)]
pub struct ResidualReport {
    pub checked_tuples: u64,
    pub witnesses: Vec<ResidualWitness>,
}

impl ResidualReport {
    pub fn all_zero(&self) -> bool {
        self.witnesses.is_empty()
    }
}

fn describe_gen(g: &QGen) -> String {
    if g.1 {
        format!("q{}", g.0)
    } else {
        g.0.clone()
    }
}

pub fn describe_element(e: &Element) -> String {
    if e.is_empty() {
        return "0".into();
    }
    e.iter()
        .map(|(g, v)| format!("{}*{}", v.serialize(), describe_gen(g)))
        .collect::<Vec<_>>()
        .join(" + ")
}

impl core::fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.all_zero() {
            return writeln!(f, "all residuals zero over {} tuples", self.checked_tuples);
        }
        for w in &self.witnesses {
            writeln!(
                f,
                "({}) -> {}",
                w.inputs
                    .iter()
                    .map(describe_gen)
                    .collect::<Vec<_>>()
                    .join(", "),
                describe_element(&w.residual)
            )?;
        }
        Ok(())
    }
}

/// Left-hand side of the associativity equation evaluated on one tuple.
fn ainfty_residual(mu: &dyn OpFamily, chords: &ChordTable, tuple: &[QGen]) -> Element {
    let d = tuple.len();
    let mut residual = Element::new();
    let reduced: Vec<i64> = tuple
        .iter()
        .map(|(id, q)| {
            let deg = chords.get(id).map(|c| c.degree).unwrap_or(0);
            deg - i64::from(*q) - 1
        })
        .collect();
    for d_minus in 1..=d {
        for i in 1..=(d - d_minus + 1) {
            let prefix = sign::parity(reduced[..i - 1].iter().sum());
            let inner = mu.apply(&tuple[i - 1..i - 1 + d_minus]);
            for (gen, coeff) in inner {
                let mut outer_tuple: Vec<QGen> = Vec::with_capacity(d - d_minus + 1);
                outer_tuple.extend_from_slice(&tuple[..i - 1]);
                outer_tuple.push(gen);
                outer_tuple.extend_from_slice(&tuple[i - 1 + d_minus..]);
                let outer = mu.apply(&outer_tuple);
                for (out_gen, out_coeff) in outer {
                    element_add(
                        &mut residual,
                        out_gen,
                        out_coeff.mul(&coeff).signed(prefix),
                    );
                }
            }
        }
    }
    residual
}

/// Candidate chord tuples on which some composite can be nonzero: the
/// inputs of single keys and the splices of composable key pairs. Every
/// other tuple evaluates to zero termwise.
fn candidate_tuples(table: &ConstantsTable, max_d: usize) -> BTreeSet<Vec<String>> {
    let keys: Vec<&Key> = table.entries().map(|(k, _)| k).collect();
    let mut out = BTreeSet::new();
    for key in &keys {
        if key.d <= max_d {
            out.insert(key.inputs.clone());
        }
    }
    for inner in &keys {
        for outer in &keys {
            let d = outer.d + inner.d - 1;
            if d > max_d {
                continue;
            }
            for i in 1..=outer.d {
                if outer.inputs[i - 1] != inner.output {
                    continue;
                }
                let mut tuple = Vec::with_capacity(d);
                tuple.extend_from_slice(&outer.inputs[..i - 1]);
                tuple.extend_from_slice(&inner.inputs);
                tuple.extend_from_slice(&outer.inputs[i..]);
                out.insert(tuple);
            }
        }
    }
    out
}

/// Evaluates the associativity equations on every basis tuple that can
/// support a nonzero term, up to arity `max_d`, and reports nonzero
/// residuals with witnesses.
pub fn check_ainfty(mu: &MuOps<'_>, max_d: usize) -> ResidualReport {
    let mut report = ResidualReport::default();
    for chords in candidate_tuples(mu.table, max_d) {
        let d = chords.len();
        for mask in 0u32..(1 << d) {
            let tuple: Vec<QGen> = chords
                .iter()
                .enumerate()
                .map(|(j, id)| (id.clone(), mask >> j & 1 == 1))
                .collect();
            let residual = ainfty_residual(mu, mu.chords, &tuple);
            report.checked_tuples += 1;
            if !residual.is_empty() {
                report.witnesses.push(ResidualWitness {
                    inputs: tuple,
                    residual,
                });
            }
        }
    }
    report
}

fn compositions(d: usize) -> Vec<Vec<usize>> {
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
    rec(d, &mut Vec::new(), &mut out);
    out
}

/// Expands a multilinear family over a tuple of elements.
fn apply_to_elements(family: &dyn OpFamily, slots: &[Element], field: FieldDescriptor) -> Element {
    let mut picks: Vec<(Vec<QGen>, Scalar)> = vec![(Vec::new(), field.one())];
    for slot in slots {
        let mut next = Vec::new();
        for (prefix, coeff) in &picks {
            for (gen, v) in slot {
                let mut tuple = prefix.clone();
                tuple.push(gen.clone());
                next.push((tuple, coeff.mul(v)));
            }
        }
        picks = next;
    }
    let mut out = Element::new();
    for (tuple, coeff) in picks {
        if coeff.is_zero() {
            continue;
        }
        for (gen, v) in family.apply(&tuple) {
            element_add(&mut out, gen, v.mul(&coeff));
        }
    }
    out
}

/// Residual of the homomorphism equation on one source tuple: the
/// composite side minus the side feeding an inner operation into the
/// family.
pub fn homomorphism_residual(
    mu_source: &dyn OpFamily,
    mu_target: &dyn OpFamily,
    fmaps: &dyn OpFamily,
    source_chords: &ChordTable,
    field: FieldDescriptor,
    tuple: &[QGen],
) -> Element {
    let d = tuple.len();
    let mut residual = Element::new();
    // Composite side: split the tuple into consecutive segments, push
    // each through the family, combine with the target operation.
    for parts in compositions(d) {
        let mut slots: Vec<Element> = Vec::with_capacity(parts.len());
        let mut offset = 0;
        for &len in &parts {
            let seg = &tuple[offset..offset + len];
            slots.push(fmaps.apply(seg));
            offset += len;
        }
        let value = apply_to_elements(mu_target, &slots, field);
        for (gen, v) in value {
            element_add(&mut residual, gen, v);
        }
    }
    // Inner-operation side, subtracted.
    let reduced: Vec<i64> = tuple
        .iter()
        .map(|(id, q)| {
            let deg = source_chords.get(id).map(|c| c.degree).unwrap_or(0);
            deg - i64::from(*q) - 1
        })
        .collect();
    for d_minus in 1..=d {
        for i in 1..=(d - d_minus + 1) {
            let prefix = sign::parity(reduced[..i - 1].iter().sum());
            let inner = mu_source.apply(&tuple[i - 1..i - 1 + d_minus]);
            for (gen, coeff) in inner {
                let mut outer_tuple: Vec<QGen> = Vec::with_capacity(d - d_minus + 1);
                outer_tuple.extend_from_slice(&tuple[..i - 1]);
                outer_tuple.push(gen);
                outer_tuple.extend_from_slice(&tuple[i - 1 + d_minus..]);
                let outer = fmaps.apply(&outer_tuple);
                for (out_gen, out_coeff) in outer {
                    element_add(
                        &mut residual,
                        out_gen,
                        out_coeff.mul(&coeff).signed(!prefix),
                    );
                }
            }
        }
    }
    residual
}

/// Evaluates both sides of the homomorphism equation on every basis
/// tuple of the source up to `max_d`, reporting nonzero residuals.
pub fn check_homomorphism(
    mu_source: &dyn OpFamily,
    mu_target: &dyn OpFamily,
    fmaps: &dyn OpFamily,
    source_chords: &ChordTable,
    field: FieldDescriptor,
    max_d: usize,
    tuple_cap: u64,
) -> Result<ResidualReport, EngineError> {
    let basis: Vec<QGen> = source_chords
        .iter()
        .flat_map(|c| [(c.id.clone(), false), (c.id.clone(), true)])
        .collect();
    let mut total: u64 = 0;
    for d in 1..=max_d {
        total = total.saturating_add((basis.len() as u64).saturating_pow(d as u32));
    }
    if total > tuple_cap {
        return Err(EngineError::TooManyTuples {
            requested: total,
            cap: tuple_cap,
        });
    }
    let mut report = ResidualReport::default();
    if basis.is_empty() {
        return Ok(report);
    }
    for d in 1..=max_d {
        let mut idx = vec![0usize; d];
        loop {
            let tuple: Vec<QGen> = idx.iter().map(|&i| basis[i].clone()).collect();
            let residual =
                homomorphism_residual(mu_source, mu_target, fmaps, source_chords, field, &tuple);
            report.checked_tuples += 1;
            if !residual.is_empty() {
                report.witnesses.push(ResidualWitness {
                    inputs: tuple,
                    residual,
                });
            }
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < basis.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> FieldDescriptor {
        FieldDescriptor::Rationals
    }

    fn key(d: usize, f: &[usize], w: &[u32], inputs: &[&str], output: &str) -> Key {
        Key {
            d,
            flavour: f.to_vec(),
            weights: w.to_vec(),
            inputs: inputs.iter().map(|s| (*s).into()).collect(),
            output: output.into(),
        }
    }

    fn delta_chords() -> ChordTable {
        let mut chords = ChordTable::new();
        chords.insert(Chord::new("a", 1, 0)).unwrap();
        chords.insert(Chord::new("b", 1, 1)).unwrap();
        chords
    }

    #[test]
    fn empty_table_is_valid_and_gives_bare_differential() {
        let chords = delta_chords();
        let table = ConstantsTable::new(field());
        assert!(table.validate(TableKind::Operations, &chords).is_valid());
        let mu = MuOps::new(&table, &chords).unwrap();
        assert!(mu.apply(&[("a".into(), false)]).is_empty());
        // mu^1(q a) = (-1)^{deg a + 1} a.
        let out = mu.apply(&[("a".into(), true)]);
        assert_eq!(out.get(&("a".into(), false)), Some(&field().from_integer(-1)));
        // Higher operations vanish.
        assert!(mu
            .apply(&[("a".into(), false), ("b".into(), false)])
            .is_empty());
        assert!(check_ainfty(&mu, 4).all_zero());
    }

    #[test]
    fn weight_law_violation_detected() {
        let mut chords = ChordTable::new();
        chords.insert(Chord::new("x", 3, 0)).unwrap();
        chords.insert(Chord::new("y", 1, 0)).unwrap();
        chords.insert(Chord::new("z", 1, 0)).unwrap();
        let mut table = ConstantsTable::new(field());
        table.insert(
            key(2, &[], &[3, 1, 1], &["y", "z"], "x"),
            field().one(),
        );
        let report = table.validate(TableKind::Operations, &chords);
        assert!(report
            .violations
            .iter()
            .any(|(_, v)| matches!(v, Violation::WeightLaw { expected: 2, got: 3 })));
    }

    #[test]
    fn duplicate_flavour_forbidden() {
        let mut chords = ChordTable::new();
        chords.insert(Chord::new("x", 4, -2)).unwrap();
        chords.insert(Chord::new("y", 1, 0)).unwrap();
        chords.insert(Chord::new("z", 1, 0)).unwrap();
        let mut table = ConstantsTable::new(field());
        table.insert(
            key(2, &[1, 1], &[4, 1, 1], &["y", "z"], "x"),
            field().one(),
        );
        let report = table.validate(TableKind::Operations, &chords);
        assert!(report
            .violations
            .iter()
            .any(|(_, v)| matches!(v, Violation::NonInjectiveFlavour)));
    }

    #[test]
    fn mu1_matches_wrapped_differential() {
        // delta(a) = b with one constant; mu^1(a) = (-1)^{deg a} b.
        let chords = delta_chords();
        let mut table = ConstantsTable::new(field());
        table.insert(key(1, &[], &[1, 1], &["a"], "b"), field().one());
        let mu = MuOps::new(&table, &chords).unwrap();
        let out = mu.apply(&[("a".into(), false)]);
        assert_eq!(out.get(&("b".into(), false)), Some(&field().one()));
        // On the q part: q delta + kappa - id, here kappa = 0.
        let out = mu.apply(&[("a".into(), true)]);
        assert_eq!(out.get(&("b".into(), true)), Some(&field().one()));
        assert_eq!(out.get(&("a".into(), false)), Some(&field().from_integer(-1)));
    }

    #[test]
    fn delta_squared_detected_by_ainfty() {
        // Over F_2: delta(a) = b, delta(b) = c gives mu^1 mu^1 != 0.
        let f2 = FieldDescriptor::Prime(2);
        let mut chords = ChordTable::new();
        chords.insert(Chord::new("a", 1, 0)).unwrap();
        chords.insert(Chord::new("b", 1, 1)).unwrap();
        chords.insert(Chord::new("c", 1, 2)).unwrap();
        let mut table = ConstantsTable::new(f2);
        table.insert(key(1, &[], &[1, 1], &["a"], "b"), f2.one());
        table.insert(key(1, &[], &[1, 1], &["b"], "c"), f2.one());
        let mu = MuOps::new(&table, &chords).unwrap();
        let report = check_ainfty(&mu, 2);
        assert!(!report.all_zero());
        assert!(report
            .witnesses
            .iter()
            .any(|w| w.inputs == vec![("a".into(), false)]));
    }

    #[test]
    fn boundary_relation_zero_table() {
        let chords = delta_chords();
        let table = ConstantsTable::new(field());
        let res = check_boundary_relation(
            &table,
            &chords,
            1,
            &BTreeSet::new(),
            &[1, 1],
            "b",
            &["a".into()],
        );
        // deg b = 1 != deg a + 2: dimension precondition.
        assert!(matches!(res, Err(EngineError::DimensionPrecondition { .. })));

        let mut chords = ChordTable::new();
        chords.insert(Chord::new("a", 1, 0)).unwrap();
        chords.insert(Chord::new("top", 1, 2)).unwrap();
        let res = check_boundary_relation(
            &table,
            &chords,
            1,
            &BTreeSet::new(),
            &[1, 1],
            "top",
            &["a".into()],
        )
        .unwrap();
        assert!(res.is_zero());
    }

    #[test]
    fn boundary_relation_d1_sprinkled_matches_chain_map_defect() {
        // kappa delta - delta kappa as the d=1 relation with one sprinkle.
        let f = field();
        let mut chords = ChordTable::new();
        chords.insert(Chord::new("a1", 1, 0)).unwrap();
        chords.insert(Chord::new("b1", 1, 1)).unwrap();
        chords.insert(Chord::new("a2", 2, 0)).unwrap();
        chords.insert(Chord::new("b2", 2, 1)).unwrap();
        let mut table = ConstantsTable::new(f);
        // delta_1(a1) = 2 b1, delta_2(a2) = 5 b2, kappa(a1) = 3 a2, kappa(b1) = 7 b2.
        table.insert(key(1, &[], &[1, 1], &["a1"], "b1"), f.from_integer(2));
        table.insert(key(1, &[], &[2, 2], &["a2"], "b2"), f.from_integer(5));
        table.insert(key(1, &[1], &[2, 1], &["a1"], "a2"), f.from_integer(3));
        table.insert(key(1, &[1], &[2, 1], &["b1"], "b2"), f.from_integer(7));
        let flavour: BTreeSet<usize> = [1].into_iter().collect();
        let res = check_boundary_relation(
            &table,
            &chords,
            1,
            &flavour,
            &[2, 1],
            "b2",
            &["a1".into()],
        )
        .unwrap();
        // kappa(delta(a1)) - delta(kappa(a1)) = 2*7 - 3*5 = -1.
        assert_eq!(res, f.from_integer(-1));
    }
}
