//! Action arithmetic for the restriction layer: feasibility filters, the
//! rescaling thresholds, cascade structure constants, assembly of the
//! restriction maps, and the matrix-algebra obstruction to a naive
//! restriction on the annulus.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ainfty::{
    element_add, ChordError, ChordTable, ConstantsTable, Element, EngineError, Key, Location,
    OpFamily, TableKind, ValidationReport,
};
use crate::field::Scalar;
use crate::sign;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionError {
    MissingAction(String),
    RhoOutOfRange,
    Chord(ChordError),
    NoValidThreshold { max_weight: u32 },
    OutputNotInside(String),
    WeightLaw { expected: u32, got: u32 },
}

impl From<ChordError> for ActionError {
    fn from(e: ChordError) -> Self {
        ActionError::Chord(e)
    }
}

impl core::fmt::Display for ActionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ActionError::MissingAction(id) => write!(f, "chord {} has no action", id),
            ActionError::RhoOutOfRange => write!(f, "rho must lie in (0, 1]"),
            ActionError::Chord(e) => write!(f, "{}", e),
            ActionError::NoValidThreshold { max_weight } => write!(
                f,
                "no weight threshold within the data (weights up to {})",
                max_weight
            ),
            ActionError::OutputNotInside(id) => write!(f, "chord {} is not inside", id),
            ActionError::WeightLaw { expected, got } => {
                write!(f, "weight law violated: expected {}, got {}", expected, got)
            }
        }
    }
}

/// Per-chord actions and locations. Outside chords must carry actions.
#[derive(Clone, Debug, Default)]
pub struct ActionProfile {
    actions: BTreeMap<String, BigRational>,
    locations: BTreeMap<String, Location>,
    weights: BTreeMap<String, u32>,
}

impl ActionProfile {
    pub fn from_chords(chords: &ChordTable) -> Result<Self, ActionError> {
        let mut profile = ActionProfile::default();
        for c in chords.iter() {
            let loc = c.location.unwrap_or(Location::Inside);
            if let Some(a) = &c.action {
                profile.actions.insert(c.id.clone(), a.clone());
            } else if loc == Location::Outside {
                return Err(ActionError::MissingAction(c.id.clone()));
            }
            profile.locations.insert(c.id.clone(), loc);
            profile.weights.insert(c.id.clone(), c.weight);
        }
        Ok(profile)
    }

    pub fn action(&self, id: &str) -> Result<&BigRational, ActionError> {
        self.actions
            .get(id)
            .ok_or_else(|| ActionError::MissingAction(id.into()))
    }

    pub fn location(&self, id: &str) -> Location {
        self.locations.get(id).copied().unwrap_or(Location::Inside)
    }

    pub fn chord_ids(&self) -> impl Iterator<Item = &String> {
        self.locations.keys()
    }

    fn weight(&self, id: &str) -> Option<u32> {
        self.weights.get(id).copied()
    }
}

/// Topological energy of a configuration, as the action difference
/// between the output and the inputs.
pub fn e_top(
    profile: &ActionProfile,
    output: &str,
    inputs: &[String],
) -> Result<BigRational, ActionError> {
    let mut total = profile.action(output)?.clone();
    for id in inputs {
        total -= profile.action(id)?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// Negative topological energy: the configuration is empty.
    Infeasible,
    Feasible,
    /// Zero topological energy: only configurations with no geometric
    /// energy can appear.
    TrivialOnly,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, Feasibility::Infeasible)
    }
}

/// Necessary condition for a nonempty configuration: nonnegative
/// topological energy.
pub fn feasible(
    profile: &ActionProfile,
    output: &str,
    inputs: &[String],
) -> Result<Feasibility, ActionError> {
    let e = e_top(profile, output, inputs)?;
    Ok(if e.is_negative() {
        Feasibility::Infeasible
    } else if e.is_zero() {
        Feasibility::TrivialOnly
    } else {
        Feasibility::Feasible
    })
}

/// Rescaling multiplies inside actions by `rho` and leaves outside
/// actions unchanged.
pub fn rescale_action(profile: &ActionProfile, rho: &BigRational) -> Result<ActionProfile, ActionError> {
    if !rho.is_positive() || rho > &BigRational::one() {
        return Err(ActionError::RhoOutOfRange);
    }
    let mut out = profile.clone();
    for (id, a) in out.actions.iter_mut() {
        if profile.locations.get(id) == Some(&Location::Inside) {
            *a = &*a * rho;
        }
    }
    Ok(out)
}

/// Smallest weight bound above which every outside chord in the data has
/// positive action.
pub fn nu_threshold(profile: &ActionProfile) -> Result<u32, ActionError> {
    let mut worst: Option<u32> = None;
    let mut max_weight = 1;
    for (id, loc) in &profile.locations {
        let w = profile.weight(id).unwrap_or(1);
        max_weight = max_weight.max(w);
        if *loc == Location::Outside && !profile.action(id)?.is_positive() {
            worst = Some(worst.map_or(w, |b: u32| b.max(w)));
        }
    }
    match worst {
        None => Ok(1),
        Some(w) if w < max_weight => Ok(w + 1),
        Some(_) => Err(ActionError::NoValidThreshold { max_weight }),
    }
}

/// Largest rescaling bound below which every input tuple containing an
/// outside chord has negative rescaled topological energy, so all such
/// configurations are forced empty. Computed from the finite chord data.
pub fn rho_threshold(
    profile: &ActionProfile,
    d: usize,
    sprinkles: usize,
    weights: &[u32],
    output: &str,
) -> Result<BigRational, ActionError> {
    if profile.location(output) != Location::Inside {
        return Err(ActionError::OutputNotInside(output.into()));
    }
    let expected: u32 = weights[1..].iter().sum::<u32>() + sprinkles as u32;
    if weights.first() != Some(&expected) {
        return Err(ActionError::WeightLaw {
            expected,
            got: weights.first().copied().unwrap_or(0),
        });
    }
    if weights.len() != d + 1 {
        return Err(ActionError::WeightLaw {
            expected: d as u32 + 1,
            got: weights.len() as u32,
        });
    }
    let nu = nu_threshold(profile)?;
    if weights.iter().any(|&w| w < nu) {
        return Err(ActionError::NoValidThreshold {
            max_weight: *weights.iter().max().unwrap(),
        });
    }
    let a0 = profile.action(output)?.clone();
    let mut best: Option<BigRational> = None;
    // All tuples of chords at the input weights with at least one outside.
    let slot_candidates: Vec<Vec<&String>> = weights[1..]
        .iter()
        .map(|&w| {
            profile
                .chord_ids()
                .filter(|id| profile.weight(id) == Some(w))
                .collect()
        })
        .collect();
    let mut idx = alloc::vec![0usize; slot_candidates.len()];
    if slot_candidates.iter().any(|c| c.is_empty()) {
        return Ok(BigRational::one());
    }
    loop {
        let tuple: Vec<&String> = idx
            .iter()
            .zip(&slot_candidates)
            .map(|(&i, c)| c[i])
            .collect();
        let mut outside_sum = BigRational::zero();
        let mut inside_sum = BigRational::zero();
        let mut has_outside = false;
        for id in &tuple {
            match profile.location(id) {
                Location::Outside => {
                    has_outside = true;
                    outside_sum += profile.action(id)?;
                }
                Location::Inside => inside_sum += profile.action(id)?,
            }
        }
        if has_outside {
            // rho * (A(x^0) - sum_in A) < sum_out A must hold for rho
            // below the threshold; outside actions are positive at these
            // weights.
            let coeff = &a0 - &inside_sum;
            if coeff.is_positive() {
                let bound = outside_sum / coeff;
                best = Some(match best {
                    None => bound,
                    Some(b) => b.min(bound),
                });
            }
        }
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < slot_candidates[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    Ok(best.map_or_else(BigRational::one, |b| b.min(BigRational::one())))
}

/// Cascade structure constants: same key shape as an operations table,
/// output constrained inside, rigidity one lower. The formal
/// empty-cascade points are explicit identity entries.
#[derive(Clone, Debug)]
pub struct QConstantsTable {
    pub table: ConstantsTable,
}

impl QConstantsTable {
    pub fn new(table: ConstantsTable) -> Self {
        QConstantsTable { table }
    }

    pub fn validate(&self, chords: &ChordTable) -> ValidationReport {
        self.table.validate(TableKind::Cascade, chords)
    }

    /// Inserts the formal empty-cascade point at every inside chord of
    /// the given weights: an identity entry at the trivial key.
    pub fn insert_empty_cascades(&mut self, chords: &ChordTable) {
        let one = self.table.field().one();
        let keys: Vec<Key> = chords
            .iter()
            .filter(|c| c.location == Some(Location::Inside))
            .map(|c| Key {
                d: 1,
                flavour: Vec::new(),
                weights: alloc::vec![c.weight, c.weight],
                inputs: alloc::vec![c.id.clone()],
                output: c.id.clone(),
            })
            .collect();
        for key in keys {
            self.table.insert(key, one.clone());
        }
    }
}

/// The assembled restriction maps. The linear piece follows the chain
/// formula exactly: the constants enter untwisted, with the
/// q-derivation equivariant extension added. Higher arities carry the
/// same twist convention as the operations.
pub struct FOps<'a> {
    chords: &'a ChordTable,
    index: BTreeMap<(usize, Vec<usize>, Vec<String>), Vec<(String, Scalar)>>,
}

impl<'a> FOps<'a> {
    pub fn new(qtable: &'a QConstantsTable, chords: &'a ChordTable) -> Result<Self, EngineError> {
        let report = qtable.validate(chords);
        if !report.is_valid() {
            return Err(EngineError::InvalidTable(format!("{}", report)));
        }
        Ok(Self::new_unchecked(qtable, chords))
    }

    pub(crate) fn new_unchecked(qtable: &'a QConstantsTable, chords: &'a ChordTable) -> Self {
        let mut index: BTreeMap<(usize, Vec<usize>, Vec<String>), Vec<(String, Scalar)>> =
            BTreeMap::new();
        for (key, value) in qtable.table.entries() {
            index
                .entry((key.d, key.flavour.clone(), key.inputs.clone()))
                .or_default()
                .push((key.output.clone(), value.clone()));
        }
        FOps { chords, index }
    }

    fn constants_for(
        &self,
        d: usize,
        flavour: &BTreeSet<usize>,
        inputs: &[String],
    ) -> &[(String, Scalar)] {
        let key = (
            d,
            flavour.iter().copied().collect::<Vec<usize>>(),
            inputs.to_vec(),
        );
        self.index.get(&key).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

impl<'a> OpFamily for FOps<'a> {
    fn apply(&self, inputs: &[(String, bool)]) -> Element {
        let d = inputs.len();
        let mut out = Element::new();
        if d == 0 {
            return out;
        }
        let chord_ids: Vec<String> = inputs.iter().map(|(id, _)| id.clone()).collect();
        if d == 1 {
            // F(a + qb) = gamma(a) + q gamma(b) + lambda(b).
            let q_in = inputs[0].1;
            for (output, value) in self.constants_for(1, &BTreeSet::new(), &chord_ids) {
                element_add(&mut out, (output.clone(), q_in), value.clone());
            }
            if q_in {
                let shift: BTreeSet<usize> = [1].into_iter().collect();
                for (output, value) in self.constants_for(1, &shift, &chord_ids) {
                    element_add(&mut out, (output.clone(), false), value.clone());
                }
            }
            return out;
        }
        let degs: Vec<i64> = inputs
            .iter()
            .map(|(id, _)| self.chords.get(id).map(|c| c.degree).unwrap_or(0))
            .collect();
        let eps: BTreeSet<usize> = (1..=d).filter(|&k| inputs[k - 1].1).collect();
        let twist = sign::sign_ad_hoc(d, &eps, &degs);
        for (output, value) in self.constants_for(d, &eps, &chord_ids) {
            element_add(&mut out, (output.clone(), false), value.signed(twist));
        }
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
        out
    }
}

/// Nonzero residuals of the two linear relations tying the cascade
/// constants to the ambient and inside differentials.
#[derive(Clone, Debug, Default)]
pub struct QRelationReport {
    pub checked: u64,
    /// `(relation, w, output, input, residual)`, relation 0 or 1.
    pub witnesses: Vec<(u8, u32, String, String, Scalar)>,
}

impl QRelationReport {
    pub fn all_zero(&self) -> bool {
        self.witnesses.is_empty()
    }
}

fn lookup(table: &ConstantsTable, d: usize, flavour: &[usize], w: &[u32], input: &str, output: &str) -> Option<Scalar> {
    table
        .get(&Key {
            d,
            flavour: flavour.to_vec(),
            weights: w.to_vec(),
            inputs: alloc::vec![input.into()],
            output: output.into(),
        })
        .cloned()
}

/// Evaluates the two chain-level relations for every weight window and
/// chord pair present in the data. Zero residuals are exactly the
/// statement that the linear restriction map is a chain map.
pub fn check_q_relations(
    m: &ConstantsTable,
    m_in: &ConstantsTable,
    q: &QConstantsTable,
    chords: &ChordTable,
) -> Result<QRelationReport, EngineError> {
    let field = m.field();
    let mut report = QRelationReport::default();
    let weights = chords.weights();
    let inside: Vec<&str> = chords
        .iter()
        .filter(|c| c.location == Some(Location::Inside))
        .map(|c| c.id.as_str())
        .collect();
    let all: Vec<&str> = chords.iter().map(|c| c.id.as_str()).collect();
    for &w in &weights {
        for &x0 in &inside {
            for &x1 in &all {
                let (c0, c1) = (chords.get(x0)?, chords.get(x1)?);
                // First relation: m_in . q - q . m at matched weight w.
                if c0.weight == w && c1.weight == w && c0.degree == c1.degree + 1 {
                    let mut total = field.zero();
                    for mid in chords.iter().filter(|c| c.weight == w) {
                        if let (Some(a), Some(b)) = (
                            lookup(m_in, 1, &[], &[w, w], &mid.id, x0),
                            lookup(&q.table, 1, &[], &[w, w], x1, &mid.id),
                        ) {
                            total = total.add(&a.mul(&b));
                        }
                        if let (Some(a), Some(b)) = (
                            lookup(&q.table, 1, &[], &[w, w], &mid.id, x0),
                            lookup(m, 1, &[], &[w, w], x1, &mid.id),
                        ) {
                            total = total.sub(&a.mul(&b));
                        }
                    }
                    report.checked += 1;
                    if !total.is_zero() {
                        report
                            .witnesses
                            .push((0, w, x0.into(), x1.into(), total));
                    }
                }
                // Second relation: the window (w+1, w) with one sprinkle.
                if c0.weight == w + 1 && c1.weight == w && c0.degree == c1.degree {
                    let mut total = field.zero();
                    for mid in chords.iter() {
                        if mid.weight == w + 1 {
                            // -m_in delta . lambda and -gamma . kappa routes
                            if let (Some(a), Some(b)) = (
                                lookup(m_in, 1, &[], &[w + 1, w + 1], &mid.id, x0),
                                lookup(&q.table, 1, &[1], &[w + 1, w], x1, &mid.id),
                            ) {
                                total = total.sub(&a.mul(&b));
                            }
                            if let (Some(a), Some(b)) = (
                                lookup(&q.table, 1, &[], &[w + 1, w + 1], &mid.id, x0),
                                lookup(m, 1, &[1], &[w + 1, w], x1, &mid.id),
                            ) {
                                total = total.sub(&a.mul(&b));
                            }
                        }
                        if mid.weight == w {
                            if let (Some(a), Some(b)) = (
                                lookup(m_in, 1, &[1], &[w + 1, w], &mid.id, x0),
                                lookup(&q.table, 1, &[], &[w, w], x1, &mid.id),
                            ) {
                                total = total.add(&a.mul(&b));
                            }
                            if let (Some(a), Some(b)) = (
                                lookup(&q.table, 1, &[1], &[w + 1, w], &mid.id, x0),
                                lookup(m, 1, &[], &[w, w], x1, &mid.id),
                            ) {
                                total = total.sub(&a.mul(&b));
                            }
                        }
                    }
                    report.checked += 1;
                    if !total.is_zero() {
                        report
                            .witnesses
                            .push((1, w, x0.into(), x1.into(), total));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The corner-dimension obstruction to a unit- and splitting-compatible
/// restriction map between two block-decomposed algebras. Pairs of
/// isomorphic summands upstairs force isomorphic corners downstairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObstructionReport {
    /// `(i, j, corner dim at i, corner dim at j)` for each obstructed pair.
    pub mismatches: Vec<(usize, usize, u64, u64)>,
}

impl ObstructionReport {
    pub fn obstructed(&self) -> bool {
        !self.mismatches.is_empty()
    }
}

pub fn annulus_obstruction(block_sizes_in: &[u64], block_sizes_out: &[u64]) -> ObstructionReport {
    let mut report = ObstructionReport::default();
    for i in 0..block_sizes_out.len().min(block_sizes_in.len()) {
        for j in (i + 1)..block_sizes_out.len().min(block_sizes_in.len()) {
            if block_sizes_out[i] == block_sizes_out[j] && block_sizes_in[i] != block_sizes_in[j] {
                report.mismatches.push((
                    i,
                    j,
                    block_sizes_in[i] * block_sizes_in[i],
                    block_sizes_in[j] * block_sizes_in[j],
                ));
            }
        }
    }
    report
}

/// Integer as an exact rational.
pub fn big(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}
