//! The telescope model of the wrapped complex over a finite weight
//! window, executable forms of the two quasi-isomorphism lemmas, and the
//! winding-label subcomplex filter.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ainfty::{ChordTable, ConstantsTable, Key};
use crate::field::{homology, FieldDescriptor, GradedModule, ModuleError, Scalar, SparseMap};
use crate::sign::parity;

/// Whether the top weight keeps its q part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationMode {
    /// Every summand carries a q part; the continuation out of the top
    /// weight is truncated away.
    Full,
    /// The top summand has no q part (the increasing-filtration model).
    TopNoQ,
}

/// Generator of the telescope: weight, chord id, q flag.
pub type TGen = (u32, String, bool);

#[derive(Clone, Debug)]
pub struct TelescopeComplex {
    pub field: FieldDescriptor,
    pub w_max: u32,
    pub mode: TruncationMode,
    chords_by_w: BTreeMap<u32, Vec<(String, i64)>>,
    kappa: BTreeMap<u32, SparseMap<String>>,
    module: GradedModule<TGen>,
    mu1: SparseMap<TGen>,
}

#[derive(Clone, Debug)]
pub enum TelescopeError {
    DeltaNotDifferential { w: u32, witness: String },
    KappaNotChainMap { w: u32, witness: String },
    WrongShift { what: &'static str, shift: i64 },
    Module(ModuleError<TGen>),
    NeedsTopTruncation,
    MissingWeight(u32),
}

impl core::fmt::Display for TelescopeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TelescopeError::DeltaNotDifferential { w, witness } => {
                write!(f, "delta at weight {} squares to nonzero on {}", w, witness)
            }
            TelescopeError::KappaNotChainMap { w, witness } => {
                write!(f, "kappa at weight {} fails the chain relation on {}", w, witness)
            }
            TelescopeError::WrongShift { what, shift } => {
                write!(f, "{} has degree shift {}", what, shift)
            }
            TelescopeError::Module(e) => write!(f, "{:?}", e),
            TelescopeError::NeedsTopTruncation => {
                write!(f, "check requires the top-weight truncated model")
            }
            TelescopeError::MissingWeight(w) => write!(f, "no generators declared at weight {}", w),
        }
    }
}

impl From<ModuleError<TGen>> for TelescopeError {
    fn from(e: ModuleError<TGen>) -> Self {
        TelescopeError::Module(e)
    }
}

/// Builds the telescope from per-weight differentials and continuation
/// maps. `delta[w]` acts within weight `w` with degree one; `kappa[w]`
/// maps weight `w` to `w + 1` with degree zero and must be a chain map.
pub fn build_telescope(
    field: FieldDescriptor,
    chords_by_w: BTreeMap<u32, Vec<(String, i64)>>,
    delta: BTreeMap<u32, SparseMap<String>>,
    kappa: BTreeMap<u32, SparseMap<String>>,
    w_max: u32,
    mode: TruncationMode,
) -> Result<TelescopeComplex, TelescopeError> {
    for w in 1..=w_max {
        if !chords_by_w.contains_key(&w) {
            return Err(TelescopeError::MissingWeight(w));
        }
    }
    for (w, d) in &delta {
        if d.shift() != 1 {
            return Err(TelescopeError::WrongShift {
                what: "delta",
                shift: d.shift(),
            });
        }
        let dd = d.compose(d);
        let witness = dd.entries().next().map(|((_, s), _)| s.clone());
        if let Some(witness) = witness {
            return Err(TelescopeError::DeltaNotDifferential { w: *w, witness });
        }
    }
    let zero_map = SparseMap::new(1);
    let zero_kappa = SparseMap::new(0);
    for (w, k) in &kappa {
        if k.shift() != 0 {
            return Err(TelescopeError::WrongShift {
                what: "kappa",
                shift: k.shift(),
            });
        }
        if *w >= w_max {
            continue;
        }
        let d_w = delta.get(w).unwrap_or(&zero_map);
        let d_next = delta.get(&(w + 1)).unwrap_or(&zero_map);
        let mut defect = d_next.compose(k);
        for ((t, s), v) in k.compose(d_w).entries() {
            defect.add_entry(t.clone(), s.clone(), v.neg());
        }
        let witness = defect.entries().next().map(|((_, s), _)| s.clone());
        if let Some(witness) = witness {
            return Err(TelescopeError::KappaNotChainMap { w: *w, witness });
        }
    }

    let has_q = |w: u32| -> bool { mode == TruncationMode::Full || w < w_max };
    let mut basis: Vec<(TGen, i64)> = Vec::new();
    for w in 1..=w_max {
        for (id, deg) in &chords_by_w[&w] {
            basis.push(((w, id.clone(), false), *deg));
            if has_q(w) {
                basis.push(((w, id.clone(), true), *deg - 1));
            }
        }
    }
    let module = GradedModule::new(field, basis)?;

    let mut mu1: SparseMap<TGen> = SparseMap::new(1);
    for w in 1..=w_max {
        let d_w = delta.get(&w).unwrap_or(&zero_map);
        let k_w = kappa.get(&w).unwrap_or(&zero_kappa);
        for (id, deg) in &chords_by_w[&w] {
            let sgn = parity(*deg);
            // mu^1(a) = (-1)^{deg a} delta a.
            for ((t, s), v) in d_w.entries() {
                if s == id {
                    mu1.add_entry((w, t.clone(), false), (w, id.clone(), false), v.signed(sgn));
                }
            }
            if !has_q(w) {
                continue;
            }
            // mu^1(q b) = (-1)^{deg b} (q delta b + kappa b - b).
            for ((t, s), v) in d_w.entries() {
                if s == id {
                    mu1.add_entry((w, t.clone(), true), (w, id.clone(), true), v.signed(sgn));
                }
            }
            if w < w_max {
                for ((t, s), v) in k_w.entries() {
                    if s == id {
                        mu1.add_entry(
                            (w + 1, t.clone(), false),
                            (w, id.clone(), true),
                            v.signed(sgn),
                        );
                    }
                }
            }
            mu1.add_entry(
                (w, id.clone(), false),
                (w, id.clone(), true),
                field.one().signed(!sgn),
            );
        }
    }
    mu1.validate(&module, &module)?;
    debug_assert!(mu1.compose(&mu1).is_zero_map());
    Ok(TelescopeComplex {
        field,
        w_max,
        mode,
        chords_by_w,
        kappa,
        module,
        mu1,
    })
}

impl TelescopeComplex {
    pub fn module(&self) -> &GradedModule<TGen> {
        &self.module
    }

    pub fn differential(&self) -> &SparseMap<TGen> {
        &self.mu1
    }

    pub fn homology(&self) -> Result<BTreeMap<i64, usize>, TelescopeError> {
        Ok(homology(&self.mu1, &self.module)?)
    }

    /// Homology of the subcomplex of weights at least `nu`.
    fn truncated_homology(&self, nu: u32) -> Result<BTreeMap<i64, usize>, TelescopeError> {
        let basis: Vec<(TGen, i64)> = self
            .module
            .basis()
            .iter()
            .filter(|((w, _, _), _)| *w >= nu)
            .cloned()
            .collect();
        let module = GradedModule::new(self.field, basis)?;
        let mut d = SparseMap::new(1);
        for ((t, s), v) in self.mu1.entries() {
            if t.0 >= nu && s.0 >= nu {
                d.add_entry(t.clone(), s.clone(), v.clone());
            }
        }
        Ok(homology(&d, &module)?)
    }
}

fn nonzero(b: &BTreeMap<i64, usize>) -> BTreeMap<i64, usize> {
    b.iter().filter(|(_, &n)| n > 0).map(|(&k, &n)| (k, n)).collect()
}

/// The weight-filtration lemma in the finite model: the inclusion of the
/// subcomplex of weights `>= nu` induces an isomorphism on homology,
/// verified by comparing ranks per degree.
pub fn check_partial_forget(tc: &TelescopeComplex, nu: u32) -> Result<bool, TelescopeError> {
    if nu <= 1 {
        return Ok(true);
    }
    let whole = tc.homology()?;
    let sub = tc.truncated_homology(nu)?;
    Ok(nonzero(&whole) == nonzero(&sub))
}

#[derive(Clone, Debug)]
pub struct HomotopyLimitReport {
    /// Ranks of the top-weight Floer homology agree with the telescope
    /// homology per degree.
    pub limit_iso: bool,
    /// The square of continuation against inclusion commutes up to the
    /// explicit chain homotopy, exactly on every generator.
    pub homotopy_identity: bool,
    pub telescope_betti: BTreeMap<i64, usize>,
    pub top_betti: BTreeMap<i64, usize>,
    pub homotopy_witnesses: Vec<TGen>,
}

impl HomotopyLimitReport {
    pub fn holds(&self) -> bool {
        self.limit_iso && self.homotopy_identity
    }
}

/// The direct-limit lemma in the finite model. Requires the top-weight
/// truncated telescope.
pub fn check_homotopy_limit(tc: &TelescopeComplex) -> Result<HomotopyLimitReport, TelescopeError> {
    if tc.mode != TruncationMode::TopNoQ {
        return Err(TelescopeError::NeedsTopTruncation);
    }
    let telescope_betti = tc.homology()?;
    // Top summand alone, with its bare differential (the sign flip the
    // inclusion introduces does not change ranks).
    let top = tc.w_max;
    let basis: Vec<(TGen, i64)> = tc
        .module
        .basis()
        .iter()
        .filter(|((w, _, q), _)| *w == top && !q)
        .cloned()
        .collect();
    let top_module = GradedModule::new(tc.field, basis)?;
    let mut top_d = SparseMap::new(1);
    for ((t, s), v) in tc.mu1.entries() {
        if t.0 == top && s.0 == top && !t.2 && !s.2 {
            top_d.add_entry(t.clone(), s.clone(), v.clone());
        }
    }
    let top_betti = homology(&top_d, &top_module)?;
    let limit_iso = nonzero(&telescope_betti) == nonzero(&top_betti);

    // Homotopy identity: kappa(a) - a = mu^1(h a) + h(mu^1 a) with
    // h(a) = (-1)^{deg a} q a, on every generator of every non-top weight.
    let mut homotopy_witnesses = Vec::new();
    let zero_kappa = SparseMap::new(0);
    for w in 1..top {
        let k_w = tc.kappa.get(&w).unwrap_or(&zero_kappa);
        for (id, deg) in &tc.chords_by_w[&w] {
            let mut lhs: BTreeMap<TGen, Scalar> = BTreeMap::new();
            for ((t, s), v) in k_w.entries() {
                if s == id {
                    crate::field::add_into(&mut lhs, (w + 1, t.clone(), false), v.clone());
                }
            }
            crate::field::add_into(
                &mut lhs,
                (w, id.clone(), false),
                tc.field.one().neg(),
            );
            // mu^1(h a)
            let mut h_a: BTreeMap<TGen, Scalar> = BTreeMap::new();
            crate::field::add_into(
                &mut h_a,
                (w, id.clone(), true),
                tc.field.one().signed(parity(*deg)),
            );
            let mut rhs = tc.mu1.apply(&h_a);
            // h(mu^1 a): mu^1 a stays in weight w with no q part.
            let mut a: BTreeMap<TGen, Scalar> = BTreeMap::new();
            a.insert((w, id.clone(), false), tc.field.one());
            for (g, v) in tc.mu1.apply(&a) {
                let (gw, gid, gq) = g;
                debug_assert!(!gq);
                let hdeg = tc
                    .module
                    .degree_of(&(gw, gid.clone(), false))
                    .expect("generator exists");
                crate::field::add_into(&mut rhs, (gw, gid, true), v.signed(parity(hdeg)));
            }
            let equal = lhs == rhs;
            if !equal {
                homotopy_witnesses.push((w, id.clone(), false));
            }
        }
    }
    Ok(HomotopyLimitReport {
        limit_iso,
        homotopy_identity: homotopy_witnesses.is_empty(),
        telescope_betti,
        top_betti,
        homotopy_witnesses,
    })
}

/// Result of restricting to a winding label.
#[derive(Clone, Debug)]
pub struct WindingRestriction {
    pub label: i64,
    /// Chords in the restricted span.
    pub chords: Vec<String>,
    /// Keys acting within the span.
    pub keys_kept: usize,
    /// Keys violating conservation, with the expected label sum.
    pub conservation_violations: Vec<(Key, i64, i64)>,
    /// Keys whose inputs all lie in the span but whose output leaves it.
    pub closure_violations: Vec<Key>,
}

impl WindingRestriction {
    pub fn is_closed(&self) -> bool {
        self.conservation_violations.is_empty() && self.closure_violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub enum WindingError {
    UnlabelledChord(String),
    UnknownChord(String),
}

impl core::fmt::Display for WindingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WindingError::UnlabelledChord(id) => write!(f, "chord {} has no winding label", id),
            WindingError::UnknownChord(id) => write!(f, "unknown chord {}", id),
        }
    }
}

/// Restricts a constants table to the span of chords with the given
/// winding label, verifying closure. Conservation failures are reported
/// with witnesses rather than absorbed.
pub fn winding_subcomplex(
    table: &ConstantsTable,
    chords: &ChordTable,
    label: i64,
) -> Result<WindingRestriction, WindingError> {
    let mut winding = BTreeMap::new();
    for c in chords.iter() {
        let w = c
            .winding
            .ok_or_else(|| WindingError::UnlabelledChord(c.id.clone()))?;
        winding.insert(c.id.clone(), w);
    }
    let look = |id: &String| -> Result<i64, WindingError> {
        winding
            .get(id)
            .copied()
            .ok_or_else(|| WindingError::UnknownChord(id.clone()))
    };
    let mut restriction = WindingRestriction {
        label,
        chords: winding
            .iter()
            .filter(|(_, &w)| w == label)
            .map(|(id, _)| id.clone())
            .collect(),
        keys_kept: 0,
        conservation_violations: Vec::new(),
        closure_violations: Vec::new(),
    };
    for (key, _) in table.entries() {
        let out_w = look(&key.output)?;
        let mut in_sum = 0i64;
        let mut all_in_span = true;
        for id in &key.inputs {
            let w = look(id)?;
            in_sum += w;
            all_in_span &= w == label;
        }
        if out_w != in_sum {
            restriction
                .conservation_violations
                .push((key.clone(), in_sum, out_w));
            continue;
        }
        if all_in_span {
            if out_w == label {
                restriction.keys_kept += 1;
            } else {
                restriction.closure_violations.push(key.clone());
            }
        }
    }
    Ok(restriction)
}

/// Convenience: the telescope of the familiar contractible model, one
/// generator of degree zero per weight, zero differential, identity
/// continuation.
pub fn identity_model(
    field: FieldDescriptor,
    w_max: u32,
    mode: TruncationMode,
) -> TelescopeComplex {
    let mut chords_by_w = BTreeMap::new();
    let mut kappa = BTreeMap::new();
    for w in 1..=w_max {
        chords_by_w.insert(w, alloc::vec![(String::from("e"), 0)]);
        if w < w_max {
            let mut k = SparseMap::new(0);
            k.add_entry(String::from("e"), String::from("e"), field.one());
            kappa.insert(w, k);
        }
    }
    build_telescope(field, chords_by_w, BTreeMap::new(), kappa, w_max, mode)
        .expect("model is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_model_has_rank_one_homology() {
        let tc = identity_model(FieldDescriptor::Rationals, 3, TruncationMode::TopNoQ);
        let h = tc.homology().unwrap();
        assert_eq!(nonzero(&h), [(0i64, 1usize)].into_iter().collect());
    }

    #[test]
    fn full_window_is_acyclic() {
        // With every weight carrying its q part the whole telescope is a
        // sum of cones.
        let tc = identity_model(FieldDescriptor::Rationals, 3, TruncationMode::Full);
        let h = tc.homology().unwrap();
        assert!(nonzero(&h).is_empty(), "{:?}", h);
    }

    #[test]
    fn w1_truncated_model_is_the_bare_complex() {
        let field = FieldDescriptor::Rationals;
        let mut chords_by_w = BTreeMap::new();
        chords_by_w.insert(1, alloc::vec![(String::from("x"), 0), (String::from("y"), 1)]);
        let mut d1 = SparseMap::new(1);
        d1.add_entry(String::from("y"), String::from("x"), field.from_integer(1));
        let mut delta = BTreeMap::new();
        delta.insert(1, d1);
        let tc = build_telescope(
            field,
            chords_by_w,
            delta,
            BTreeMap::new(),
            1,
            TruncationMode::TopNoQ,
        )
        .unwrap();
        assert_eq!(tc.module().basis().len(), 2);
        let h = tc.homology().unwrap();
        assert!(nonzero(&h).is_empty());
    }

    #[test]
    fn rejects_delta_that_is_not_a_differential() {
        let field = FieldDescriptor::Rationals;
        let mut chords_by_w = BTreeMap::new();
        chords_by_w.insert(
            1,
            alloc::vec![
                (String::from("x"), 0),
                (String::from("y"), 1),
                (String::from("z"), 2)
            ],
        );
        let mut d1 = SparseMap::new(1);
        d1.add_entry(String::from("y"), String::from("x"), field.one());
        d1.add_entry(String::from("z"), String::from("y"), field.one());
        let mut delta = BTreeMap::new();
        delta.insert(1, d1);
        let err = build_telescope(
            field,
            chords_by_w,
            delta,
            BTreeMap::new(),
            1,
            TruncationMode::TopNoQ,
        );
        assert!(matches!(
            err,
            Err(TelescopeError::DeltaNotDifferential { w: 1, .. })
        ));
    }

    #[test]
    fn rejects_kappa_that_is_not_a_chain_map() {
        let field = FieldDescriptor::Rationals;
        let mut chords_by_w = BTreeMap::new();
        for w in 1..=2 {
            chords_by_w.insert(
                w,
                alloc::vec![(String::from("x"), 0), (String::from("y"), 1)],
            );
        }
        let mut delta = BTreeMap::new();
        for w in 1..=2 {
            let mut d = SparseMap::new(1);
            d.add_entry(String::from("y"), String::from("x"), field.one());
            delta.insert(w, d);
        }
        let mut kappa = BTreeMap::new();
        let mut k = SparseMap::new(0);
        k.add_entry(String::from("x"), String::from("x"), field.one());
        // y is not carried along, so the chain relation fails on x.
        kappa.insert(1, k);
        let err = build_telescope(
            field,
            chords_by_w,
            delta,
            kappa,
            2,
            TruncationMode::TopNoQ,
        );
        assert!(matches!(
            err,
            Err(TelescopeError::KappaNotChainMap { w: 1, .. })
        ));
    }

    #[test]
    fn partial_forget_holds_on_identity_model() {
        let tc = identity_model(FieldDescriptor::Rationals, 3, TruncationMode::TopNoQ);
        for nu in 1..=3 {
            assert!(check_partial_forget(&tc, nu).unwrap());
        }
    }

    #[test]
    fn homotopy_limit_holds_on_identity_model() {
        let tc = identity_model(FieldDescriptor::Rationals, 4, TruncationMode::TopNoQ);
        let report = check_homotopy_limit(&tc).unwrap();
        assert!(report.holds(), "{:?}", report);
        let full = identity_model(FieldDescriptor::Rationals, 2, TruncationMode::Full);
        assert!(matches!(
            check_homotopy_limit(&full),
            Err(TelescopeError::NeedsTopTruncation)
        ));
    }

    #[test]
    fn homotopy_limit_vacuous_at_w1() {
        let tc = identity_model(FieldDescriptor::Rationals, 1, TruncationMode::TopNoQ);
        let report = check_homotopy_limit(&tc).unwrap();
        assert!(report.holds());
    }

    #[test]
    fn winding_restriction_scan() {
        use crate::ainfty::Chord;
        let field = FieldDescriptor::Rationals;
        let mut chords = ChordTable::new();
        let mut mk = |id: &str, w: u32, deg: i64, winding: i64| {
            let mut c = Chord::new(id, w, deg);
            c.winding = Some(winding);
            chords.insert(c).unwrap();
        };
        mk("a", 1, 0, 0);
        mk("b", 1, 1, 0);
        mk("c", 1, 1, 2);
        let mut table = ConstantsTable::new(field);
        table.insert(
            Key {
                d: 1,
                flavour: alloc::vec![],
                weights: alloc::vec![1, 1],
                inputs: alloc::vec![String::from("a")],
                output: String::from("b"),
            },
            field.one(),
        );
        let r = winding_subcomplex(&table, &chords, 0).unwrap();
        assert!(r.is_closed());
        assert_eq!(r.chords.len(), 2);
        assert_eq!(r.keys_kept, 1);

        // A constant violating conservation is reported, not absorbed.
        table.insert(
            Key {
                d: 1,
                flavour: alloc::vec![],
                weights: alloc::vec![1, 1],
                inputs: alloc::vec![String::from("a")],
                output: String::from("c"),
            },
            field.one(),
        );
        let r = winding_subcomplex(&table, &chords, 0).unwrap();
        assert!(!r.is_closed());
        assert_eq!(r.conservation_violations.len(), 1);
    }

    #[test]
    fn random_models_satisfy_both_lemmas() {
        use rand::{Rng, SeedableRng};
        let field = FieldDescriptor::Prime(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w_max = 3;
            let per_w = rng.gen_range(1..=4usize);
            let mut chords_by_w = BTreeMap::new();
            for w in 1..=w_max {
                let gens: Vec<(String, i64)> = (0..per_w)
                    .map(|i| (format!("g{}", i), (i % 2) as i64))
                    .collect();
                chords_by_w.insert(w, gens);
            }
            // delta = 0 keeps the chain conditions trivially; kappa is a
            // random degree-0 map, a chain map for free.
            let mut kappa = BTreeMap::new();
            for w in 1..w_max {
                let mut k = SparseMap::new(0);
                for i in 0..per_w {
                    for j in 0..per_w {
                        if i % 2 == j % 2 && rng.gen_bool(0.5) {
                            k.add_entry(format!("g{}", i), format!("g{}", j), field.one());
                        }
                    }
                }
                kappa.insert(w, k);
            }
            let tc = build_telescope(
                field,
                chords_by_w,
                BTreeMap::new(),
                kappa,
                w_max,
                TruncationMode::TopNoQ,
            )
            .unwrap();
            for nu in 1..=w_max {
                assert!(check_partial_forget(&tc, nu).unwrap());
            }
            let report = check_homotopy_limit(&tc).unwrap();
            assert!(report.holds(), "{:?}", report);
        }
    }
}
