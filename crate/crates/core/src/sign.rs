//! Koszul sign calculus for the boundary strata of one-dimensional moduli
//! spaces: admissible cuts, the orientation sign on stable cuts, the
//! product-orientation comparison, the strip-breaking sign, and the
//! cascade twist signs.
//!
//! All signs are computed in Z/2 and exposed as bits; callers multiply
//! field scalars by `(-1)^bit`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

/// Parity of an integer as a sign bit.
pub fn parity(n: i64) -> bool {
    n.rem_euclid(2) == 1
}

/// The combinatorial datum of a codimension-one degeneration: the output
/// piece takes `d_plus` inputs with the new chord in slot `i`, the input
/// piece takes `d_minus` inputs, and the sprinkle set splits into local
/// subsets `f_minus` of `{1..d_minus}` and `f_plus` of `{1..d_plus}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cut {
    pub d_minus: usize,
    pub d_plus: usize,
    pub i: usize,
    pub f_minus: BTreeSet<usize>,
    pub f_plus: BTreeSet<usize>,
    /// Global sprinkle position consumed by slot `i` when `i` itself is a
    /// sprinkled slot of the output piece; determined by the ambient set.
    extra: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignError {
    UnstableCut,
    NotAStripConfiguration,
}

impl core::fmt::Display for SignError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SignError::UnstableCut => write!(f, "cut has a strip factor"),
            SignError::NotAStripConfiguration => write!(f, "not a d=1 strip configuration"),
        }
    }
}

impl Cut {
    pub fn d(&self) -> usize {
        self.d_minus + self.d_plus - 1
    }

    /// Global position of the k-th sprinkled slot of the input piece.
    pub fn iota_minus(&self, k: usize) -> usize {
        k + self.i - 1
    }

    /// Global position of the k-th sprinkled slot of the output piece.
    pub fn iota_plus(&self, k: usize) -> usize {
        if k < self.i {
            k
        } else if k > self.i {
            k + self.d_minus - 1
        } else {
            self.extra.expect("slot i carries a sprinkle")
        }
    }

    /// The ambient sprinkle set this cut decomposes.
    pub fn reconstruct_f(&self) -> BTreeSet<usize> {
        let mut f = BTreeSet::new();
        for &k in &self.f_plus {
            f.insert(self.iota_plus(k));
        }
        for &k in &self.f_minus {
            f.insert(self.iota_minus(k));
        }
        f
    }

    /// Both factors stable, i.e. neither is a bare strip.
    pub fn is_stable(&self) -> bool {
        self.d_minus + self.f_minus.len() >= 2 && self.d_plus + self.f_plus.len() >= 2
    }

    fn cross_lt(&self) -> i64 {
        let mut n = 0;
        for &kp in &self.f_plus {
            for &km in &self.f_minus {
                if self.iota_plus(kp) < self.iota_minus(km) {
                    n += 1;
                }
            }
        }
        n
    }

    fn cross_gt(&self) -> i64 {
        (self.f_plus.len() * self.f_minus.len()) as i64 - self.cross_lt()
    }
}

/// All admissible cuts of `f` inside `{1..d}`.
pub fn enumerate_cuts(d: usize, f: &BTreeSet<usize>) -> Vec<Cut> {
    debug_assert!(f.iter().all(|&x| 1 <= x && x <= d));
    let mut out = Vec::new();
    for d_minus in 1..=d {
        let d_plus = d + 1 - d_minus;
        for i in 1..=d_plus {
            let window = i..=(i + d_minus - 1);
            // Positions outside the window transfer to the output piece
            // with slots shifted across the contracted block; positions
            // inside transfer to the input piece, except that at most one
            // of them can be consumed by slot i itself.
            let f_minus_full: BTreeSet<usize> = f
                .iter()
                .filter(|&&x| window.contains(&x))
                .map(|&x| x - i + 1)
                .collect();
            let f_plus_outside: BTreeSet<usize> = f
                .iter()
                .filter(|&&x| !window.contains(&x))
                .map(|&x| if x < i { x } else { x - d_minus + 1 })
                .collect();
            debug_assert!(f_plus_outside.iter().all(|&k| k != i));
            // Either every window sprinkle goes to the input piece...
            out.push(Cut {
                d_minus,
                d_plus,
                i,
                f_minus: f_minus_full.clone(),
                f_plus: f_plus_outside.clone(),
                extra: None,
            });
            // ...or one of them is consumed by slot i of the output piece.
            for &x in f.iter().filter(|&&x| window.contains(&x)) {
                let mut f_minus = f_minus_full.clone();
                f_minus.remove(&(x - i + 1));
                let mut f_plus = f_plus_outside.clone();
                f_plus.insert(i);
                out.push(Cut {
                    d_minus,
                    d_plus,
                    i,
                    f_minus,
                    f_plus,
                    extra: Some(x),
                });
            }
        }
    }
    out.sort();
    out
}

/// Mutation points for the convention-pinning suite. Each variant drops
/// one summand from the named exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    AdHocTerm(u8),
    AlephTerm(u8),
}

pub(crate) fn aleph_terms(cut: &Cut, degs: &[i64]) -> [i64; 6] {
    let d = cut.d();
    debug_assert_eq!(degs.len(), d);
    let dm = cut.d_minus as i64;
    let dp = cut.d_plus as i64;
    let i = cut.i as i64;
    let trailing: i64 = ((cut.i + cut.d_minus)..=d).map(|k| degs[k - 1]).sum();
    [
        dm * i,
        i,
        1,
        dp * cut.f_minus.len() as i64,
        (dm + cut.f_minus.len() as i64) * trailing,
        cut.cross_lt(),
    ]
}

pub(crate) fn aleph_parity_with(cut: &Cut, degs: &[i64], mutation: Option<Mutation>) -> bool {
    let terms = aleph_terms(cut, degs);
    let mut total: i64 = terms.iter().sum();
    if let Some(Mutation::AlephTerm(t)) = mutation {
        total -= terms[t as usize];
    }
    parity(total)
}

/// Orientation sign of a stable cut, given the degrees of the ambient
/// inputs `x^1..x^d`.
pub fn sign_aleph(cut: &Cut, degs: &[i64]) -> Result<bool, SignError> {
    if !cut.is_stable() {
        return Err(SignError::UnstableCut);
    }
    Ok(aleph_parity_with(cut, degs, None))
}

/// Difference between the product orientation of a boundary stratum and
/// the interior orientation, for a stable cut.
pub fn sign_triangle(cut: &Cut) -> Result<bool, SignError> {
    if !cut.is_stable() {
        return Err(SignError::UnstableCut);
    }
    let dm = cut.d_minus as i64;
    let dp = cut.d_plus as i64;
    let i = cut.i as i64;
    let total =
        dm * dp + dm * i + i + 1 + cut.f_plus.len() as i64 * dm + cut.cross_gt();
    Ok(parity(total))
}

/// Second route to the orientation sign: triangle plus the dimension and
/// degree corrections. Must agree with `sign_aleph` on every stable cut.
pub fn sign_simplified(cut: &Cut, degs: &[i64]) -> Result<bool, SignError> {
    let triangle = sign_triangle(cut)?;
    let dim_minus = cut.d_minus as i64 - 2 + cut.f_minus.len() as i64;
    let dim_plus = cut.d_plus as i64 - 2 + cut.f_plus.len() as i64;
    let trailing: i64 = ((cut.i + cut.d_minus)..=cut.d()).map(|k| degs[k - 1]).sum();
    let total = triangle as i64 + dim_minus * dim_plus + dim_minus * trailing;
    Ok(parity(total))
}

pub(crate) fn ad_hoc_terms(d: usize, f: &BTreeSet<usize>, degs: &[i64]) -> [i64; 2] {
    debug_assert_eq!(degs.len(), d);
    let linear: i64 = (1..=d).map(|j| j as i64 * degs[j - 1]).sum();
    let mut tail = 0;
    for &j in f {
        for k in (j + 1)..=d {
            tail += degs[k - 1] - 1;
        }
    }
    [linear, tail]
}

pub(crate) fn ad_hoc_parity_with(
    d: usize,
    f: &BTreeSet<usize>,
    degs: &[i64],
    mutation: Option<Mutation>,
) -> bool {
    let terms = ad_hoc_terms(d, f, degs);
    let mut total: i64 = terms.iter().sum();
    if let Some(Mutation::AdHocTerm(t)) = mutation {
        total -= terms[t as usize];
    }
    parity(total)
}

/// The sign twisting a structure constant into an operation coefficient
/// on the sprinkled summand.
pub fn sign_ad_hoc(d: usize, f: &BTreeSet<usize>, degs: &[i64]) -> bool {
    ad_hoc_parity_with(d, f, degs, None)
}

/// Strip-breaking sign for `d = 1` configurations. `f_plus` and `f_minus`
/// are the sprinkle subsets of the two strip factors, as subsets of the
/// ambient ordered set.
pub fn sign_unstable(f_plus: &BTreeSet<usize>, f_minus: &BTreeSet<usize>) -> bool {
    let mut cross = 0i64;
    for &fp in f_plus {
        for &fm in f_minus {
            if fp > fm {
                cross += 1;
            }
        }
    }
    parity(f_plus.len() as i64 + 1 + cross)
}

/// Sign used when composing the factors of a boundary stratum. Relations
/// with `d >= 2` carry the orientation sign on every admissible cut; the
/// `d = 1` relation carries the strip-breaking sign instead.
pub fn cut_sign(d: usize, cut: &Cut, degs: &[i64]) -> bool {
    if d == 1 {
        let fp: BTreeSet<usize> = cut.f_plus.iter().map(|&k| cut.iota_plus(k)).collect();
        let fm: BTreeSet<usize> = cut.f_minus.iter().map(|&k| cut.iota_minus(k)).collect();
        sign_unstable(&fp, &fm)
    } else {
        aleph_parity_with(cut, degs, None)
    }
}

pub(crate) fn cut_sign_with(
    d: usize,
    cut: &Cut,
    degs: &[i64],
    mutation: Option<Mutation>,
) -> bool {
    if d == 1 {
        let fp: BTreeSet<usize> = cut.f_plus.iter().map(|&k| cut.iota_plus(k)).collect();
        let fm: BTreeSet<usize> = cut.f_minus.iter().map(|&k| cut.iota_minus(k)).collect();
        sign_unstable(&fp, &fm)
    } else {
        aleph_parity_with(cut, degs, mutation)
    }
}

/// Twist applied to the composite of the components of a linear cascade.
/// `parts` lists the sprinkle subsets attached to the chain components,
/// ordered from the root; `anchor_degs` are the degrees of the chain
/// chords `x_0..x_l`.
pub fn sign_star(parts: &[BTreeSet<usize>], anchor_degs: &[i64]) -> bool {
    let l = parts.len();
    debug_assert_eq!(anchor_degs.len(), l + 1);
    let mut cross = 0i64;
    for j in 0..l {
        for k in 0..j {
            for &fp in &parts[j] {
                for &fm in &parts[k] {
                    if fp > fm {
                        cross += 1;
                    }
                }
            }
        }
    }
    let anchors: i64 = (0..l)
        .map(|j| parts[j].len() as i64 * (anchor_degs[j] - anchor_degs[0]))
        .sum();
    parity(cross + anchors + l as i64)
}

/// Difference between the boundary orientation of a cascade fibre-product
/// stratum and the fibre-product orientation.
pub fn sign_fib(
    f_plus: &BTreeSet<usize>,
    f_minus: &BTreeSet<usize>,
    deg_new: i64,
    deg_0: i64,
) -> bool {
    let mut cross = 0i64;
    for &fp in f_plus {
        for &fm in f_minus {
            if fp > fm {
                cross += 1;
            }
        }
    }
    parity(cross + f_minus.len() as i64 * (deg_new - deg_0))
}

/// Difference between the boundary orientation at a parameter-one face and
/// the product orientation.
pub fn sign_times(f_minus_len: usize, deg_new: i64, deg_0: i64) -> bool {
    parity(f_minus_len as i64 * (deg_new - deg_0) + 1)
}

/// Parity of the sum of reduced degrees of the first `i - 1` inputs.
pub fn koszul_prefix(degs: &[i64], i: usize) -> bool {
    debug_assert!(i >= 1);
    parity(degs.iter().take(i - 1).map(|&d| d - 1).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn cuts_d1_single_sprinkle() {
        let cuts = enumerate_cuts(1, &set(&[1]));
        assert_eq!(cuts.len(), 2);
        assert!(cuts
            .iter()
            .any(|c| c.f_plus == set(&[1]) && c.f_minus.is_empty()));
        assert!(cuts
            .iter()
            .any(|c| c.f_plus.is_empty() && c.f_minus == set(&[1])));
    }

    #[test]
    fn cuts_d2_full_flavour_has_seven() {
        let cuts = enumerate_cuts(2, &set(&[1, 2]));
        assert_eq!(cuts.len(), 7);
        let strips = cuts.iter().filter(|c| !c.is_stable()).count();
        assert_eq!(strips, 3);
    }

    #[test]
    fn cuts_d2_empty_flavour_has_three() {
        let cuts = enumerate_cuts(2, &BTreeSet::new());
        assert_eq!(cuts.len(), 3);
    }

    #[test]
    fn cut_round_trip_reconstructs_f() {
        for d in 1..=4 {
            for f_mask in 0u32..(1 << d) {
                let f: BTreeSet<usize> =
                    (1..=d).filter(|k| f_mask >> (k - 1) & 1 == 1).collect();
                for cut in enumerate_cuts(d, &f) {
                    assert_eq!(cut.reconstruct_f(), f, "cut {:?}", cut);
                    assert_eq!(cut.f_plus.len() + cut.f_minus.len(), f.len());
                    assert_eq!(cut.d(), d);
                }
            }
        }
    }

    #[test]
    fn aleph_example_even() {
        // d = 3, F = {1}, cut (d-=2, d+=2, i=1, F+={1}, F-=empty).
        let cuts = enumerate_cuts(3, &set(&[1]));
        let cut = cuts
            .iter()
            .find(|c| c.d_minus == 2 && c.i == 1 && c.f_plus == set(&[1]))
            .unwrap();
        for degs in [[0, 0, 0], [1, 2, 3], [3, 1, 0], [2, 2, 2]] {
            assert!(!sign_aleph(cut, &degs.map(|d| d as i64)).unwrap());
        }
    }

    #[test]
    fn triangle_example_is_ten() {
        let cuts = enumerate_cuts(3, &set(&[1]));
        let cut = cuts
            .iter()
            .find(|c| c.d_minus == 2 && c.i == 1 && c.f_plus == set(&[1]))
            .unwrap();
        // 4 + 2 + 1 + 1 + 2 + 0 = 10, even.
        assert!(!sign_triangle(cut).unwrap());
    }

    #[test]
    fn aleph_agrees_with_simplified_route() {
        for d in 1..=4usize {
            for f_mask in 0u32..(1 << d) {
                let f: BTreeSet<usize> =
                    (1..=d).filter(|k| f_mask >> (k - 1) & 1 == 1).collect();
                if f.len() > 2 {
                    continue;
                }
                for cut in enumerate_cuts(d, &f) {
                    if !cut.is_stable() {
                        continue;
                    }
                    let mut degs = vec![0i64; d];
                    loop {
                        assert_eq!(
                            sign_aleph(&cut, &degs).unwrap(),
                            sign_simplified(&cut, &degs).unwrap(),
                            "cut {:?} degs {:?}",
                            cut,
                            degs
                        );
                        // Odometer over {0,1,2,3}^d.
                        let mut k = 0;
                        while k < d {
                            degs[k] += 1;
                            if degs[k] < 4 {
                                break;
                            }
                            degs[k] = 0;
                            k += 1;
                        }
                        if k == d {
                            break;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ad_hoc_matches_differential_sign_at_d1() {
        // d = 1, F = empty: the exponent reduces to deg(x^1).
        for deg in -3i64..4 {
            assert_eq!(sign_ad_hoc(1, &BTreeSet::new(), &[deg]), parity(deg));
        }
    }

    #[test]
    fn ad_hoc_examples() {
        // All degrees even, F empty: even.
        assert!(!sign_ad_hoc(3, &BTreeSet::new(), &[0, 2, 4]));
        // d=2, F={2}, degs (1,1): 1*1 + 2*1 + 0 = 3, odd.
        assert!(sign_ad_hoc(2, &set(&[2]), &[1, 1]));
    }

    #[test]
    fn unstable_examples() {
        assert!(!sign_unstable(&set(&[1]), &set(&[])));
        assert!(sign_unstable(&set(&[]), &set(&[1])));
        assert!(sign_unstable(&set(&[]), &set(&[])));
    }

    #[test]
    fn star_examples() {
        // Single part: cross and anchor terms vanish, leaving l = 1.
        assert!(sign_star(&[set(&[1])], &[5, 3]));
        // All parts empty: star = l.
        assert!(!sign_star(&[set(&[]), set(&[])], &[0, 0, 0]));
        assert!(sign_star(&[set(&[]), set(&[]), set(&[])], &[0, 1, 2, 3]));
    }

    #[test]
    fn fib_and_times_examples() {
        assert!(!sign_fib(&set(&[]), &set(&[]), 7, 3));
        assert!(sign_times(0, 7, 3));
        assert!(!sign_times(1, 4, 3));
        // With no cross term the two differ by exactly one.
        for fm in 0..3usize {
            for delta in -2i64..3 {
                let fib = sign_fib(&set(&[]), &(1..=fm).collect(), delta, 0);
                let times = sign_times(fm, delta, 0);
                assert_ne!(fib, times);
            }
        }
    }

    #[test]
    fn koszul_prefix_examples() {
        assert!(!koszul_prefix(&[5, 7], 1));
        assert!(koszul_prefix(&[1, 0, 9], 3));
        assert!(!koszul_prefix(&[1, 1, 1, 1], 4));
    }

    #[test]
    fn signs_depend_only_on_degree_parity() {
        let f = set(&[1, 2]);
        for cut in enumerate_cuts(3, &f) {
            if !cut.is_stable() {
                continue;
            }
            let a = cut_sign(3, &cut, &[1, 0, 3]);
            let b = cut_sign(3, &cut, &[3, 2, 1]);
            assert_eq!(a, b);
        }
        assert_eq!(
            sign_ad_hoc(2, &f, &[1, 2]),
            sign_ad_hoc(2, &f, &[3, 0])
        );
    }
}
