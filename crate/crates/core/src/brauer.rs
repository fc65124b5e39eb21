//! Local invariants of Brauer classes attached to Weil numbers.
//!
//! The center is a subfield C of K, given as the fixed field of a subgroup S
//! of (Z/N)^x. Places of C above p are the S-orbits on X, and for a prime w
//! over the place v the local extension K_w / C_v has Galois group D ∩ S,
//! where D is the decomposition group at p.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cyclotomic::PPowerElement;
use crate::error::{Result, WeilError};
use crate::modmath::{mod_one, order_in_q_mod_z, rational, serialize_rational, Rational};
use crate::weil::{slope_stabilizer, WeilContext, WeilElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LocalFieldData {
    pub e: u64,
    pub f: u64,
    pub degree: u64,
}

impl LocalFieldData {
    pub fn new(e: u64, f: u64) -> Result<LocalFieldData> {
        if e == 0 || f == 0 {
            return Err(WeilError::InvalidInput("local degrees must be positive".into()));
        }
        Ok(LocalFieldData { e, f, degree: e * f })
    }
}

/// The center as the fixed field of `stabilizer` inside K.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CenterData {
    pub conductor: u64,
    pub stabilizer: Vec<u64>,
    pub degree: u64,
    /// Whether complex conjugation lies in the stabilizer (C totally real).
    pub totally_real: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaceInvariant {
    /// Smallest label of a prime of K above this place.
    pub label: u64,
    pub local: LocalFieldData,
    /// [K_w : C_v].
    pub local_index: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub invariant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantProfile {
    pub p: u64,
    pub q_exp: u64,
    pub center: CenterData,
    pub places: Vec<PlaceInvariant>,
    #[serde(serialize_with = "serialize_rational")]
    pub real_invariant: Rational,
    pub weight: i64,
}

impl InvariantProfile {
    /// A bare profile from invariants and a center degree (places unlabeled).
    pub fn from_entries(entries: &[Rational], center_degree: u64) -> InvariantProfile {
        InvariantProfile {
            p: 0,
            q_exp: 1,
            center: CenterData { conductor: 0, stabilizer: Vec::new(), degree: center_degree, totally_real: false },
            places: entries
                .iter()
                .enumerate()
                .map(|(i, r)| PlaceInvariant {
                    label: i as u64,
                    local: LocalFieldData { e: 1, f: 1, degree: 1 },
                    local_index: 1,
                    invariant: mod_one(r),
                })
                .collect(),
            real_invariant: Rational::zero(),
            weight: 0,
        }
    }

    pub fn entries(&self) -> Vec<Rational> {
        self.places.iter().map(|p| p.invariant.clone()).collect()
    }
}

/// Invariant at a real place: 1/2 when the place is real and the weight is odd.
pub fn real_place_invariant(weight: i64, place_is_real: bool) -> Rational {
    if place_is_real && weight % 2 != 0 {
        rational(1, 2)
    } else {
        Rational::zero()
    }
}

fn orbits(ctx: &WeilContext, subgroup: &[u64]) -> Vec<Vec<usize>> {
    let sp = &ctx.splitting;
    let mut seen = vec![false; sp.primes.len()];
    let mut out = Vec::new();
    for i in 0..sp.primes.len() {
        if seen[i] {
            continue;
        }
        let orbit: BTreeSet<usize> = subgroup.iter().map(|&a| sp.act(a, i)).collect();
        for &j in &orbit {
            seen[j] = true;
        }
        out.push(orbit.into_iter().collect());
    }
    out
}

/// Local data of the places of C = K^S above p, one entry per S-orbit on X,
/// with the index [K_w : C_v] and e(w/v).
fn center_places(ctx: &WeilContext, subgroup: &[u64]) -> Vec<(Vec<usize>, LocalFieldData, u64, u64)> {
    let sp = &ctx.splitting;
    let d_cap_s = subgroup.iter().filter(|&&a| sp.in_decomposition_group(a)).count() as u64;
    let i_cap_s = subgroup.iter().filter(|&&a| sp.in_inertia_group(a)).count() as u64;
    let e_v = sp.e / i_cap_s;
    let f_v = sp.f / (d_cap_s / i_cap_s);
    orbits(ctx, subgroup)
        .into_iter()
        .map(|o| (o, LocalFieldData { e: e_v, f: f_v, degree: e_v * f_v }, d_cap_s, i_cap_s))
        .collect()
}

fn center_data(ctx: &WeilContext, subgroup: &[u64]) -> CenterData {
    let n = ctx.field.conductor;
    CenterData {
        conductor: n,
        stabilizer: subgroup.to_vec(),
        degree: ctx.field.degree / subgroup.len() as u64,
        totally_real: subgroup.contains(&(n - 1)),
    }
}

/// Tate's formula for pi^n, viewed as a Weil p^q_exp-number, over the center
/// cut out by `subgroup` (which must fix the slope of pi).
pub fn tate_invariants_over(
    ctx: &WeilContext,
    pi: &WeilElement,
    q_exp: u64,
    subgroup: &[u64],
) -> Result<InvariantProfile> {
    if q_exp == 0 {
        return Err(WeilError::InvalidInput("q must be a positive power of p".into()));
    }
    let sp = &ctx.splitting;
    if subgroup.iter().any(|&a| pi.slope.act(sp, a) != pi.slope) {
        return Err(WeilError::InvalidInput("center subgroup does not fix the slope".into()));
    }
    let n = pi.level as i64;
    let places = center_places(ctx, subgroup)
        .into_iter()
        .map(|(orbit, local, d_cap_s, _)| {
            let i = orbit[0];
            // inv_v = ord_v(pi^n) / ord_v(p^E) * [C_v : Q_p] = s_w n / (E |D ∩ S|)
            let raw = Rational::new(BigInt::from(pi.slope.entries[i] * n), BigInt::from(q_exp as i64 * d_cap_s as i64));
            PlaceInvariant { label: sp.primes[i], local, local_index: d_cap_s, invariant: mod_one(&raw) }
        })
        .collect();
    let center = center_data(ctx, subgroup);
    let weight = 0;
    Ok(InvariantProfile {
        p: ctx.p(),
        q_exp,
        real_invariant: real_place_invariant(weight, center.totally_real),
        center,
        places,
        weight,
    })
}

/// The profile over Q[pi^mn], the fixed field of the slope stabilizer.
pub fn tate_invariants(ctx: &WeilContext, pi: &WeilElement, q_exp: u64) -> Result<InvariantProfile> {
    let stab = slope_stabilizer(ctx, &pi.slope);
    tate_invariants_over(ctx, pi, q_exp, &stab)
}

/// The profile over Q[pi^n] itself (stabilizer of the explicit element),
/// which is the center of the endomorphism algebra of the motive of pi^n.
pub fn endomorphism_invariants(ctx: &WeilContext, pi: &WeilElement, q_exp: u64) -> Result<InvariantProfile> {
    let x = pi.explicit.as_ref().ok_or(WeilError::MissingCertificate { index: 0 })?;
    let ring = ctx.ring();
    let stab: Vec<u64> = ctx.field.galois_group().into_iter().filter(|&a| &x.galois(ring, a) == x).collect();
    tate_invariants_over(ctx, pi, q_exp, &stab)
}

pub fn is_commutative(profile: &InvariantProfile) -> bool {
    profile.places.iter().all(|p| p.invariant.is_zero()) && profile.real_invariant.is_zero()
}

/// [D : F]^(1/2), the lcm of the orders of the local invariants in Q/Z.
pub fn schur_index(profile: &InvariantProfile) -> BigInt {
    profile
        .places
        .iter()
        .map(|p| order_in_q_mod_z(&p.invariant))
        .chain(std::iter::once(order_in_q_mod_z(&profile.real_invariant)))
        .fold(BigInt::one(), |acc, o| acc.lcm(&o))
}

/// rank = [D : F]^(1/2) [F : Q].
pub fn division_rank(profile: &InvariantProfile) -> BigInt {
    schur_index(profile) * BigInt::from(profile.center.degree)
}

/// Invariant of B(L ⊗ F, sigma, a) for L/Q_p unramified cyclic of degree n
/// with Frobenius sigma: ord_F(a) f / n mod 1.
pub fn cyclic_invariant(local: &LocalFieldData, n: u64, ord_a: i64) -> Result<Rational> {
    if n == 0 {
        return Err(WeilError::InvalidInput("cyclic degree must be positive".into()));
    }
    let raw = Rational::new(BigInt::from(ord_a) * BigInt::from(local.f), BigInt::from(n));
    Ok(mod_one(&raw))
}

pub fn reciprocity_check(profile: &InvariantProfile) -> bool {
    let total = profile.places.iter().fold(profile.real_invariant.clone(), |acc, p| acc + &p.invariant);
    mod_one(&total).is_zero()
}

/// One place v | p of Q[pi^mn] in the comparison between the cyclic algebra
/// B(L ⊗ Q[pi^mn], sigma, pi^mn) and Tate's formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclicComparison {
    pub label: u64,
    pub ord_v: i64,
    #[serde(serialize_with = "serialize_rational")]
    pub cyclic: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub tate: Rational,
    pub agree: bool,
}

/// For L cyclic of degree mn in which p is inert (sigma = Frobenius), compare
/// the local invariants of B(L ⊗ Q[pi^mn], sigma, pi^mn) at v | p with
/// Tate's formula. ord_v(pi^mn) is read off the explicit certificate, while
/// the Tate side uses only the slope vector.
pub fn cyclic_vs_tate(ctx: &WeilContext, pi: &WeilElement) -> Result<Vec<CyclicComparison>> {
    let x: &PPowerElement = pi.explicit.as_ref().ok_or(WeilError::MissingCertificate { index: 0 })?;
    let mn = ctx.m() * pi.level;
    let stab = slope_stabilizer(ctx, &pi.slope);
    let tate = tate_invariants_over(ctx, pi, pi.level, &stab)?;
    let ords = ctx.splitting.valuations_of(ctx.ring(), x)?;
    let m = ctx.m() as i64;
    let places = center_places(ctx, &stab);
    let mut out = Vec::with_capacity(places.len());
    for ((orbit, local, _, e_wv), t) in places.into_iter().zip(&tate.places) {
        let ord_w = ords[orbit[0]] * m;
        if ord_w % e_wv as i64 != 0 {
            return Err(WeilError::InvalidInput(format!("pi^mn has fractional valuation at the place {}", t.label)));
        }
        let ord_v = ord_w / e_wv as i64;
        let cyclic = cyclic_invariant(&local, mn, ord_v)?;
        out.push(CyclicComparison {
            label: t.label,
            ord_v,
            agree: cyclic == t.invariant,
            cyclic,
            tate: t.invariant.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::{describe_field_with, FieldTable};
    use crate::weil::{construct_weil, kernel_basis, SlopeVector};
    use proptest::prelude::*;

    fn ctx(n: u64, p: u64) -> WeilContext {
        WeilContext::new(describe_field_with(n, &FieldTable::embedded()).unwrap(), p).unwrap()
    }

    fn gaussian_pi(c: &WeilContext) -> WeilElement {
        construct_weil(c, &SlopeVector::new(&c.splitting, vec![1, -1]).unwrap(), 1, 3).unwrap()
    }

    #[test]
    fn tate_examples() {
        let c = ctx(4, 5);
        let pi = gaussian_pi(&c);
        let prof = tate_invariants(&c, &pi, 1).unwrap();
        assert_eq!(prof.places.len(), 2);
        assert!(is_commutative(&prof));
        let prof = tate_invariants(&c, &pi, 2).unwrap();
        assert_eq!(prof.entries(), vec![rational(1, 2), rational(1, 2)]);
        assert!(reciprocity_check(&prof));
        assert_eq!(division_rank(&prof), BigInt::from(4));
        let tors = WeilElement::root_of_unity(&c, 1, 1).unwrap();
        let prof = tate_invariants(&c, &tors, 1).unwrap();
        assert!(is_commutative(&prof));
        assert_eq!(prof.center.degree, 1);
        assert_eq!(prof.places.len(), 1);
    }

    #[test]
    fn rank_examples() {
        let zero = InvariantProfile::from_entries(&[Rational::zero()], 2);
        assert!(is_commutative(&zero));
        assert_eq!(division_rank(&zero), BigInt::from(2));
        let halves = InvariantProfile::from_entries(&[rational(1, 2), rational(1, 2)], 2);
        assert_eq!(division_rank(&halves), BigInt::from(4));
        let thirds = InvariantProfile::from_entries(&[rational(1, 3), rational(2, 3)], 3);
        assert_eq!(division_rank(&thirds), BigInt::from(9));
        assert!(reciprocity_check(&thirds));
        assert!(!reciprocity_check(&InvariantProfile::from_entries(&[rational(1, 3), rational(1, 3)], 3)));
    }

    #[test]
    fn cyclic_examples() {
        let l = |e, f| LocalFieldData::new(e, f).unwrap();
        for n in 1..10 {
            assert_eq!(cyclic_invariant(&l(1, 1), n, 1).unwrap(), mod_one(&rational(1, n as i64)));
            for k in -5..5 {
                assert_eq!(cyclic_invariant(&l(1, 1), n, k).unwrap(), mod_one(&rational(k, n as i64)));
            }
        }
        assert_eq!(cyclic_invariant(&l(1, 2), 4, 1).unwrap(), rational(1, 2));
        // ramification does not enter: e cancels against ord_F(p)
        assert_eq!(cyclic_invariant(&l(3, 2), 4, 1).unwrap(), rational(1, 2));
    }

    #[test]
    fn cyclic_invariant_vanishes_exactly_on_norms() {
        // unramified L/F of degree n/f: a is a norm iff n/f divides ord_F(a)
        let l = LocalFieldData::new(1, 2).unwrap();
        for k in -12..12 {
            let inv = cyclic_invariant(&l, 6, k).unwrap();
            assert_eq!(inv.is_zero(), k % 3 == 0);
            let sum = cyclic_invariant(&l, 6, k + 1).unwrap();
            assert_eq!(sum, mod_one(&(inv + cyclic_invariant(&l, 6, 1).unwrap())));
        }
    }

    #[test]
    fn real_branch() {
        assert_eq!(real_place_invariant(1, true), rational(1, 2));
        assert_eq!(real_place_invariant(-3, true), rational(1, 2));
        assert!(real_place_invariant(0, true).is_zero());
        assert!(real_place_invariant(1, false).is_zero());
    }

    #[test]
    fn ramified_center_has_nonzero_invariants_at_q_p() {
        // Q(zeta_20), p = 5: e = 4, two primes; over Q[pi^mn] the invariant
        // is 1/4, while over the field generated by pi^n it vanishes
        let c = ctx(20, 5);
        assert_eq!((c.splitting.e, c.splitting.g), (4, 2));
        let s = kernel_basis(&c.splitting)[0].clone();
        let pi = construct_weil(&c, &s, 1, 2).unwrap();
        let prof = tate_invariants(&c, &pi, 1).unwrap();
        assert_eq!(prof.entries(), vec![rational(1, 4), rational(3, 4)]);
        assert!(reciprocity_check(&prof));
        let end = endomorphism_invariants(&c, &pi, 1).unwrap();
        assert!(is_commutative(&end));
        for cmp in cyclic_vs_tate(&c, &pi).unwrap() {
            assert!(cmp.agree);
        }
    }

    #[test]
    fn cyclic_matches_tate_for_zeta12() {
        let c = ctx(12, 5);
        for s in kernel_basis(&c.splitting) {
            let pi = construct_weil(&c, &s, 2, 3).unwrap();
            let cmp = cyclic_vs_tate(&c, &pi).unwrap();
            assert!(cmp.iter().all(|x| x.agree));
            assert!(cmp.iter().any(|x| x.tate == rational(1, 2)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn profiles_satisfy_reciprocity(a in -3i64..=3, b in -3i64..=3, e in 1u64..=6) {
            let c = ctx(5, 11);
            let basis = kernel_basis(&c.splitting);
            let s = basis[0].scale(a).add(&basis[1].scale(b));
            let pi = construct_weil(&c, &s, 1, 3).unwrap();
            let prof = tate_invariants(&c, &pi, e).unwrap();
            prop_assert!(reciprocity_check(&prof));
            if e == 1 {
                prop_assert!(is_commutative(&prof));
            }
        }
    }
}
