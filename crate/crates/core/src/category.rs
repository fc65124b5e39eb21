//! Weight-0 motives over F_p as formal sums of Galois orbits of Weil numbers.
//!
//! At level 1 every Weil number lies in K and objects decompose exactly.
//! Above level 1 a simple is tracked by its slope orbit and torsion label
//! only, and its rank is known up to the bounds [c, mn c].

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::cyclotomic::PPowerElement;
use crate::error::{Result, WeilError};
use crate::weil::{center_degree, torsion_order, WeilContext, WeilElement};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SimpleClass {
    pub level: u64,
    /// Galois orbit of pi, sorted; empty above level 1.
    pub orbit: Vec<PPowerElement>,
    /// Galois orbit of the slope vector, sorted.
    pub slope_orbit: Vec<Vec<i64>>,
    /// Torsion label mod mn (above level 1 only; 0 at level 1).
    pub torsion_label: u64,
    pub rank_lower: u64,
    pub rank_upper: u64,
    /// [Q[pi^mn] : Q], the center of End over the algebraic closure.
    pub geometric_center_degree: u64,
}

impl SimpleClass {
    pub fn representative(&self) -> Option<&PPowerElement> {
        self.orbit.first()
    }

    pub fn rank(&self) -> Option<u64> {
        (self.rank_lower == self.rank_upper).then_some(self.rank_lower)
    }

    pub fn is_unit(&self) -> bool {
        match self.level {
            1 => self.orbit.len() == 1 && self.orbit[0].is_one(),
            _ => self.torsion_label == 0 && self.slope_orbit.iter().all(|v| v.iter().all(|&a| a == 0)),
        }
    }
}

impl fmt::Display for SimpleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.representative() {
            Some(x) => write!(f, "[{x}]"),
            None => write!(f, "[slope {:?}, t={}]", self.slope_orbit[0], self.torsion_label),
        }
    }
}

fn galois_orbit(ctx: &WeilContext, x: &PPowerElement) -> Vec<PPowerElement> {
    let ring = ctx.ring();
    let mut orbit: Vec<PPowerElement> = ctx.field.galois_group().into_iter().map(|a| x.galois(ring, a)).collect();
    orbit.sort();
    orbit.dedup();
    orbit
}

fn slope_orbit(ctx: &WeilContext, pi: &WeilElement) -> Vec<Vec<i64>> {
    let mut orbit: Vec<Vec<i64>> =
        ctx.field.galois_group().into_iter().map(|a| pi.slope.act(&ctx.splitting, a).entries).collect();
    orbit.sort();
    orbit.dedup();
    orbit
}

fn simple_of_explicit(ctx: &WeilContext, x: &PPowerElement, geometric_center_degree: u64) -> SimpleClass {
    let orbit = galois_orbit(ctx, x);
    let rank = orbit.len() as u64;
    let pi = crate::weil::weil_from_explicit(ctx, x.clone(), 1).expect("level-1 weight-0 element");
    SimpleClass {
        level: 1,
        slope_orbit: slope_orbit(ctx, &pi),
        orbit,
        torsion_label: 0,
        rank_lower: rank,
        rank_upper: rank,
        geometric_center_degree,
    }
}

pub fn simple_from_weil(ctx: &WeilContext, pi: &WeilElement) -> SimpleClass {
    let c = center_degree(ctx, pi);
    match (&pi.explicit, pi.level) {
        (Some(x), 1) => simple_of_explicit(ctx, x, c),
        _ => SimpleClass {
            level: pi.level,
            orbit: Vec::new(),
            slope_orbit: slope_orbit(ctx, pi),
            torsion_label: pi.torsion_exponent.value(),
            rank_lower: c,
            rank_upper: ctx.m() * pi.level * c,
            geometric_center_degree: c,
        },
    }
}

/// A semisimple object: simple classes with positive multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MotiveObject {
    pub terms: BTreeMap<SimpleClass, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankBounds {
    pub lower: u64,
    pub upper: u64,
}

impl MotiveObject {
    pub fn zero() -> MotiveObject {
        MotiveObject::default()
    }

    pub fn simple(class: SimpleClass) -> MotiveObject {
        MotiveObject::simple_with_multiplicity(class, 1)
    }

    pub fn simple_with_multiplicity(class: SimpleClass, k: u64) -> MotiveObject {
        let mut terms = BTreeMap::new();
        if k > 0 {
            terms.insert(class, k);
        }
        MotiveObject { terms }
    }

    pub fn unit(ctx: &WeilContext) -> MotiveObject {
        MotiveObject::unit_at(ctx, 1)
    }

    /// The class of pi = 1 at level n; its rank is 1 at every level.
    pub fn unit_at(ctx: &WeilContext, level: u64) -> MotiveObject {
        if level == 1 {
            return MotiveObject::simple(simple_of_explicit(ctx, &PPowerElement::one(ctx.ring(), ctx.p()), 1));
        }
        MotiveObject::simple(SimpleClass {
            level,
            orbit: Vec::new(),
            slope_orbit: vec![vec![0; ctx.splitting.primes.len()]],
            torsion_label: 0,
            rank_lower: 1,
            rank_upper: 1,
            geometric_center_degree: 1,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn direct_sum(&self, other: &MotiveObject) -> MotiveObject {
        let mut terms = self.terms.clone();
        for (s, k) in &other.terms {
            *terms.entry(s.clone()).or_insert(0) += k;
        }
        MotiveObject { terms }
    }

    pub fn rank_bounds(&self) -> RankBounds {
        self.terms.iter().fold(RankBounds { lower: 0, upper: 0 }, |acc, (s, k)| RankBounds {
            lower: acc.lower + k * s.rank_lower,
            upper: acc.upper + k * s.rank_upper,
        })
    }

    pub fn rank(&self) -> Option<u64> {
        let b = self.rank_bounds();
        (b.lower == b.upper).then_some(b.lower)
    }

    pub fn multiplicity(&self, class: &SimpleClass) -> u64 {
        self.terms.get(class).copied().unwrap_or(0)
    }
}

impl fmt::Display for MotiveObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(s, &k)| if k == 1 { s.to_string() } else { format!("{k}*{s}") }).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Eigenvalue multiset of a level-1 object.
fn eigenvalues(x: &MotiveObject) -> Result<BTreeMap<PPowerElement, u64>> {
    let mut out = BTreeMap::new();
    for (s, &k) in &x.terms {
        if s.level != 1 {
            return Err(WeilError::UnsupportedLevel(s.level));
        }
        for e in &s.orbit {
            *out.entry(e.clone()).or_insert(0) += k;
        }
    }
    Ok(out)
}

/// Regroups a Galois-stable eigenvalue multiset into orbits.
fn regroup(ctx: &WeilContext, mut values: BTreeMap<PPowerElement, u64>) -> MotiveObject {
    let mut out = MotiveObject::zero();
    while let Some((z, &c)) = values.iter().next() {
        let z = z.clone();
        let class = simple_of_explicit(ctx, &z, 0);
        for e in &class.orbit {
            let slot = values.get_mut(e).expect("eigenvalue multiset is Galois stable");
            assert!(*slot >= c, "eigenvalue multiset is Galois stable");
            *slot -= c;
            if *slot == 0 {
                values.remove(e);
            }
        }
        let pi = crate::weil::weil_from_explicit(ctx, z, 1).expect("level-1 weight-0 element");
        let class = SimpleClass { geometric_center_degree: center_degree(ctx, &pi), ..class };
        out = out.direct_sum(&MotiveObject::simple_with_multiplicity(class, c));
    }
    out
}

/// X (x) Y at level 1: eigenvalues multiply pairwise.
pub fn tensor(ctx: &WeilContext, x: &MotiveObject, y: &MotiveObject) -> Result<MotiveObject> {
    let ex = eigenvalues(x)?;
    let ey = eigenvalues(y)?;
    let ring = ctx.ring();
    let mut products = BTreeMap::new();
    for (a, ka) in &ex {
        for (b, kb) in &ey {
            *products.entry(a.mul(ring, b)).or_insert(0) += ka * kb;
        }
    }
    Ok(regroup(ctx, products))
}

/// Termwise pi -> pi^{-1} (complex conjugation in weight 0).
pub fn dual(ctx: &WeilContext, x: &MotiveObject) -> MotiveObject {
    let ring = ctx.ring();
    let mut out = MotiveObject::zero();
    for (s, &k) in &x.terms {
        let d = if s.level == 1 {
            let mut orbit: Vec<PPowerElement> = s.orbit.iter().map(|e| e.conj(ring)).collect();
            orbit.sort();
            SimpleClass { orbit, ..s.clone() }
        } else {
            let mut slope_orbit: Vec<Vec<i64>> = s.slope_orbit.iter().map(|v| v.iter().map(|a| -a).collect()).collect();
            slope_orbit.sort();
            let mn = ctx.m() * s.level;
            SimpleClass { slope_orbit, torsion_label: (mn - s.torsion_label) % mn, ..s.clone() }
        };
        out = out.direct_sum(&MotiveObject::simple_with_multiplicity(d, k));
    }
    out
}

/// The torsion of W(p, n) is cyclic of order mn: zeta_mn has additive order
/// mn, and t -> (zeta_mn^t)^n = zeta_m^t computed in K has image of size m
/// and kernel of size n.
pub fn torsion_character_check(ctx: &WeilContext, n: u64) -> Result<bool> {
    let expected = torsion_order(ctx, n)?;
    let gen = WeilElement::root_of_unity(ctx, n, 1)?;
    let mn = gen.torsion_order();
    let cyclic = gen.torsion_exponent.additive_order() == mn;
    let ring = ctx.ring();
    let mut image = std::collections::BTreeSet::new();
    let mut kernel = 0u64;
    let mut cur = PPowerElement::one(ring, ctx.p());
    let step = gen.explicit.clone().expect("roots of unity are explicit");
    for _ in 0..mn {
        if cur.is_one() {
            kernel += 1;
        }
        image.insert(cur.clone());
        cur = cur.mul(ring, &step);
    }
    Ok(cyclic && mn == expected && image.len() as u64 * kernel == mn && kernel == n && cur.is_one())
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub expression: String,
    pub decomposition: String,
    pub rank: Option<u64>,
    pub rank_bounds: RankBounds,
}

fn demo_row(expression: String, x: &MotiveObject) -> DemoRow {
    DemoRow { expression, decomposition: x.to_string(), rank: x.rank(), rank_bounds: x.rank_bounds() }
}

/// Decomposition table for a default object set: the unit, the simple of
/// the first kernel basis vector, zeta_m, and their tensor squares and duals.
pub fn demo(ctx: &WeilContext, coeff_bound: u64) -> Result<Vec<DemoRow>> {
    let n = ctx.level_unit();
    let basis = crate::weil::kernel_basis(&ctx.splitting);
    let zeta = WeilElement::root_of_unity(ctx, n, 1)?;
    let mut rows = Vec::new();
    let unit = MotiveObject::unit_at(ctx, n);
    rows.push(demo_row("1".into(), &unit));
    let mut objects = vec![("zeta".to_string(), MotiveObject::simple(simple_from_weil(ctx, &zeta)))];
    if let Some(s) = basis.first() {
        let pi = crate::weil::construct_weil(ctx, s, n, coeff_bound)?;
        objects.insert(0, ("pi".to_string(), MotiveObject::simple(simple_from_weil(ctx, &pi))));
    }
    for (name, x) in &objects {
        rows.push(demo_row(format!("S({name})"), x));
        rows.push(demo_row(format!("dual S({name})"), &dual(ctx, x)));
        match tensor(ctx, x, x) {
            Ok(t) => rows.push(demo_row(format!("S({name}) (x) S({name})"), &t)),
            Err(e) => rows.push(DemoRow {
                expression: format!("S({name}) (x) S({name})"),
                decomposition: format!("unsupported: {e}"),
                rank: None,
                rank_bounds: RankBounds { lower: 0, upper: 0 },
            }),
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::CyclotomicRing;
    use crate::weil::{construct_weil, kernel_basis, weil_from_explicit};
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn gaussian(p: u64) -> WeilContext {
        WeilContext::from_conductor(4, p).unwrap()
    }

    fn three_four(ctx: &WeilContext) -> WeilElement {
        let ring = CyclotomicRing::new(4);
        let x = PPowerElement::new(ring.from_i64s(&[3, 4]), 5, 1);
        weil_from_explicit(ctx, x, 1).unwrap()
    }

    #[test]
    fn worked_decomposition() {
        let ctx = gaussian(5);
        let pi = three_four(&ctx);
        let s = simple_from_weil(&ctx, &pi);
        assert_eq!(s.rank(), Some(2));
        assert_eq!(s.orbit.len(), 2);
        let sbar = simple_from_weil(&ctx, &pi.inverse(&ctx));
        assert_eq!(s, sbar);
        let t = tensor(&ctx, &MotiveObject::simple(s.clone()), &MotiveObject::simple(sbar)).unwrap();
        let sq = simple_from_weil(&ctx, &pi.mul(&ctx, &pi));
        let expected =
            MotiveObject::unit(&ctx).direct_sum(&MotiveObject::unit(&ctx)).direct_sum(&MotiveObject::simple(sq));
        assert_eq!(t, expected);
        assert_eq!(t.rank(), Some(4));
        assert_eq!(dual(&ctx, &MotiveObject::simple(s.clone())), MotiveObject::simple(s));
    }

    #[test]
    fn gaussian_units() {
        let ctx = gaussian(5);
        let i = WeilElement::root_of_unity(&ctx, 1, 1).unwrap();
        let si = simple_from_weil(&ctx, &i);
        assert_eq!(si.rank(), Some(2));
        assert_eq!(si.geometric_center_degree, 1);
        let minus_one = simple_from_weil(&ctx, &WeilElement::root_of_unity(&ctx, 1, 2).unwrap());
        assert_eq!(minus_one.rank(), Some(1));
        let t = tensor(&ctx, &MotiveObject::simple(si.clone()), &MotiveObject::simple(si)).unwrap();
        // {i, -i} x {i, -i} = {-1, 1, 1, -1}
        let expected = MotiveObject::simple_with_multiplicity(minus_one, 2).direct_sum(
            &MotiveObject::simple_with_multiplicity(MotiveObject::unit(&ctx).terms.into_keys().next().unwrap(), 2),
        );
        assert_eq!(t, expected);
        let one = simple_from_weil(&ctx, &WeilElement::root_of_unity(&ctx, 1, 0).unwrap());
        assert!(one.is_unit());
        assert_eq!(one.rank(), Some(1));
    }

    #[test]
    fn orbit_oracle_by_brute_force() {
        // orbit of (3+4i)/5 computed by hand: the two conjugates
        let ctx = gaussian(5);
        let s = simple_from_weil(&ctx, &three_four(&ctx));
        let ring = CyclotomicRing::new(4);
        let a = PPowerElement::new(ring.from_i64s(&[3, 4]), 5, 1);
        let b = PPowerElement::new(ring.element(vec![BigInt::from(3), BigInt::from(-4)]), 5, 1);
        let mut expected = vec![a, b];
        expected.sort();
        assert_eq!(s.orbit, expected);
    }

    #[test]
    fn torsion_checks() {
        assert!(torsion_character_check(&gaussian(5), 1).unwrap());
        assert!(torsion_character_check(&WeilContext::from_conductor(3, 7).unwrap(), 2).unwrap());
        assert!(torsion_character_check(&gaussian(5), 3).unwrap());
        assert!(torsion_character_check(&gaussian(3), 2).unwrap());
        assert!(torsion_character_check(&gaussian(3), 1).is_err());
        assert_eq!(torsion_order(&WeilContext::from_conductor(3, 7).unwrap(), 2).unwrap(), 12);
    }

    #[test]
    fn higher_level_is_bounded_and_refuses_tensor() {
        let ctx = gaussian(3);
        let zeta = WeilElement::root_of_unity(&ctx, 2, 1).unwrap();
        let s = simple_from_weil(&ctx, &zeta);
        assert_eq!(s.rank(), None);
        assert_eq!((s.rank_lower, s.rank_upper), (1, 8));
        let x = MotiveObject::simple(s);
        assert!(matches!(tensor(&ctx, &x, &x), Err(WeilError::UnsupportedLevel(2))));
        assert_eq!(dual(&ctx, &dual(&ctx, &x)), x);
    }

    #[test]
    fn constructed_simples_have_commutative_rank() {
        for (c, p) in [(4u64, 5u64), (4, 13), (3, 7), (3, 13), (5, 11), (12, 13)] {
            let ctx = WeilContext::from_conductor(c, p).unwrap();
            for b in kernel_basis(&ctx.splitting) {
                let pi = construct_weil(&ctx, &b, 1, 4).unwrap();
                let s = simple_from_weil(&ctx, &pi);
                assert_eq!(s.rank(), Some(s.orbit.len() as u64));
                assert_eq!(s.rank(), Some(s.geometric_center_degree), "conductor {c}, p {p}");
            }
        }
    }

    #[test]
    fn demo_table() {
        let rows = demo(&gaussian(5), 4).unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0].rank, Some(1));
        assert!(rows.iter().all(|r| r.rank.is_some()));
        let rows = demo(&gaussian(3), 4).unwrap();
        assert_eq!(rows[0].rank, Some(1));
        assert!(rows.iter().any(|r| r.decomposition.starts_with("unsupported")));
    }

    fn random_object(ctx: &WeilContext, picks: &[(i64, i64, u64)]) -> MotiveObject {
        let basis = kernel_basis(&ctx.splitting);
        picks.iter().fold(MotiveObject::zero(), |acc, &(k, t, mult)| {
            let s = basis[0].scale(k);
            let pi = construct_weil(ctx, &s, 1, 4).unwrap().twist(ctx, t).unwrap();
            acc.direct_sum(&MotiveObject::simple_with_multiplicity(simple_from_weil(ctx, &pi), mult))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn category_laws(
            gauss in any::<bool>(),
            xs in prop::collection::vec((-2i64..=2, 0i64..6, 1u64..=2), 0..3),
            ys in prop::collection::vec((-2i64..=2, 0i64..6, 1u64..=2), 0..3),
        ) {
            let ctx = if gauss { gaussian(5) } else { WeilContext::from_conductor(3, 7).unwrap() };
            let x = random_object(&ctx, &xs);
            let y = random_object(&ctx, &ys);
            let xy = tensor(&ctx, &x, &y).unwrap();
            prop_assert_eq!(xy.rank(), Some(x.rank().unwrap() * y.rank().unwrap()));
            prop_assert_eq!(&xy, &tensor(&ctx, &y, &x).unwrap());
            prop_assert_eq!(dual(&ctx, &dual(&ctx, &x)), x.clone());
            prop_assert_eq!(dual(&ctx, &x).rank(), x.rank());
            prop_assert_eq!(tensor(&ctx, &x, &MotiveObject::unit(&ctx)).unwrap(), x.clone());
            prop_assert_eq!(dual(&ctx, &xy), tensor(&ctx, &dual(&ctx, &x), &dual(&ctx, &y)).unwrap());
        }
    }
}
