//! Weight-0 Weil numbers in a cyclotomic field K.
//!
//! A Weil element of level n is stored through pi^n in K: its slope vector
//! s_w = n_w(pi) (relative to q = p), a torsion exponent t mod mn, and
//! optionally an exact certificate for pi^n.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cyclotomic::{
    describe_field, find_prime_generator, split_prime, CyclotomicField, CyclotomicRing, PPowerElement, PrimeSplitting,
    RingElement,
};
use crate::error::{Result, WeilError};
use crate::modmath::{format_rational, inv_mod, serialize_rationals, valuation_bigint, Rational, ResidueClass};

/// A field, a prime p and its splitting, bundled for the Weil-number operations.
#[derive(Debug, Clone)]
pub struct WeilContext {
    pub field: CyclotomicField,
    pub splitting: PrimeSplitting,
    ring: Arc<CyclotomicRing>,
}

impl WeilContext {
    pub fn new(field: CyclotomicField, p: u64) -> Result<WeilContext> {
        let splitting = split_prime(&field, p)?;
        let ring = field.ring();
        Ok(WeilContext { field, splitting, ring })
    }

    pub fn from_conductor(conductor: u64, p: u64) -> Result<WeilContext> {
        WeilContext::new(describe_field(conductor)?, p)
    }

    pub fn ring(&self) -> &CyclotomicRing {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.splitting.p
    }

    pub fn m(&self) -> u64 {
        self.field.torsion_order
    }

    /// f_K * h_K, the smallest admissible level.
    pub fn level_unit(&self) -> u64 {
        self.splitting.f * self.field.class_number
    }

    pub fn check_level(&self, n: u64) -> Result<()> {
        let required = self.level_unit();
        if n == 0 || !n.is_multiple_of(required) {
            return Err(WeilError::Divisibility { n, required });
        }
        Ok(())
    }
}

/// Integer vector on the primes X above p with vanishing fiber sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SlopeVector {
    pub conductor: u64,
    pub p: u64,
    pub labels: Vec<u64>,
    pub entries: Vec<i64>,
}

impl SlopeVector {
    pub fn new(splitting: &PrimeSplitting, entries: Vec<i64>) -> Result<SlopeVector> {
        if entries.len() != splitting.primes.len() {
            return Err(WeilError::InvalidInput(format!(
                "slope has {} entries, expected {} (one per prime above {})",
                entries.len(),
                splitting.primes.len(),
                splitting.p
            )));
        }
        let s =
            SlopeVector { conductor: splitting.conductor, p: splitting.p, labels: splitting.primes.clone(), entries };
        if !s.in_kernel(splitting) {
            return Err(WeilError::InvalidInput(format!("slope {:?} has a nonzero fiber sum over Y", s.entries)));
        }
        Ok(s)
    }

    pub fn zero(splitting: &PrimeSplitting) -> SlopeVector {
        SlopeVector {
            conductor: splitting.conductor,
            p: splitting.p,
            labels: splitting.primes.clone(),
            entries: vec![0; splitting.primes.len()],
        }
    }

    pub fn in_kernel(&self, splitting: &PrimeSplitting) -> bool {
        let mut sums = vec![0i64; splitting.real_primes.len()];
        for (i, &a) in self.entries.iter().enumerate() {
            sums[splitting.fiber[i]] += a;
        }
        sums.iter().all(|&x| x == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &SlopeVector) -> SlopeVector {
        SlopeVector { entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(), ..self.clone() }
    }

    pub fn scale(&self, k: i64) -> SlopeVector {
        SlopeVector { entries: self.entries.iter().map(|a| a * k).collect(), ..self.clone() }
    }

    pub fn neg(&self) -> SlopeVector {
        self.scale(-1)
    }

    /// sigma_a(s): the entry at w moves to sigma_a(w).
    pub fn act(&self, splitting: &PrimeSplitting, a: u64) -> SlopeVector {
        let mut entries = vec![0; self.entries.len()];
        for (i, &v) in self.entries.iter().enumerate() {
            entries[splitting.act(a, i)] = v;
        }
        SlopeVector { entries, ..self.clone() }
    }
}

/// Sum of n_sigma * sigma over Gal(K/Q), keyed by a in (Z/N)^x.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfinityType {
    pub coefficients: BTreeMap<u64, i64>,
}

impl InfinityType {
    /// One coefficient per conjugate pair (w, iota w): +s_w at the smallest
    /// lift a of w and -s_w at -a.
    pub fn from_slope(ctx: &WeilContext, s: &SlopeVector) -> InfinityType {
        let sp = &ctx.splitting;
        let n = sp.conductor;
        let mut coefficients = BTreeMap::new();
        for (i, &label) in sp.primes.iter().enumerate() {
            let j = sp.conj_index(i);
            if i == j || label > sp.primes[j] || s.entries[i] == 0 {
                continue;
            }
            let a = sp.lift(label);
            coefficients.insert(a, s.entries[i]);
            coefficients.insert(n - a, -s.entries[i]);
        }
        InfinityType { coefficients }
    }

    pub fn is_weight_zero(&self, conductor: u64) -> bool {
        self.coefficients.iter().all(|(&a, &c)| self.coefficients.get(&(conductor - a)).copied().unwrap_or(0) == -c)
    }

    /// Image in Z^X: the coefficient of w_c is the sum of n_sigma over sigma with sigma(w_1) = w_c.
    pub fn slope(&self, splitting: &PrimeSplitting) -> SlopeVector {
        let mut s = SlopeVector::zero(splitting);
        for (&a, &c) in &self.coefficients {
            let idx = splitting.index_of(splitting.label_of_unit(a)).unwrap();
            s.entries[idx] += c;
        }
        s
    }
}

/// (n_w(x))_w for x at q = p^q_exp, i.e. ord_w(x) f / q_exp, with a flag
/// telling whether every entry is an integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Integrality {
    pub labels: Vec<u64>,
    #[serde(serialize_with = "serialize_rationals")]
    pub entries: Vec<Rational>,
    pub integral: bool,
}

pub fn integrality_vector(ctx: &WeilContext, x: &PPowerElement, q_exp: u64) -> Result<Integrality> {
    if q_exp == 0 {
        return Err(WeilError::InvalidInput("q must be a positive power of p".into()));
    }
    check_p_unit(ctx, x)?;
    let ords = ctx.splitting.valuations_of(ctx.ring(), x)?;
    let f = ctx.splitting.f as i64;
    let entries: Vec<Rational> =
        ords.iter().map(|&o| Rational::new(BigInt::from(o * f), BigInt::from(q_exp))).collect();
    let integral = entries.iter().all(|r| r.is_integer());
    Ok(Integrality { labels: ctx.splitting.primes.clone(), entries, integral })
}

/// The norm of x must be +-p^k: x is a unit away from p.
fn check_p_unit(ctx: &WeilContext, x: &PPowerElement) -> Result<()> {
    if x.numerator.is_zero() {
        return Err(WeilError::InvalidInput("zero is not a Weil number".into()));
    }
    let norm = ctx.ring().norm(&x.numerator);
    let v = valuation_bigint(&norm, ctx.p()).unwrap();
    let rest = norm.abs() / num_traits::pow(BigInt::from(ctx.p()), v as usize);
    if !rest.is_one() {
        return Err(WeilError::InvalidInput(format!("{x} is not a unit away from {}", ctx.p())));
    }
    Ok(())
}

/// The slope vector of x viewed as a Weil q-number with q = p^q_exp.
pub fn slope_of(ctx: &WeilContext, x: &PPowerElement, q_exp: u64) -> Result<SlopeVector> {
    let iv = integrality_vector(ctx, x, q_exp)?;
    if let Some((i, r)) = iv.entries.iter().enumerate().find(|(_, r)| !r.is_integer()) {
        return Err(WeilError::NotIntegral { label: iv.labels[i], value: format_rational(r) });
    }
    let entries = iv.entries.iter().map(|r| i64::try_from(r.to_integer()).expect("slope fits in i64")).collect();
    SlopeVector::new(&ctx.splitting, entries)
}

pub fn kernel_basis(splitting: &PrimeSplitting) -> Vec<SlopeVector> {
    let mut out = Vec::new();
    for (i, &label) in splitting.primes.iter().enumerate() {
        let j = splitting.conj_index(i);
        if i != j && label < splitting.primes[j] {
            let mut s = SlopeVector::zero(splitting);
            s.entries[i] = 1;
            s.entries[j] = -1;
            out.push(s);
        }
    }
    out
}

pub fn torsion_order(ctx: &WeilContext, n: u64) -> Result<u64> {
    ctx.check_level(n)?;
    Ok(ctx.m() * n)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WeilElement {
    pub conductor: u64,
    pub p: u64,
    pub level: u64,
    pub torsion_exponent: ResidueClass,
    pub slope: SlopeVector,
    /// pi^n as an exact element of K.
    pub explicit: Option<PPowerElement>,
}

impl WeilElement {
    pub fn torsion_order(&self) -> u64 {
        self.torsion_exponent.modulus()
    }

    pub fn is_torsion(&self) -> bool {
        self.slope.is_zero()
    }

    /// The root of unity zeta_mn^t of level n (slope zero).
    pub fn root_of_unity(ctx: &WeilContext, n: u64, t: i64) -> Result<WeilElement> {
        ctx.check_level(n)?;
        let m = ctx.m();
        let ring = ctx.ring();
        let torsion_exponent = ResidueClass::new(t, m * n)?;
        let gen = ring.torsion_generator();
        let x = ring.pow(&gen, torsion_exponent.value() % m);
        Ok(WeilElement {
            conductor: ctx.field.conductor,
            p: ctx.p(),
            level: n,
            torsion_exponent,
            slope: SlopeVector::zero(&ctx.splitting),
            explicit: Some(PPowerElement::integral(x, ctx.p())),
        })
    }

    /// Product in W(p, n); both factors must have the same level.
    pub fn mul(&self, ctx: &WeilContext, other: &WeilElement) -> WeilElement {
        debug_assert_eq!(self.level, other.level);
        let explicit = match (&self.explicit, &other.explicit) {
            (Some(a), Some(b)) => Some(a.mul(ctx.ring(), b)),
            _ => None,
        };
        WeilElement {
            torsion_exponent: self.torsion_exponent.add(&other.torsion_exponent),
            slope: self.slope.add(&other.slope),
            explicit,
            ..self.clone()
        }
    }

    /// Multiply by zeta_mn^t.
    pub fn twist(&self, ctx: &WeilContext, t: i64) -> Result<WeilElement> {
        Ok(self.mul(ctx, &WeilElement::root_of_unity(ctx, self.level, t)?))
    }

    /// pi^{-1}, which for weight 0 is the complex conjugate of pi.
    pub fn inverse(&self, ctx: &WeilContext) -> WeilElement {
        WeilElement {
            torsion_exponent: self.torsion_exponent.neg(),
            slope: self.slope.neg(),
            explicit: self.explicit.as_ref().map(|x| x.conj(ctx.ring())),
            ..self.clone()
        }
    }

    /// (pi^n)^m, which lies in the field Q[pi^mn] and forgets the torsion.
    pub fn mn_power(&self, ctx: &WeilContext) -> Option<PPowerElement> {
        self.explicit.as_ref().map(|x| x.pow(ctx.ring(), ctx.m()))
    }
}

fn cached_generator(ctx: &WeilContext, coeff_bound: u64) -> Result<RingElement> {
    type Key = (u64, u64, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, RingElement>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (ctx.field.conductor, ctx.p(), ctx.field.class_number);
    if let Some(g) = cache.lock().unwrap().get(&key) {
        return Ok(g.clone());
    }
    let g = find_prime_generator(&ctx.field, &ctx.splitting, 1, ctx.field.class_number, coeff_bound)?;
    cache.lock().unwrap().insert(key, g.clone());
    Ok(g)
}

/// u = varpi / conj(varpi) as numerator / p^(f h), for varpi generating w_1^h.
fn generator_ratio(ctx: &WeilContext, varpi: &RingElement) -> PPowerElement {
    let ring = ctx.ring();
    let n = ring.conductor();
    let varpi_bar = ring.conj(varpi);
    // adj(conj varpi) = product of sigma(varpi) over sigma != iota
    let adj = ring
        .galois_group()
        .into_iter()
        .filter(|&a| a != n - 1)
        .fold(ring.one(), |acc, a| ring.mul(&acc, &ring.galois(a, varpi)));
    let norm = ring.mul(&varpi_bar, &adj);
    debug_assert!(norm.coeffs()[1..].iter().all(Zero::is_zero));
    let mut numerator = ring.mul(varpi, &adj);
    let norm = norm.coeffs()[0].clone();
    if norm.is_negative() {
        numerator = numerator.neg();
    }
    let k = valuation_bigint(&norm, ctx.p()).unwrap();
    PPowerElement::new(numerator, ctx.p(), k)
}

/// pi^n = chi(varpi) for the infinity type chi of s, with varpi generating
/// w_1^(n / f). The result has torsion exponent 0 and carries pi^n.
pub fn construct_weil(ctx: &WeilContext, s: &SlopeVector, n: u64, coeff_bound: u64) -> Result<WeilElement> {
    ctx.check_level(n)?;
    if !s.in_kernel(&ctx.splitting) || s.labels != ctx.splitting.primes {
        return Err(WeilError::InvalidInput("slope is not in the kernel lattice of this splitting".into()));
    }
    let ring = ctx.ring();
    let p = ctx.p();
    let explicit = if s.is_zero() {
        PPowerElement::one(ring, p)
    } else {
        let varpi_h = cached_generator(ctx, coeff_bound)?;
        let u = generator_ratio(ctx, &varpi_h).pow(ring, n / ctx.level_unit());
        let chi = InfinityType::from_slope(ctx, s);
        debug_assert!(chi.is_weight_zero(ring.conductor()));
        chi.coefficients
            .iter()
            .filter(|(_, &c)| c > 0)
            .fold(PPowerElement::one(ring, p), |acc, (&a, &c)| acc.mul(ring, &u.galois(ring, a).pow(ring, c as u64)))
    };
    if !explicit.is_weight_zero(ring) {
        return Err(WeilError::InvalidInput(format!("constructed {explicit} fails the weight-0 check")));
    }
    let back = slope_of(ctx, &explicit, n)?;
    if &back != s {
        return Err(WeilError::InvalidInput(format!(
            "constructed element has slope {:?}, expected {:?}",
            back.entries, s.entries
        )));
    }
    Ok(WeilElement {
        conductor: ctx.field.conductor,
        p,
        level: n,
        torsion_exponent: ResidueClass::new(0, ctx.m() * n)?,
        slope: s.clone(),
        explicit: Some(explicit),
    })
}

/// Weil element of level n from an explicit pi^n, with torsion exponent 0.
pub fn weil_from_explicit(ctx: &WeilContext, x: PPowerElement, n: u64) -> Result<WeilElement> {
    ctx.check_level(n)?;
    if !x.is_weight_zero(ctx.ring()) {
        return Err(WeilError::InvalidInput(format!("{x} does not have weight 0")));
    }
    let slope = slope_of(ctx, &x, n)?;
    let torsion_exponent = match crate::cyclotomic::torsion_log(ctx.ring(), &x.numerator) {
        Some(t) if x.p_power == 0 => ResidueClass::new(t as i64, ctx.m() * n)?,
        _ => ResidueClass::new(0, ctx.m() * n)?,
    };
    Ok(WeilElement { conductor: ctx.field.conductor, p: ctx.p(), level: n, torsion_exponent, slope, explicit: Some(x) })
}

/// Elements a of (Z/N)^x whose sigma_a fixes the slope vector.
pub fn slope_stabilizer(ctx: &WeilContext, s: &SlopeVector) -> Vec<u64> {
    ctx.field.galois_group().into_iter().filter(|&a| &s.act(&ctx.splitting, a) == s).collect()
}

/// [Q[pi^mn] : Q] as the orbit size of the slope of pi^mn.
pub fn center_degree(ctx: &WeilContext, pi: &WeilElement) -> u64 {
    ctx.field.degree / slope_stabilizer(ctx, &pi.slope).len() as u64
}

/// The same degree from the explicit certificate: the orbit of (pi^n)^m under Gal(K/Q).
pub fn center_degree_explicit(ctx: &WeilContext, pi: &WeilElement) -> Option<u64> {
    let ring = ctx.ring();
    let x = pi.mn_power(ctx)?;
    let fixed = ctx.field.galois_group().into_iter().filter(|&a| x.galois(ring, a) == x).count() as u64;
    Some(ctx.field.degree / fixed)
}

/// Every kernel lattice point with |a_w| <= bound, constructed at level n.
pub fn enumerate_box(ctx: &WeilContext, n: u64, bound: i64, coeff_bound: u64) -> Result<Vec<WeilElement>> {
    let basis = kernel_basis(&ctx.splitting);
    let mut out = Vec::new();
    let mut coords = vec![-bound; basis.len()];
    loop {
        let s = basis.iter().zip(&coords).fold(SlopeVector::zero(&ctx.splitting), |acc, (b, &c)| acc.add(&b.scale(c)));
        out.push(construct_weil(ctx, &s, n, coeff_bound)?);
        let mut i = 0;
        loop {
            if i == coords.len() {
                return Ok(out);
            }
            coords[i] += 1;
            if coords[i] <= bound {
                break;
            }
            coords[i] = -bound;
            i += 1;
        }
    }
}

/// gcd of the slope entries; the element is a (gcd)-th power modulo torsion.
pub fn slope_content(s: &SlopeVector) -> u64 {
    s.entries.iter().fold(0u64, |g, &a| g.gcd(&a.unsigned_abs()))
}

/// sigma_b moving prime w_c to w_d, as a unit mod N.
pub fn transport(splitting: &PrimeSplitting, from: u64, to: u64) -> u64 {
    let cof = splitting.cofactor().max(1);
    if cof <= 2 {
        return 1;
    }
    let b = to % cof * inv_mod(from % cof, cof).unwrap() % cof;
    splitting.lift(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::{describe_field_with, FieldTable};
    use crate::modmath::rational;
    use proptest::prelude::*;

    fn ctx(n: u64, p: u64) -> WeilContext {
        WeilContext::new(describe_field_with(n, &FieldTable::embedded()).unwrap(), p).unwrap()
    }

    fn pp(ctx: &WeilContext, num: &[i64], k: u32) -> PPowerElement {
        PPowerElement::new(ctx.ring().from_i64s(num), ctx.p(), k)
    }

    #[test]
    fn integrality_examples() {
        let c = ctx(4, 5);
        let x = pp(&c, &[3, 4], 1);
        let iv = integrality_vector(&c, &x, 1).unwrap();
        assert_eq!(iv.entries, vec![rational(1, 1), rational(-1, 1)]);
        assert!(iv.integral);
        let iv = integrality_vector(&c, &x, 2).unwrap();
        assert_eq!(iv.entries, vec![rational(1, 2), rational(-1, 2)]);
        assert!(!iv.integral);
        let i = pp(&c, &[0, 1], 0);
        let iv = integrality_vector(&c, &i, 3).unwrap();
        assert!(iv.integral && iv.entries.iter().all(Zero::is_zero));
    }

    #[test]
    fn slope_of_examples() {
        let c = ctx(4, 5);
        assert_eq!(slope_of(&c, &pp(&c, &[3, 4], 1), 1).unwrap().entries, vec![1, -1]);
        assert!(slope_of(&c, &pp(&c, &[0, 1], 0), 1).unwrap().is_zero());
        assert!(matches!(slope_of(&c, &pp(&c, &[3, 4], 1), 2), Err(WeilError::NotIntegral { .. })));
        // 1 + 2i has norm 5 but is not a Weil number; 7 is not a unit away from 5
        assert!(slope_of(&c, &pp(&c, &[7], 0), 1).is_err());
    }

    #[test]
    fn kernel_basis_examples() {
        assert_eq!(
            kernel_basis(&ctx(4, 5).splitting).iter().map(|s| s.entries.clone()).collect::<Vec<_>>(),
            vec![vec![1, -1]]
        );
        assert!(kernel_basis(&ctx(4, 3).splitting).is_empty());
        let b = kernel_basis(&ctx(5, 11).splitting);
        assert_eq!(b.len(), 2);
        let sp = &ctx(5, 11).splitting;
        assert_eq!(b.len(), sp.primes.len() - sp.real_primes.len());
    }

    #[test]
    fn construct_examples() {
        let c = ctx(4, 5);
        let s = SlopeVector::new(&c.splitting, vec![1, -1]).unwrap();
        let w = construct_weil(&c, &s, 1, 3).unwrap();
        let x = w.explicit.clone().unwrap();
        // (3 + 4i)/5 up to a power of i
        let target = pp(&c, &[3, 4], 1);
        let ratio = x.mul(c.ring(), &target.conj(c.ring()));
        assert_eq!(ratio.p_power, 0);
        assert!(crate::cyclotomic::is_torsion(c.ring(), &ratio.numerator));

        let c3 = ctx(3, 7);
        let s = SlopeVector::new(&c3.splitting, vec![1, -1]).unwrap();
        let x = construct_weil(&c3, &s, 1, 3).unwrap().explicit.unwrap();
        // (3 + z)/(3 + z^2) = (3 + z)^2 / 7
        let r = c3.ring();
        let a = r.from_i64s(&[3, 1]);
        let target = PPowerElement::new(r.mul(&a, &a), 7, 1);
        let ratio = x.mul(r, &target.conj(r));
        assert_eq!(ratio.p_power, 0);
        assert!(crate::cyclotomic::is_torsion(r, &ratio.numerator));

        let c = ctx(4, 3);
        let w = construct_weil(&c, &SlopeVector::zero(&c.splitting), 2, 3).unwrap();
        assert!(w.explicit.unwrap().is_one());
        assert!(matches!(
            construct_weil(&c, &SlopeVector::zero(&c.splitting), 1, 3),
            Err(WeilError::Divisibility { n: 1, required: 2 })
        ));
    }

    #[test]
    fn infinity_type_maps_to_slope() {
        let c = ctx(5, 11);
        for s in kernel_basis(&c.splitting) {
            let chi = InfinityType::from_slope(&c, &s);
            assert!(chi.is_weight_zero(5));
            assert_eq!(chi.slope(&c.splitting), s);
        }
    }

    #[test]
    fn torsion_orders() {
        assert_eq!(torsion_order(&ctx(4, 5), 1).unwrap(), 4);
        assert_eq!(torsion_order(&ctx(3, 7), 2).unwrap(), 12);
        assert_eq!(torsion_order(&ctx(4, 5), 3).unwrap(), 12);
    }

    #[test]
    fn center_degrees() {
        let c = ctx(4, 5);
        let s = SlopeVector::new(&c.splitting, vec![1, -1]).unwrap();
        let w = construct_weil(&c, &s, 1, 3).unwrap();
        assert_eq!(center_degree(&c, &w), 2);
        assert_eq!(center_degree_explicit(&c, &w), Some(2));
        let i = WeilElement::root_of_unity(&c, 1, 1).unwrap();
        assert_eq!(i.explicit.as_ref().unwrap().numerator, c.ring().from_i64s(&[0, 1]));
        assert_eq!(center_degree(&c, &i), 1);
        assert_eq!(center_degree_explicit(&c, &i), Some(1));
        let one = WeilElement::root_of_unity(&c, 1, 0).unwrap();
        assert_eq!(center_degree(&c, &one), 1);
    }

    #[test]
    fn explicit_round_trip_of_known_element() {
        let c = ctx(4, 5);
        let w = weil_from_explicit(&c, pp(&c, &[0, 1], 0), 1).unwrap();
        assert_eq!(w.torsion_exponent.value(), 1);
        let w = weil_from_explicit(&c, pp(&c, &[3, 4], 1), 1).unwrap();
        assert_eq!(w.slope.entries, vec![1, -1]);
    }

    #[test]
    fn box_is_hit_for_gaussian_and_eisenstein_integers() {
        for (n, p) in [(4u64, 5u64), (3, 7), (4, 13), (3, 13)] {
            let c = ctx(n, p);
            let all = enumerate_box(&c, 1, 3, 4).unwrap();
            assert_eq!(all.len(), 7);
            for w in &all {
                assert_eq!(&slope_of(&c, w.explicit.as_ref().unwrap(), 1).unwrap(), &w.slope);
            }
        }
    }

    #[test]
    fn box_is_hit_for_zeta5() {
        let c = ctx(5, 11);
        let all = enumerate_box(&c, 1, 2, 3).unwrap();
        assert_eq!(all.len(), 25);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn stabilization_under_level_change(a in -3i64..=3, b in -3i64..=3, k in 1u64..=3) {
            let c = ctx(5, 11);
            let basis = kernel_basis(&c.splitting);
            let s = basis[0].scale(a).add(&basis[1].scale(b));
            let low = construct_weil(&c, &s, 1, 3).unwrap();
            let high = construct_weil(&c, &s, k, 3).unwrap();
            prop_assert_eq!(&low.slope, &high.slope);
            let lifted = low.explicit.unwrap().pow(c.ring(), k);
            prop_assert_eq!(lifted, high.explicit.unwrap());
        }

        #[test]
        fn construct_is_multiplicative(a in -3i64..=3, b in -3i64..=3) {
            let c = ctx(4, 13);
            let e = &kernel_basis(&c.splitting)[0];
            let x = construct_weil(&c, &e.scale(a), 1, 3).unwrap();
            let y = construct_weil(&c, &e.scale(b), 1, 3).unwrap();
            let xy = construct_weil(&c, &e.scale(a + b), 1, 3).unwrap();
            prop_assert_eq!(x.mul(&c, &y).explicit, xy.explicit);
        }
    }
}
