//! Cyclotomic CM fields Q(zeta_N): field data, splitting of rational primes,
//! p-adic valuations and small prime generators.

pub mod local;
pub mod ring;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Result, WeilError};
use crate::modmath::{euler_phi, gcd, inv_mod, is_prime_u64, multiplicative_order, valuation_bigint};

pub use local::PAdicEmbedding;
pub use ring::{CyclotomicRing, PPowerElement, RingElement};

pub const FIELD_TABLE_ENV: &str = "WEIL_LAB_FIELD_TABLE";

const EMBEDDED_TABLE: &str = include_str!("../../data/class_numbers.txt");

/// Class numbers of Q(zeta_N) keyed by conductor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTable {
    entries: BTreeMap<u64, u64>,
}

impl FieldTable {
    pub fn embedded() -> FieldTable {
        FieldTable::parse(EMBEDDED_TABLE).expect("embedded class-number table is well formed")
    }

    /// Lines of the form `conductor class_number`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<FieldTable> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> =
                line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            let bad = || {
                WeilError::FieldTable(format!("line {}: expected `conductor class_number`, got {raw:?}", lineno + 1))
            };
            if parts.len() != 2 {
                return Err(bad());
            }
            let n: u64 = parts[0].parse().map_err(|_| bad())?;
            let h: u64 = parts[1].parse().map_err(|_| bad())?;
            if h == 0 {
                return Err(bad());
            }
            entries.insert(n, h);
        }
        Ok(FieldTable { entries })
    }

    pub fn from_path(path: &Path) -> Result<FieldTable> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WeilError::FieldTable(format!("cannot read {}: {e}", path.display())))?;
        FieldTable::parse(&text)
    }

    /// The embedded table with entries from `path` layered on top.
    pub fn with_overrides_from(path: &Path) -> Result<FieldTable> {
        let mut table = FieldTable::embedded();
        table.entries.extend(FieldTable::from_path(path)?.entries);
        Ok(table)
    }

    /// The embedded table, overridden by the file named in `WEIL_LAB_FIELD_TABLE` if set.
    pub fn from_env() -> Result<FieldTable> {
        match std::env::var_os(FIELD_TABLE_ENV) {
            Some(path) if !path.is_empty() => FieldTable::with_overrides_from(Path::new(&path)),
            _ => Ok(FieldTable::embedded()),
        }
    }

    pub fn set(&mut self, conductor: u64, class_number: u64) {
        self.entries.insert(conductor, class_number);
    }

    pub fn class_number(&self, conductor: u64) -> Option<u64> {
        self.entries.get(&conductor).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclotomicField {
    pub conductor: u64,
    pub degree: u64,
    pub torsion_order: u64,
    pub class_number: u64,
    pub real_subfield_degree: u64,
}

impl CyclotomicField {
    pub fn ring(&self) -> Arc<CyclotomicRing> {
        CyclotomicRing::new(self.conductor)
    }

    pub fn galois_group(&self) -> Vec<u64> {
        (1..self.conductor).filter(|&a| gcd(a, self.conductor) == 1).collect()
    }
}

pub fn check_conductor(n: u64) -> Result<()> {
    if n < 3 {
        return Err(WeilError::UnsupportedConductor { conductor: n, reason: "conductor must be at least 3".into() });
    }
    if n % 4 == 2 {
        return Err(WeilError::UnsupportedConductor {
            conductor: n,
            reason: format!("non-canonical conductor, Q(zeta_{n}) = Q(zeta_{})", n / 2),
        });
    }
    Ok(())
}

/// Field data for Q(zeta_N) using the embedded table and `WEIL_LAB_FIELD_TABLE`.
pub fn describe_field(n: u64) -> Result<CyclotomicField> {
    describe_field_with(n, &FieldTable::from_env()?)
}

pub fn describe_field_with(n: u64, table: &FieldTable) -> Result<CyclotomicField> {
    check_conductor(n)?;
    let class_number = table.class_number(n).ok_or_else(|| WeilError::UnsupportedConductor {
        conductor: n,
        reason: "class number not in the field table".into(),
    })?;
    let degree = euler_phi(n);
    Ok(CyclotomicField {
        conductor: n,
        degree,
        torsion_order: if n.is_multiple_of(2) { n } else { 2 * n },
        class_number,
        real_subfield_degree: degree / 2,
    })
}

/// The primes of Q(zeta_N) above p and of its maximal real subfield.
///
/// With N = p^k N', the primes above p are indexed by the cosets of <p> in
/// (Z/N')^x, each labelled by its smallest representative. The prime with
/// label c is sigma_c(w_1), where w_1 is fixed by the p-adic embedding in
/// [`local`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeSplitting {
    pub conductor: u64,
    pub p: u64,
    pub e: u64,
    pub f: u64,
    pub g: u64,
    /// Labels of X.
    pub primes: Vec<u64>,
    /// Label of the complex conjugate of each prime in X.
    pub conjugation: Vec<u64>,
    /// Labels of Y (smallest label in each conjugation orbit).
    pub real_primes: Vec<u64>,
    /// Index into `real_primes` for each prime in X.
    pub fiber: Vec<usize>,
    #[serde(skip)]
    p_power: u64,
    #[serde(skip)]
    cofactor: u64,
}

pub fn split_prime(field: &CyclotomicField, p: u64) -> Result<PrimeSplitting> {
    if !is_prime_u64(p) {
        return Err(WeilError::InvalidInput(format!("{p} is not prime")));
    }
    let n = field.conductor;
    let (p_power, cofactor, _) = local::split_conductor(n, p);
    let e = euler_phi(p_power);
    let f = if cofactor <= 2 { 1 } else { multiplicative_order(p as i64, cofactor)? };
    let g = euler_phi(cofactor) / f;

    let coset_label = |c: u64| -> u64 {
        if cofactor <= 2 {
            return 1;
        }
        let mut best = c % cofactor;
        let mut cur = best;
        for _ in 1..f {
            cur = cur * (p % cofactor) % cofactor;
            best = best.min(cur);
        }
        best
    };
    let primes: Vec<u64> = if cofactor <= 2 {
        vec![1]
    } else {
        let mut seen: Vec<u64> = (1..cofactor).filter(|&c| gcd(c, cofactor) == 1).map(coset_label).collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    };
    let conjugation: Vec<u64> = primes.iter().map(|&c| coset_label(cofactor.max(1) - c % cofactor.max(1))).collect();
    let mut real_primes = Vec::new();
    let mut fiber = Vec::with_capacity(primes.len());
    for (&c, &cc) in primes.iter().zip(&conjugation) {
        let y = c.min(cc);
        let idx = match real_primes.iter().position(|&r| r == y) {
            Some(i) => i,
            None => {
                real_primes.push(y);
                real_primes.len() - 1
            }
        };
        fiber.push(idx);
    }
    debug_assert_eq!(e * f * g, field.degree);
    debug_assert_eq!(primes.len() as u64, g);
    Ok(PrimeSplitting { conductor: n, p, e, f, g, primes, conjugation, real_primes, fiber, p_power, cofactor })
}

impl PrimeSplitting {
    pub fn index_of(&self, label: u64) -> Option<usize> {
        self.primes.iter().position(|&c| c == label)
    }

    /// Label of the prime sigma_a(w_1) for a unit a mod N.
    pub fn label_of_unit(&self, a: u64) -> u64 {
        if self.cofactor <= 2 {
            return 1;
        }
        let mut best = a % self.cofactor;
        let mut cur = best;
        for _ in 1..self.f {
            cur = cur * (self.p % self.cofactor) % self.cofactor;
            best = best.min(cur);
        }
        best
    }

    /// Index of sigma_a(w) for w = primes[idx].
    pub fn act(&self, a: u64, idx: usize) -> usize {
        let label = self.label_of_unit(a % self.conductor * (self.primes[idx] % self.conductor) % self.conductor);
        self.index_of(label).expect("Galois action permutes X")
    }

    pub fn conj_index(&self, idx: usize) -> usize {
        self.index_of(self.conjugation[idx]).unwrap()
    }

    /// Smallest a in (Z/N)^x with a = label mod N' and a = 1 mod p^k, so that
    /// sigma_a(w_1) is the prime with this label.
    pub fn lift(&self, label: u64) -> u64 {
        (1..self.conductor)
            .find(|&a| {
                gcd(a, self.conductor) == 1
                    && a % self.p_power == 1 % self.p_power
                    && (self.cofactor <= 2 || a % self.cofactor == label % self.cofactor)
            })
            .expect("CRT lift exists")
    }

    /// Whether sigma_a lies in the decomposition group at p (fixes every prime above p).
    pub fn in_decomposition_group(&self, a: u64) -> bool {
        self.cofactor <= 2 || self.label_of_unit(a) == 1
    }

    /// Whether sigma_a lies in the inertia group at p.
    pub fn in_inertia_group(&self, a: u64) -> bool {
        self.cofactor <= 2 || a % self.cofactor == 1
    }

    pub fn p_power(&self) -> u64 {
        self.p_power
    }

    pub fn cofactor(&self) -> u64 {
        self.cofactor
    }

    fn embedding(&self, precision: u32) -> Arc<PAdicEmbedding> {
        type Key = (u64, u64, u32);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<PAdicEmbedding>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (self.conductor, self.p, precision);
        if let Some(e) = cache.lock().unwrap().get(&key) {
            return e.clone();
        }
        let emb = Arc::new(PAdicEmbedding::new(self.conductor, self.p, precision));
        cache.lock().unwrap().entry(key).or_insert(emb).clone()
    }

    /// Normalized valuations ord_w(x) (with ord_w(p) = e) for every w in X.
    pub fn valuations(&self, ring: &CyclotomicRing, x: &RingElement) -> Result<Vec<u64>> {
        if x.is_zero() {
            return Err(WeilError::InvalidInput("valuation of zero".into()));
        }
        let norm = ring.norm(x);
        let vp = valuation_bigint(&norm, self.p).unwrap_or(0) as u64;
        let mut precision = (vp / (self.e * self.f) + 2) as u32;
        loop {
            let emb = self.embedding(precision);
            let vals: Option<Vec<u64>> = self
                .primes
                .iter()
                .map(|&c| {
                    let a = self.lift(c);
                    let a_inv = inv_mod(a, self.conductor).unwrap();
                    emb.valuation(x.coeffs(), a_inv)
                })
                .collect();
            if let Some(v) = vals {
                debug_assert_eq!(v.iter().sum::<u64>() * self.f, vp);
                return Ok(v);
            }
            precision *= 2;
        }
    }

    /// Valuations of numerator / p^k.
    pub fn valuations_of(&self, ring: &CyclotomicRing, x: &PPowerElement) -> Result<Vec<i64>> {
        let shift = (x.p_power as u64 * self.e) as i64;
        Ok(self.valuations(ring, &x.numerator)?.into_iter().map(|v| v as i64 - shift).collect())
    }
}

/// Enumerates integer vectors of length `dim` with max |c_i| = r in a fixed order:
/// each coordinate runs through 0, 1, -1, 2, -2, ...
fn for_each_in_shell(dim: usize, r: i64, mut visit: impl FnMut(&[i64]) -> bool) -> bool {
    let values: Vec<i64> = std::iter::once(0).chain((1..=r).flat_map(|k| [k, -k])).collect();
    let mut idx = vec![0usize; dim];
    let mut cur = vec![0i64; dim];
    loop {
        if cur.iter().any(|c| c.abs() == r) && visit(&cur) {
            return true;
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < values.len() {
                cur[i] = values[idx[i]];
                break;
            }
            idx[i] = 0;
            cur[i] = 0;
        }
    }
}

/// Searches the box |c_i| <= coeff_bound for an element generating w^exponent,
/// i.e. with ord_w = exponent and ord_{w'} = 0 at every other finite prime.
pub fn find_prime_generator(
    field: &CyclotomicField,
    splitting: &PrimeSplitting,
    label: u64,
    exponent: u64,
    coeff_bound: u64,
) -> Result<RingElement> {
    let target = splitting
        .index_of(label)
        .ok_or_else(|| WeilError::InvalidInput(format!("{label} is not a prime label above {}", splitting.p)))?;
    if !exponent.is_multiple_of(field.class_number) {
        return Err(WeilError::Divisibility { n: exponent, required: field.class_number });
    }
    if coeff_bound == 0 {
        return Err(WeilError::InvalidInput("coefficient bound must be at least 1".into()));
    }
    let ring = field.ring();
    if exponent == 0 {
        return Ok(ring.one());
    }
    let wanted = num_traits::pow(BigInt::from(splitting.p), (splitting.f * exponent) as usize);
    let dim = ring.degree();
    let mut found: Option<(RingElement, usize)> = None;
    for r in 1..=coeff_bound as i64 {
        let hit = for_each_in_shell(dim, r, |c| {
            let x = ring.from_i64s(c);
            let norm = ring.norm(&x);
            if norm != wanted && norm != -&wanted {
                return false;
            }
            let vals = match splitting.valuations(&ring, &x) {
                Ok(v) => v,
                Err(_) => return false,
            };
            let nonzero: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] != 0).collect();
            if nonzero.len() == 1 && vals[nonzero[0]] == exponent {
                found = Some((x, nonzero[0]));
                true
            } else {
                false
            }
        });
        if hit {
            break;
        }
    }
    let (x, at) = found.ok_or_else(|| {
        WeilError::NotFound(format!(
            "no generator of w_{label}^{exponent} above {} in Q(zeta_{}) with coefficients bounded by {coeff_bound}",
            splitting.p, field.conductor
        ))
    })?;
    if at == target {
        return Ok(x);
    }
    // move the hit from w_c to w_label with sigma_b, b = label / c mod N'
    let c = splitting.primes[at];
    let cof = splitting.cofactor();
    let b_res = label % cof * inv_mod(c % cof, cof).unwrap() % cof;
    let b = splitting.lift(b_res);
    let moved = ring.galois(b, &x);
    debug_assert_eq!(splitting.act(b, at), target);
    Ok(moved)
}

/// Whether `x` is a root of unity in Z[zeta_N] (some power equals one).
pub fn is_torsion(ring: &CyclotomicRing, x: &RingElement) -> bool {
    let m = if ring.conductor().is_multiple_of(2) { ring.conductor() } else { 2 * ring.conductor() };
    let mut cur = x.clone();
    for _ in 0..m {
        if cur.is_one() {
            return true;
        }
        cur = ring.mul(&cur, x);
    }
    false
}

/// Exponent t with x = g^t for the torsion generator g, if x is a root of unity.
pub fn torsion_log(ring: &CyclotomicRing, x: &RingElement) -> Option<u64> {
    let m = if ring.conductor().is_multiple_of(2) { ring.conductor() } else { 2 * ring.conductor() };
    let g = ring.torsion_generator();
    let mut cur = ring.one();
    for t in 0..m {
        if &cur == x {
            return Some(t);
        }
        cur = ring.mul(&cur, &g);
    }
    None
}

pub fn unit_norm(ring: &CyclotomicRing, x: &RingElement) -> bool {
    let n = ring.norm(x);
    n.is_one() || (-n).is_one()
}

pub fn zero_coeffs(len: usize) -> Vec<BigInt> {
    vec![BigInt::zero(); len]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: u64) -> CyclotomicField {
        describe_field_with(n, &FieldTable::embedded()).unwrap()
    }

    /// Number of reduced positive definite forms of discriminant d < 0.
    fn reduced_form_count(d: i64) -> u64 {
        let mut count = 0;
        let mut a = 1;
        while 3 * a * a <= -d {
            for b in -a + 1..=a {
                let num = b * b - d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                if c < a || (c == a && b < 0) {
                    continue;
                }
                count += 1;
            }
            a += 1;
        }
        count
    }

    #[test]
    fn field_examples() {
        let k4 = field(4);
        assert_eq!((k4.degree, k4.torsion_order, k4.class_number), (2, 4, 1));
        let k3 = field(3);
        assert_eq!((k3.degree, k3.torsion_order, k3.class_number), (2, 6, 1));
        assert!(matches!(describe_field_with(6, &FieldTable::embedded()), Err(WeilError::UnsupportedConductor { .. })));
        assert!(describe_field_with(2, &FieldTable::embedded()).is_err());
    }

    #[test]
    fn quadratic_class_numbers_match_form_count() {
        // Q(i) and Q(zeta_3) are the imaginary quadratic fields of discriminant -4 and -3
        assert_eq!(reduced_form_count(-4), field(4).class_number);
        assert_eq!(reduced_form_count(-3), field(3).class_number);
        assert_eq!(reduced_form_count(-23), 3);
    }

    #[test]
    fn table_overrides() {
        let mut t = FieldTable::embedded();
        assert!(describe_field_with(23, &t).is_ok());
        assert!(describe_field_with(51, &t).is_err());
        t.set(51, 5);
        assert_eq!(describe_field_with(51, &t).unwrap().class_number, 5);
        let parsed = FieldTable::parse("# header\n51 5\n 7, 1 \n").unwrap();
        assert_eq!(parsed.class_number(7), Some(1));
        assert!(FieldTable::parse("51").is_err());
        assert!(FieldTable::parse("51 0").is_err());
    }

    #[test]
    fn splitting_examples() {
        let s = split_prime(&field(4), 5).unwrap();
        assert_eq!((s.e, s.f, s.g), (1, 1, 2));
        assert_eq!(s.primes, vec![1, 3]);
        assert_eq!(s.conjugation, vec![3, 1]);
        assert_eq!(s.real_primes, vec![1]);
        let s = split_prime(&field(4), 3).unwrap();
        assert_eq!((s.e, s.f, s.g), (1, 2, 1));
        assert_eq!(s.conjugation, s.primes);
        let s = split_prime(&field(4), 2).unwrap();
        assert_eq!((s.e, s.f, s.g), (2, 1, 1));
        let s = split_prime(&field(5), 11).unwrap();
        assert_eq!((s.e, s.f, s.g), (1, 1, 4));
        assert_eq!(s.real_primes.len(), 2);
    }

    #[test]
    fn splitting_grid() {
        for n in (3..=60u64).filter(|n| n % 4 != 2) {
            let k = CyclotomicField {
                conductor: n,
                degree: euler_phi(n),
                torsion_order: 0,
                class_number: 1,
                real_subfield_degree: euler_phi(n) / 2,
            };
            for p in crate::modmath::primes_up_to(100) {
                let s = split_prime(&k, p).unwrap();
                assert_eq!(s.e * s.f * s.g, k.degree, "N={n} p={p}");
                for i in 0..s.primes.len() {
                    let j = s.conj_index(i);
                    assert_eq!(s.conj_index(j), i);
                    assert_eq!(s.fiber[i], s.fiber[j]);
                }
                for y in 0..s.real_primes.len() {
                    let size = s.fiber.iter().filter(|&&f| f == y).count();
                    assert!(size == 1 || size == 2);
                }
            }
        }
    }

    #[test]
    fn galois_action_is_transitive_and_compatible_with_valuations() {
        let k = field(5);
        let s = split_prime(&k, 11).unwrap();
        let ring = k.ring();
        let x = ring.from_i64s(&[2, 1]);
        let v = s.valuations(&ring, &x).unwrap();
        assert_eq!(v.iter().sum::<u64>(), 1);
        for a in k.galois_group() {
            let va = s.valuations(&ring, &ring.galois(a, &x)).unwrap();
            for i in 0..v.len() {
                assert_eq!(va[s.act(a, i)], v[i]);
            }
        }
    }

    #[test]
    fn generator_examples() {
        let k = field(4);
        let s = split_prime(&k, 5).unwrap();
        let ring = k.ring();
        let g = find_prime_generator(&k, &s, 1, 1, 3).unwrap();
        assert_eq!(s.valuations(&ring, &g).unwrap(), vec![1, 0]);
        // 2 + i generates w_1 itself
        assert_eq!(s.valuations(&ring, &ring.from_i64s(&[2, 1])).unwrap(), vec![1, 0]);
        let g3 = find_prime_generator(&k, &s, 3, 1, 3).unwrap();
        assert_eq!(s.valuations(&ring, &g3).unwrap(), vec![0, 1]);

        let k3 = field(3);
        let s7 = split_prime(&k3, 7).unwrap();
        let r3 = k3.ring();
        let g = find_prime_generator(&k3, &s7, 1, 1, 3).unwrap();
        assert_eq!(r3.norm(&g), BigInt::from(7));
        assert_eq!(s7.valuations(&r3, &r3.from_i64s(&[3, 1])).unwrap(), s7.valuations(&r3, &g).unwrap());
    }

    #[test]
    fn inert_prime_generator() {
        let k = field(4);
        let s = split_prime(&k, 3).unwrap();
        // exponent 1 at an inert prime is generated by 3 itself (norm 9 = 3^f)
        let g = find_prime_generator(&k, &s, 1, 1, 3).unwrap();
        assert_eq!(k.ring().norm(&g), BigInt::from(9));
        assert!(matches!(find_prime_generator(&k, &s, 1, 1, 2), Err(WeilError::NotFound(_))));
    }

    #[test]
    fn torsion_helpers() {
        let ring = CyclotomicRing::new(4);
        assert!(is_torsion(&ring, &ring.from_i64s(&[0, -1])));
        assert!(!is_torsion(&ring, &ring.from_i64s(&[1, 1])));
        assert_eq!(torsion_log(&ring, &ring.from_i64s(&[0, -1])), Some(3));
    }
}
