//! Exact integer and rational arithmetic shared by every other module.
//!
//! Arbitrary-precision values are `num-bigint` / `num-rational` types. The
//! search loops work with machine words: moduli up to `u64::MAX` with `u128`
//! intermediates, which covers `l^2` for every prime `l < 2^32`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Result, WeilError};

pub type Natural = BigUint;
pub type Rational = BigRational;

/// Deterministic Miller-Rabin witnesses, valid for every n < 2^64.
const MR_BASES_U64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Rounds used above 2^64.
pub const PROBABLE_PRIME_ROUNDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Primality {
    Composite,
    Prime,
    /// Passed `PROBABLE_PRIME_ROUNDS` Miller-Rabin rounds; not proven.
    ProbablePrime,
}

impl Primality {
    pub fn is_prime(self) -> bool {
        !matches!(self, Primality::Composite)
    }
}

/// An element of Z/mZ with 0 <= value < modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueClass {
    value: u64,
    modulus: u64,
}

impl ResidueClass {
    pub fn new(value: i64, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(WeilError::BadModulus(format!("modulus {modulus} < 2")));
        }
        Ok(Self { value: reduce_i64(value, modulus), modulus })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        let v = ((self.value as u128 + other.value as u128) % self.modulus as u128) as u64;
        Self { value: v, modulus: self.modulus }
    }

    pub fn neg(&self) -> Self {
        Self { value: (self.modulus - self.value) % self.modulus, modulus: self.modulus }
    }

    pub fn scale(&self, k: u64) -> Self {
        Self { value: mul_mod(self.value, k % self.modulus, self.modulus), modulus: self.modulus }
    }

    /// Additive order of the class in Z/mZ.
    pub fn additive_order(&self) -> u64 {
        self.modulus / self.value.gcd(&self.modulus)
    }
}

impl Serialize for ResidueClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{} mod {}", self.value, self.modulus))
    }
}

pub fn reduce_i64(a: i64, m: u64) -> u64 {
    let r = (a as i128).rem_euclid(m as i128);
    r as u64
}

pub fn reduce_bigint(a: &BigInt, m: u64) -> u64 {
    a.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits in u64")
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    result
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128 % m as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

fn miller_rabin_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality test for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES_U64 {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    MR_BASES_U64.iter().all(|&a| miller_rabin_u64(n, a))
}

fn miller_rabin_big(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = x.modpow(&BigUint::from(2u32), n);
        if x == n1 {
            return true;
        }
    }
    false
}

/// Primality of an arbitrary natural number.
///
/// Below 2^64 the verdict is proven (deterministic witness set). Above, the
/// first `PROBABLE_PRIME_ROUNDS` primes are used as Miller-Rabin bases and a
/// pass is reported as [`Primality::ProbablePrime`].
pub fn is_prime(n: &Natural) -> Primality {
    if let Some(small) = n.to_u64() {
        return if is_prime_u64(small) { Primality::Prime } else { Primality::Composite };
    }
    let bases = first_primes(PROBABLE_PRIME_ROUNDS);
    for &b in &bases {
        if (n % b).is_zero() {
            return Primality::Composite;
        }
    }
    if bases.iter().all(|&b| miller_rabin_big(n, &BigUint::from(b))) {
        Primality::ProbablePrime
    } else {
        Primality::Composite
    }
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if is_prime_u64(c) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Sieve of Eratosthenes: all primes <= bound, ascending.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Prime factorization by trial division, ascending primes with exponents.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn distinct_prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).into_iter().fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Smallest d >= 1 with a^d = 1 (mod modulus).
///
/// Starts from the group order phi(modulus) and strips prime factors, so the
/// cost is dominated by factoring phi(modulus).
pub fn multiplicative_order(a: i64, modulus: u64) -> Result<u64> {
    if modulus < 2 {
        return Err(WeilError::BadModulus(format!("modulus {modulus} < 2")));
    }
    let a_red = reduce_i64(a, modulus);
    if gcd(a_red, modulus) != 1 {
        return Err(WeilError::NotCoprime { a, modulus });
    }
    Ok(order_of_unit(a_red, modulus, euler_phi(modulus)))
}

/// Order of a unit `a` in a group whose order divides `group_order`.
pub fn order_of_unit(a: u64, modulus: u64, group_order: u64) -> u64 {
    let mut order = group_order;
    for r in distinct_prime_factors(group_order) {
        while order.is_multiple_of(r) && pow_mod(a, order / r, modulus) == 1 {
            order /= r;
        }
    }
    order
}

/// Whether `a` is an r-th power in (Z/lZ)^x, by Euler's criterion.
pub fn is_rth_power_residue(a: i64, r: u64, l: u64) -> Result<bool> {
    if l < 2 || !is_prime_u64(l) {
        return Err(WeilError::BadModulus(format!("{l} is not prime")));
    }
    if r == 0 || !(l - 1).is_multiple_of(r) {
        return Err(WeilError::BadModulus(format!("{r} does not divide {l} - 1")));
    }
    let a_red = reduce_i64(a, l);
    if a_red == 0 {
        return Err(WeilError::BadModulus(format!("{l} divides {a}")));
    }
    Ok(pow_mod(a_red, (l - 1) / r, l) == 1)
}

/// Whether the class of `a` generates the (unique) cyclic quotient of order
/// `k` of (Z/lZ)^x. Requires k | l - 1.
pub fn generates_quotient(a: u64, k: u64, l: u64, k_primes: &[u64]) -> bool {
    if k == 0 || !(l - 1).is_multiple_of(k) || a.is_multiple_of(l) {
        return false;
    }
    k_primes.iter().all(|&r| pow_mod(a, (l - 1) / r, l) != 1)
}

/// Kronecker symbol (d / n) for n > 0.
pub fn kronecker(d: i64, n: u64) -> i32 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut n = n;
    let mut d_i = d as i128;
    // factor out twos of n
    let twos = n.trailing_zeros();
    if twos > 0 {
        if d_i % 2 == 0 {
            return 0;
        }
        let r8 = d_i.rem_euclid(8);
        if twos % 2 == 1 && (r8 == 3 || r8 == 5) {
            result = -result;
        }
        n >>= twos;
    }
    // Jacobi symbol (d / n) for odd n
    let mut a = d_i.rem_euclid(n as i128) as u64;
    let mut m = n;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = m % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    d_i = m as i128;
    if d_i == 1 {
        result
    } else {
        0
    }
}

pub fn is_square_free(a: i64) -> bool {
    if a == 0 {
        return false;
    }
    factorize(a.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

/// p-adic valuation of a nonzero big integer.
pub fn valuation_bigint(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    while (&y % &p).is_zero() {
        y /= &p;
        v += 1;
    }
    Some(v)
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Representative of r modulo 1 in [0, 1).
pub fn mod_one(r: &Rational) -> Rational {
    r - r.floor()
}

/// Order of r in Q/Z (the reduced denominator of r mod 1).
pub fn order_in_q_mod_z(r: &Rational) -> BigInt {
    mod_one(r).denom().clone()
}

/// "num/den" with den > 0, always written with the slash.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || WeilError::InvalidInput(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn serialize_rationals<S: Serializer>(rs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(rs.len()))?;
    for r in rs {
        seq.serialize_element(&format_rational(r))?;
    }
    seq.end()
}

pub fn serialize_opt_rational<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

/// Sign-aware absolute value helper for big integers.
pub fn abs_bigint(x: &BigInt) -> BigInt {
    x.abs()
}
