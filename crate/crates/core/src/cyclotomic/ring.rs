//! Explicit arithmetic in Z[zeta_N] over the power basis 1, zeta, ..., zeta^(phi(N)-1).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::modmath::{gcd, Rational};

/// Coefficients of the N-th cyclotomic polynomial, ascending, as machine integers.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap().get(&n) {
        return c.clone();
    }
    // x^n - 1 divided by every Phi_d with d | n, d < n
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = exact_divide(&num, &cyclotomic_polynomial(d));
        }
    }
    cache.lock().unwrap().insert(n, num.clone());
    num
}

fn exact_divide(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    debug_assert_eq!(*den.last().unwrap(), 1);
    let qlen = rem.len() - dd;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd];
        q[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    q
}

/// An element of Z[zeta_N], reduced modulo Phi_N.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    conductor: u64,
    coeffs: Vec<BigInt>,
}

impl RingElement {
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Content divisible by `d` (every coefficient).
    pub fn divisible_by(&self, d: &BigInt) -> bool {
        self.coeffs.iter().all(|c| (c % d).is_zero())
    }

    pub fn div_exact(&self, d: &BigInt) -> RingElement {
        RingElement { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| c / d).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> RingElement {
        RingElement { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn neg(&self) -> RingElement {
        RingElement { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (j, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{a}*z")?,
                (_, true) => write!(f, "z^{j}")?,
                (_, false) => write!(f, "{a}*z^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for RingElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }
}

/// Z[zeta_N] with a precomputed reduction table for zeta^j, 0 <= j < N.
#[derive(Debug)]
pub struct CyclotomicRing {
    conductor: u64,
    degree: usize,
    modulus: Vec<i64>,
    zeta_table: Vec<Vec<i64>>,
}

impl CyclotomicRing {
    pub fn new(conductor: u64) -> Arc<CyclotomicRing> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CyclotomicRing>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(r) = cache.lock().unwrap().get(&conductor) {
            return r.clone();
        }
        let modulus = cyclotomic_polynomial(conductor);
        let degree = modulus.len() - 1;
        let mut zeta_table = Vec::with_capacity(conductor as usize);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..conductor {
            zeta_table.push(cur.clone());
            // multiply by zeta: shift up, reduce the top term by Phi_N
            let top = cur[degree - 1];
            for j in (1..degree).rev() {
                cur[j] = cur[j - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for j in 0..degree {
                    cur[j] -= top * modulus[j];
                }
            }
        }
        let ring = Arc::new(CyclotomicRing { conductor, degree, modulus, zeta_table });
        cache.lock().unwrap().insert(conductor, ring.clone());
        ring
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> &[i64] {
        &self.modulus
    }

    pub fn element(&self, coeffs: Vec<BigInt>) -> RingElement {
        assert!(coeffs.len() <= self.degree, "too many coefficients for the power basis");
        let mut c = coeffs;
        c.resize(self.degree, BigInt::zero());
        RingElement { conductor: self.conductor, coeffs: c }
    }

    pub fn from_i64s(&self, coeffs: &[i64]) -> RingElement {
        self.element(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(&self) -> RingElement {
        self.element(Vec::new())
    }

    pub fn one(&self) -> RingElement {
        self.from_i64s(&[1])
    }

    pub fn from_int(&self, k: &BigInt) -> RingElement {
        self.element(vec![k.clone()])
    }

    /// zeta^k for any integer k.
    pub fn zeta_pow(&self, k: i64) -> RingElement {
        let j = k.rem_euclid(self.conductor as i64) as usize;
        self.from_i64s(&self.zeta_table[j])
    }

    /// A generator of mu(K): zeta_N for even N, -zeta_N^((N+1)/2) for odd N.
    pub fn torsion_generator(&self) -> RingElement {
        if self.conductor.is_multiple_of(2) {
            self.zeta_pow(1)
        } else {
            self.zeta_pow(self.conductor.div_ceil(2) as i64).neg()
        }
    }

    /// Reduce a vector indexed by exponents mod N.
    fn reduce_exponent_vector(&self, acc: &[BigInt]) -> RingElement {
        let mut out = vec![BigInt::zero(); self.degree];
        for (k, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if k < self.degree {
                out[k] += a;
            } else {
                for (o, &t) in out.iter_mut().zip(&self.zeta_table[k]) {
                    if t != 0 {
                        *o += a * t;
                    }
                }
            }
        }
        RingElement { conductor: self.conductor, coeffs: out }
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement { conductor: self.conductor, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect() }
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement { conductor: self.conductor, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect() }
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let n = self.conductor as usize;
        let mut acc = vec![BigInt::zero(); n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    acc[(i + j) % n] += x * y;
                }
            }
        }
        self.reduce_exponent_vector(&acc)
    }

    pub fn pow(&self, a: &RingElement, mut e: u64) -> RingElement {
        let mut result = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// The automorphism sigma_a: zeta -> zeta^a, gcd(a, N) = 1.
    pub fn galois(&self, a: u64, x: &RingElement) -> RingElement {
        debug_assert_eq!(gcd(a % self.conductor, self.conductor), 1);
        let n = self.conductor as usize;
        let a = (a % self.conductor) as usize;
        let mut acc = vec![BigInt::zero(); n];
        for (j, c) in x.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc[(a * j) % n] += c;
            }
        }
        self.reduce_exponent_vector(&acc)
    }

    /// Complex conjugation sigma_{-1}.
    pub fn conj(&self, x: &RingElement) -> RingElement {
        self.galois(self.conductor - 1, x)
    }

    /// The units of Z/NZ in ascending order, i.e. Gal(K/Q).
    pub fn galois_group(&self) -> Vec<u64> {
        (1..self.conductor.max(2)).filter(|&a| gcd(a, self.conductor) == 1).collect()
    }

    /// Absolute norm N_{K/Q}(x): the determinant of multiplication by x on
    /// the power basis, which is the resultant Res(Phi_N, x).
    pub fn norm(&self, x: &RingElement) -> BigInt {
        let d = self.degree;
        let mut matrix: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); d]; d];
        for j in 0..d {
            let col = self.mul(x, &self.zeta_pow(j as i64));
            for (row, c) in matrix.iter_mut().zip(col.coeffs) {
                row[j] = c;
            }
        }
        bareiss_determinant(matrix)
    }
}

/// Fraction-free Gaussian elimination over the integers.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v.div_floor(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// An element numerator / p^k of K whose denominator is a power of a fixed prime.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PPowerElement {
    /// Minimal exponent k.
    pub p_power: u32,
    pub numerator: RingElement,
    #[serde(skip)]
    pub p: u64,
}

impl PPowerElement {
    /// Normalizes to the smallest possible power of p in the denominator.
    pub fn new(numerator: RingElement, p: u64, p_power: u32) -> PPowerElement {
        let pb = BigInt::from(p);
        let mut num = numerator;
        let mut k = p_power;
        while k > 0 && !num.is_zero() && num.divisible_by(&pb) {
            num = num.div_exact(&pb);
            k -= 1;
        }
        PPowerElement { p_power: k, numerator: num, p }
    }

    pub fn integral(x: RingElement, p: u64) -> PPowerElement {
        PPowerElement { p_power: 0, numerator: x, p }
    }

    pub fn one(ring: &CyclotomicRing, p: u64) -> PPowerElement {
        PPowerElement::integral(ring.one(), p)
    }

    pub fn is_one(&self) -> bool {
        self.p_power == 0 && self.numerator.is_one()
    }

    pub fn mul(&self, ring: &CyclotomicRing, other: &PPowerElement) -> PPowerElement {
        PPowerElement::new(ring.mul(&self.numerator, &other.numerator), self.p, self.p_power + other.p_power)
    }

    pub fn pow(&self, ring: &CyclotomicRing, e: u64) -> PPowerElement {
        PPowerElement::new(ring.pow(&self.numerator, e), self.p, self.p_power * e as u32)
    }

    pub fn galois(&self, ring: &CyclotomicRing, a: u64) -> PPowerElement {
        PPowerElement { p_power: self.p_power, numerator: ring.galois(a, &self.numerator), p: self.p }
    }

    pub fn conj(&self, ring: &CyclotomicRing) -> PPowerElement {
        self.galois(ring, ring.conductor() - 1)
    }

    /// Weight-0 test: x * conj(x) == 1 exactly.
    pub fn is_weight_zero(&self, ring: &CyclotomicRing) -> bool {
        self.mul(ring, &self.conj(ring)).is_one()
    }

    /// Exact norm as a rational number.
    pub fn norm(&self, ring: &CyclotomicRing) -> Rational {
        let num = ring.norm(&self.numerator);
        let den = num_traits::pow(BigInt::from(self.p), self.p_power as usize * ring.degree());
        Rational::new(num, den)
    }
}

impl fmt::Debug for PPowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for PPowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p_power == 0 {
            write!(f, "{}", self.numerator)
        } else if self.p_power == 1 {
            write!(f, "({})/{}", self.numerator, self.p)
        } else {
            write!(f, "({})/{}^{}", self.numerator, self.p, self.p_power)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        // first cyclotomic polynomial with a coefficient of absolute value 2
        assert!(cyclotomic_polynomial(105).contains(&-2));
    }

    #[test]
    fn norms_of_small_elements() {
        let gi = CyclotomicRing::new(4);
        assert_eq!(gi.norm(&gi.from_i64s(&[2, 1])), BigInt::from(5));
        assert_eq!(gi.norm(&gi.one()), BigInt::from(1));
        let z3 = CyclotomicRing::new(3);
        // a^2 - ab + b^2 with (3, 1)
        assert_eq!(z3.norm(&z3.from_i64s(&[3, 1])), BigInt::from(7));
        let z5 = CyclotomicRing::new(5);
        // Phi_5(-2) = 11
        assert_eq!(z5.norm(&z5.from_i64s(&[2, 1])), BigInt::from(11));
    }

    #[test]
    fn norm_is_product_of_conjugates_in_z12() {
        let r = CyclotomicRing::new(12);
        let x = r.from_i64s(&[2, -1, 0, 3]);
        let prod = r.galois_group().iter().fold(r.one(), |acc, &a| r.mul(&acc, &r.galois(a, &x)));
        assert!(prod.coeffs()[1..].iter().all(Zero::is_zero));
        assert_eq!(prod.coeffs()[0], r.norm(&x));
    }

    #[test]
    fn torsion_generator_orders() {
        for (n, m) in [(3u64, 6u64), (4, 4), (5, 10), (12, 12), (9, 18)] {
            let r = CyclotomicRing::new(n);
            let z = r.torsion_generator();
            assert!(r.pow(&z, m).is_one());
            assert!(!r.pow(&z, m / 2).is_one());
            assert_eq!(r.pow(&z, m / 2), r.one().neg());
        }
    }

    #[test]
    fn p_power_normalization() {
        let r = CyclotomicRing::new(4);
        let x = PPowerElement::new(r.from_i64s(&[15, 20]), 5, 2);
        assert_eq!(x.p_power, 1);
        assert_eq!(x.numerator, r.from_i64s(&[3, 4]));
        assert!(x.is_weight_zero(&r));
        assert_eq!(x.norm(&r), Rational::from_integer(BigInt::one()));
    }
}
