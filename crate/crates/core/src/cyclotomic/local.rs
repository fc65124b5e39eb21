//! Completions of Q(zeta_N) at primes above p, modulo p^M.
//!
//! Write N = p^k N'. The completion at a prime w above p is W[pi]/(E(pi)),
//! where W is the unramified extension of Z_p of degree f = ord_{N'}(p) and
//! E(pi) = +-Phi_{p^k}(1 - pi) is Eisenstein of degree e = phi(p^k). Modulo
//! p^M, W becomes the Galois ring (Z/p^M)[t]/(h(t)) for any monic lift h of
//! an irreducible polynomial of degree f over F_p. An element
//! sum_j d_j pi^j (d_j in W) has valuation min_j (e * v_p(d_j) + j), which is
//! exact as long as the minimum is below e * M.
//!
//! zeta_N maps to (1 - pi) * eta with eta the Teichmueller lift of a fixed
//! primitive N'-th root of unity in F_{p^f}; this embedding defines the
//! distinguished prime w_1.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::modmath::{distinct_prime_factors, euler_phi, inv_mod};

use super::ring::cyclotomic_polynomial;

// ---------------------------------------------------------------------------
// F_p[t] helpers (small p, coefficients as u64, ascending)

fn fp_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(*m.last().unwrap(), p).expect("nonzero leading coefficient");
    while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
        let shift = r.len() - 1 - dm;
        let c = r.last().unwrap() * lead_inv % p;
        for (j, &mj) in m.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p - c * mj % p) % p;
        }
        r.pop();
        if r.is_empty() {
            r.push(0);
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    fp_rem(&out, m, p)
}

fn fp_powmod(a: &[u64], e: &BigUint, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let base = fp_rem(a, m, p);
    for i in (0..e.bits()).rev() {
        result = fp_mulmod(&result, &result, m, p);
        if e.bit(i) {
            result = fp_mulmod(&result, &base, m, p);
        }
    }
    result
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    fp_trim(&mut x);
    fp_trim(&mut y);
    while !(y.len() == 1 && y[0] == 0) {
        let r = fp_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    fp_trim(&mut out);
    out
}

/// Rabin's irreducibility test for a monic h of degree f over F_p.
fn fp_is_irreducible(h: &[u64], p: u64) -> bool {
    let f = h.len() - 1;
    if f == 1 {
        return true;
    }
    let t = vec![0u64, 1];
    let pb = BigUint::from(p);
    // t^(p^i) mod h for i = 0..=f
    let mut frob = vec![t.clone()];
    for _ in 0..f {
        let next = fp_powmod(frob.last().unwrap(), &pb, h, p);
        frob.push(next);
    }
    let diff = fp_sub(&frob[f], &t, p);
    if !(diff.len() == 1 && diff[0] == 0) {
        return false;
    }
    for r in distinct_prime_factors(f as u64) {
        let d = fp_sub(&frob[f / r as usize], &t, p);
        let g = fp_gcd(h, &d, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// First monic irreducible polynomial of degree f over F_p in counting order
/// of its lower coefficients.
pub fn irreducible_polynomial(p: u64, f: usize) -> Vec<u64> {
    if f == 1 {
        return vec![0, 1];
    }
    let mut lower = vec![0u64; f];
    loop {
        // advance the base-p counter
        let mut i = 0;
        loop {
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            i += 1;
            assert!(i < f, "no irreducible polynomial of degree {f} over F_{p}");
        }
        if lower[0] == 0 {
            continue;
        }
        let mut h = lower.clone();
        h.push(1);
        if fp_is_irreducible(&h, p) {
            return h;
        }
    }
}

/// F_{p^f} as F_p[t]/(h), elements as coefficient vectors of length f.
#[derive(Debug, Clone)]
pub struct FiniteField {
    pub p: u64,
    pub f: usize,
    pub modulus: Vec<u64>,
}

impl FiniteField {
    pub fn new(p: u64, f: usize) -> Self {
        FiniteField { p, f, modulus: irreducible_polynomial(p, f) }
    }

    pub fn order(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.p), self.f)
    }

    fn pad(&self, mut a: Vec<u64>) -> Vec<u64> {
        a.resize(self.f, 0);
        a
    }

    pub fn one(&self) -> Vec<u64> {
        self.pad(vec![1])
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.pad(fp_mulmod(a, b, &self.modulus, self.p))
    }

    pub fn pow(&self, a: &[u64], e: &BigUint) -> Vec<u64> {
        self.pad(fp_powmod(a, e, &self.modulus, self.p))
    }

    fn decode(&self, mut k: BigUint) -> Vec<u64> {
        let pb = BigUint::from(self.p);
        let mut out = Vec::with_capacity(self.f);
        for _ in 0..self.f {
            let (q, r) = k.div_rem(&pb);
            out.push(r.to_u64().unwrap());
            k = q;
        }
        out
    }

    /// Ordering key: the element read as a base-p integer, highest degree first.
    fn encoding_key(&self, a: &[u64]) -> Vec<u64> {
        a.iter().rev().copied().collect()
    }

    /// The primitive n-th root of unity with the largest base-p encoding.
    /// Requires n | p^f - 1.
    pub fn largest_primitive_root_of_unity(&self, n: u64) -> Vec<u64> {
        if n == 1 {
            return self.one();
        }
        let q1 = self.order() - BigUint::one();
        let nb = BigUint::from(n);
        assert!((&q1 % &nb).is_zero(), "{n} does not divide |F_q^x|");
        let cofactor = &q1 / &nb;
        let primes = distinct_prime_factors(n);
        let one = self.one();
        let mut k = BigUint::one();
        let generator = loop {
            let g = self.decode(k.clone());
            let y = self.pow(&g, &cofactor);
            let exact = primes.iter().all(|&r| self.pow(&y, &BigUint::from(n / r)) != one);
            if exact {
                break y;
            }
            k += 1u32;
        };
        let mut best: Option<Vec<u64>> = None;
        let mut cur = one.clone();
        for j in 1..n {
            cur = self.mul(&cur, &generator);
            if j.gcd(&n) == 1 {
                let better = match &best {
                    None => true,
                    Some(b) => self.encoding_key(&cur) > self.encoding_key(b),
                };
                if better {
                    best = Some(cur.clone());
                }
            }
        }
        best.unwrap()
    }
}

// ---------------------------------------------------------------------------
// Galois ring and its totally ramified extension, modulo p^M

type GrElem = Vec<BigInt>;
type LocalElem = Vec<GrElem>;

#[derive(Debug, Clone)]
struct GaloisRing {
    modulus: BigInt,
    defining: Vec<BigInt>,
    f: usize,
}

impl GaloisRing {
    fn zero(&self) -> GrElem {
        vec![BigInt::zero(); self.f]
    }

    fn constant(&self, k: &BigInt) -> GrElem {
        let mut z = self.zero();
        z[0] = k.mod_floor(&self.modulus);
        z
    }

    fn add_assign(&self, a: &mut GrElem, b: &GrElem) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
            if *x >= self.modulus {
                *x -= &self.modulus;
            }
        }
    }

    fn scale_add_assign(&self, a: &mut GrElem, b: &GrElem, k: &BigInt) {
        for (x, y) in a.iter_mut().zip(b) {
            *x = (&*x + y * k).mod_floor(&self.modulus);
        }
    }

    fn mul(&self, a: &GrElem, b: &GrElem) -> GrElem {
        let f = self.f;
        let mut prod = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for top in (f..prod.len()).rev() {
            let c = std::mem::take(&mut prod[top]);
            if c.is_zero() {
                continue;
            }
            for j in 0..f {
                prod[top - f + j] -= &c * &self.defining[j];
            }
        }
        prod.truncate(f);
        prod.into_iter().map(|x| x.mod_floor(&self.modulus)).collect()
    }

    fn pow(&self, a: &GrElem, e: &BigUint) -> GrElem {
        let mut result = self.constant(&BigInt::one());
        for i in (0..e.bits()).rev() {
            result = self.mul(&result, &result);
            if e.bit(i) {
                result = self.mul(&result, a);
            }
        }
        result
    }

    fn is_zero(a: &GrElem) -> bool {
        a.iter().all(Zero::is_zero)
    }
}

#[derive(Debug, Clone)]
struct RamifiedRing {
    gr: GaloisRing,
    /// Monic Eisenstein polynomial, integer coefficients, length e + 1.
    eisenstein: Vec<BigInt>,
    e: usize,
}

impl RamifiedRing {
    fn zero(&self) -> LocalElem {
        vec![self.gr.zero(); self.e]
    }

    fn mul(&self, a: &LocalElem, b: &LocalElem) -> LocalElem {
        let e = self.e;
        let mut prod = vec![self.gr.zero(); 2 * e - 1];
        for (i, x) in a.iter().enumerate() {
            if GaloisRing::is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if GaloisRing::is_zero(y) {
                    continue;
                }
                let xy = self.gr.mul(x, y);
                self.gr.add_assign(&mut prod[i + j], &xy);
            }
        }
        for top in (e..prod.len()).rev() {
            let c = std::mem::replace(&mut prod[top], self.gr.zero());
            if GaloisRing::is_zero(&c) {
                continue;
            }
            for j in 0..e {
                let k = -&self.eisenstein[j];
                if !k.is_zero() {
                    self.gr.scale_add_assign(&mut prod[top - e + j], &c, &k);
                }
            }
        }
        prod.truncate(e);
        prod
    }
}

/// The embedding Z[zeta_N] -> O_{K_{w_1}} / p^M.
#[derive(Debug, Clone)]
pub struct PAdicEmbedding {
    p: u64,
    precision: u32,
    conductor: u64,
    ring: RamifiedRing,
    zeta_images: Vec<LocalElem>,
}

/// Splits N as (p^k, N').
pub fn split_conductor(n: u64, p: u64) -> (u64, u64, u32) {
    let mut pk = 1;
    let mut rest = n;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        pk *= p;
        k += 1;
    }
    (pk, rest, k)
}

impl PAdicEmbedding {
    pub fn new(conductor: u64, p: u64, precision: u32) -> PAdicEmbedding {
        let precision = precision.max(1);
        let (pk, n_prime, _) = split_conductor(conductor, p);
        let f =
            if n_prime <= 2 { 1 } else { crate::modmath::multiplicative_order(p as i64, n_prime).unwrap() as usize };
        let e = euler_phi(pk) as usize;
        let field = FiniteField::new(p, f);
        let modulus = num_traits::pow(BigInt::from(p), precision as usize);
        let gr = GaloisRing {
            modulus: modulus.clone(),
            defining: field.modulus.iter().map(|&c| BigInt::from(c)).collect(),
            f,
        };

        // Teichmueller lift of the chosen primitive N'-th root of unity
        let root = field.largest_primitive_root_of_unity(n_prime.max(1));
        let lifted: GrElem = root.iter().map(|&c| BigInt::from(c)).collect();
        let q_pow = num_traits::pow(field.order(), precision as usize - 1);
        let eta = gr.pow(&lifted, &q_pow);

        // Eisenstein polynomial (-1)^e Phi_{p^k}(1 - pi); for k = 0 use pi itself
        let eisenstein: Vec<BigInt> = if pk == 1 {
            vec![BigInt::zero(), BigInt::one()]
        } else {
            let phi = cyclotomic_polynomial(pk);
            let mut out = vec![BigInt::zero(); e + 1];
            // (1 - pi)^i expanded by the binomial theorem
            for (i, &c) in phi.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let mut binom = BigInt::one();
                for (j, slot) in out.iter_mut().enumerate().take(i + 1) {
                    let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    *slot += BigInt::from(c) * &binom * sign;
                    binom = binom * BigInt::from((i - j) as u64) / BigInt::from((j + 1) as u64);
                }
            }
            if e % 2 == 1 {
                out.iter_mut().for_each(|c| *c = -&*c);
            }
            out
        };
        let ring = RamifiedRing { gr, eisenstein, e };

        // zeta_N -> (1 - pi) * eta
        let mut zeta = ring.zero();
        zeta[0] = eta.clone();
        if e > 1 {
            let neg_eta: GrElem = eta.iter().map(|c| (-c).mod_floor(&modulus)).collect();
            zeta[1] = neg_eta;
        }
        let mut zeta_images = Vec::with_capacity(conductor as usize);
        let mut cur = ring.zero();
        cur[0] = ring.gr.constant(&BigInt::one());
        for _ in 0..conductor {
            zeta_images.push(cur.clone());
            cur = ring.mul(&cur, &zeta);
        }
        PAdicEmbedding { p, precision, conductor, ring, zeta_images }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn ramification(&self) -> usize {
        self.ring.e
    }

    pub fn residue_degree(&self) -> usize {
        self.ring.gr.f
    }

    /// Image of sigma_twist(x), where x has power-basis coefficients `coeffs`.
    fn image(&self, coeffs: &[BigInt], twist: u64) -> LocalElem {
        let n = self.conductor;
        let mut out = self.ring.zero();
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let idx = ((twist % n) * j as u64 % n) as usize;
            for (o, z) in out.iter_mut().zip(&self.zeta_images[idx]) {
                self.ring.gr.scale_add_assign(o, z, c);
            }
        }
        out
    }

    /// Normalized valuation of sigma_twist(x) at w_1, or `None` when the
    /// image vanishes to the working precision (valuation >= e * M).
    pub fn valuation(&self, coeffs: &[BigInt], twist: u64) -> Option<u64> {
        let img = self.image(coeffs, twist);
        let e = self.ring.e as u64;
        let pb = BigInt::from(self.p);
        let mut best: Option<u64> = None;
        for (j, d) in img.iter().enumerate() {
            for c in d {
                if c.is_zero() {
                    continue;
                }
                let mut v = 0u64;
                let mut y = c.clone();
                while (&y % &pb).is_zero() {
                    y /= &pb;
                    v += 1;
                }
                let cand = e * v + j as u64;
                best = Some(best.map_or(cand, |b| b.min(cand)));
            }
        }
        best.filter(|&b| b < e * self.precision as u64)
    }

    /// Residue of sigma_twist(x) in F_{p^f} (the pi^0 coordinate mod p).
    pub fn residue(&self, coeffs: &[BigInt], twist: u64) -> Vec<u64> {
        let img = self.image(coeffs, twist);
        let pb = BigInt::from(self.p);
        img[0].iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect()
    }

    pub fn finite_field(&self) -> FiniteField {
        FiniteField {
            p: self.p,
            f: self.ring.gr.f,
            modulus: self
                .ring
                .gr
                .defining
                .iter()
                .map(|c| c.mod_floor(&BigInt::from(self.p)).to_u64().unwrap())
                .collect(),
        }
    }
}
