//! Generalized Artin sets, the power obstruction, and Wieferich primes.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WeilError};
use crate::modmath::{
    distinct_prime_factors, euler_phi, gcd, is_prime_u64, is_square_free, kronecker, multiplicative_order, pow_mod,
    primes_up_to, reduce_i64,
};

/// An abelian number field: the fixed field of a subgroup H of (Z/C)^x
/// inside Q(zeta_C).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianField {
    pub conductor: u64,
    pub subgroup: Vec<u64>,
    pub degree: u64,
    pub name: String,
}

impl AbelianField {
    pub fn rationals() -> AbelianField {
        AbelianField { conductor: 1, subgroup: vec![0], degree: 1, name: "Q".into() }
    }

    pub fn cyclotomic(conductor: u64) -> Result<AbelianField> {
        if conductor <= 2 {
            return Ok(AbelianField::rationals());
        }
        Ok(AbelianField {
            conductor,
            subgroup: vec![1],
            degree: euler_phi(conductor),
            name: format!("Q(zeta_{conductor})"),
        })
    }

    /// The maximal real subfield of Q(zeta_C).
    pub fn real_cyclotomic(conductor: u64) -> Result<AbelianField> {
        if conductor <= 4 {
            return Ok(AbelianField::rationals());
        }
        let mut f = AbelianField::with_subgroup(conductor, &[1, conductor - 1])?;
        f.name = format!("Q(zeta_{conductor})^+");
        Ok(f)
    }

    /// Fixed field of the subgroup generated by `generators`.
    pub fn with_subgroup(conductor: u64, generators: &[u64]) -> Result<AbelianField> {
        if conductor <= 2 {
            return Ok(AbelianField::rationals());
        }
        let mut group = vec![1u64];
        for &g in generators {
            if gcd(g % conductor, conductor) != 1 {
                return Err(WeilError::NotCoprime { a: g as i64, modulus: conductor });
            }
        }
        // closure under multiplication by the generators
        let mut i = 0;
        while i < group.len() {
            for &g in generators {
                let x = group[i] * (g % conductor) % conductor;
                if !group.contains(&x) {
                    group.push(x);
                }
            }
            i += 1;
        }
        group.sort_unstable();
        let degree = euler_phi(conductor) / group.len() as u64;
        Ok(AbelianField { conductor, subgroup: group, degree, name: format!("Q(zeta_{conductor})^H") })
    }

    /// p splits completely: p is unramified and its Frobenius lies in H.
    pub fn splits(&self, p: u64) -> bool {
        if self.conductor <= 2 {
            return true;
        }
        !p.is_multiple_of(self.conductor) && self.subgroup.contains(&(p % self.conductor))
    }

    /// Whether sqrt(a) lies in this field: the quadratic character of
    /// Q(sqrt a) has conductor dividing C and is trivial on H.
    pub fn contains_sqrt(&self, a: i64) -> bool {
        let d = if reduce_i64(a, 4) == 1 { a } else { 4 * a };
        let cond = d.unsigned_abs();
        if self.conductor <= 2 || !self.conductor.is_multiple_of(cond) {
            return false;
        }
        self.subgroup.iter().all(|&h| kronecker(d, h) == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MTask {
    pub a: i64,
    pub n: u64,
    pub field: AbelianField,
    pub bound: u64,
    /// Index filter: the index of <a> in (Z/p)^x divides k. Defaults to 1;
    /// None leaves only the order-n quotient condition.
    pub k: Option<u64>,
}

impl MTask {
    pub fn new(a: i64, n: u64, field: AbelianField, bound: u64) -> Result<MTask> {
        MTask::with_index_divisor(a, n, field, bound, Some(1))
    }

    pub fn with_index_divisor(a: i64, n: u64, field: AbelianField, bound: u64, k: Option<u64>) -> Result<MTask> {
        if a == 1 || a == -1 || !is_square_free(a) {
            return Err(WeilError::InvalidInput(format!("a = {a} must be square-free and different from +-1")));
        }
        if n == 0 || k == Some(0) {
            return Err(WeilError::InvalidInput("n and k must be positive".into()));
        }
        Ok(MTask { a, n, field, bound, k })
    }
}

fn in_m(task: &MTask, p: u64, n_primes: &[u64]) -> bool {
    let a = reduce_i64(task.a, p);
    if a == 0 || !task.field.splits(p) || !(p - 1).is_multiple_of(task.n) {
        return false;
    }
    if !n_primes.iter().all(|&r| pow_mod(a, (p - 1) / r, p) != 1) {
        return false;
    }
    match task.k {
        Some(k) => k % ((p - 1) / multiplicative_order(task.a, p).unwrap()) == 0,
        None => true,
    }
}

pub fn enumerate_m(task: &MTask, threads: usize) -> Vec<u64> {
    let n_primes = distinct_prime_factors(task.n);
    let primes = primes_up_to(task.bound);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
    pool.install(|| primes.par_iter().copied().filter(|&p| in_m(task, p, &n_primes)).collect())
}

/// Whether the square-free a (not +-1) is an m-th power in F. X^m - a is
/// Eisenstein at any prime dividing a, so a^(1/m) generates a degree-m field,
/// which is normal only for m <= 2; an abelian F can contain it only then.
pub fn is_power_in(a: i64, m: u64, field: &AbelianField) -> bool {
    match m {
        0 => false,
        1 => true,
        2 => field.contains_sqrt(a),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerObstruction {
    pub bound: u64,
    /// True: 2 [F:Q] is an upper bound for the exponents, not the exact N.
    pub conservative: bool,
}

/// A multiple N of every m for which a is an m-th power in F Q^ab, in the
/// conservative form 2 [F:Q].
pub fn power_obstruction(a: i64, field: &AbelianField) -> Result<PowerObstruction> {
    if a == 1 || a == -1 || !is_square_free(a) {
        return Err(WeilError::InvalidInput(format!("a = {a} must be square-free and different from +-1")));
    }
    Ok(PowerObstruction { bound: 2 * field.degree, conservative: true })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WieferichReport {
    pub p: u64,
    pub bound: u64,
    pub primes: Vec<u64>,
    /// Every hit recomputed with arbitrary-precision arithmetic.
    pub rechecked: bool,
    /// Sum of 1/l over primes l <= bound, l != p: the heuristic expected count.
    pub heuristic_expected: String,
    pub primes_scanned: u64,
}

fn mul_mod_u128(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u128(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod_u128(result, base, m);
        }
        base = mul_mod_u128(base, base, m);
        exp >>= 1;
    }
    result
}

/// p^(l-1) = 1 mod l^2, computed with u128 intermediates (l < 2^32).
pub fn is_wieferich(p: u64, l: u64) -> bool {
    let l2 = l * l;
    pow_mod_u128(p % l2, l - 1, l2) == 1
}

fn is_wieferich_big(p: u64, l: u64) -> bool {
    let l2 = BigUint::from(l) * BigUint::from(l);
    BigUint::from(p).modpow(&BigUint::from(l - 1), &l2).is_one()
}

/// Fixed-point decimal string of sum 1/l with 12 fractional digits.
fn reciprocal_sum(primes: &[u64], skip: u64) -> String {
    const SCALE: u128 = 1_000_000_000_000;
    let total: u128 = primes.iter().filter(|&&l| l != skip).map(|&l| SCALE / l as u128).sum();
    format!("{}.{:012}", total / SCALE, total % SCALE)
}

pub fn wieferich_search(p: u64, bound: u64, threads: usize) -> Result<WieferichReport> {
    if !is_prime_u64(p) {
        return Err(WeilError::InvalidInput(format!("{p} is not prime")));
    }
    if !(2..1 << 32).contains(&bound) {
        return Err(WeilError::InvalidInput(format!("bound must lie in [2, 2^32), got {bound}")));
    }
    let primes = primes_up_to(bound);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
    let hits: Vec<u64> =
        pool.install(|| primes.par_iter().copied().filter(|&l| l != p && is_wieferich(p, l)).collect());
    let rechecked = hits.iter().all(|&l| is_wieferich_big(p, l));
    Ok(WieferichReport {
        p,
        bound,
        rechecked,
        heuristic_expected: reciprocal_sum(&primes, p),
        primes_scanned: primes.iter().filter(|&&l| l != p).count() as u64,
        primes: hits,
    })
}
