//! Search for primes l such that the degree-mn subfield L of Q(zeta_l)
//! satisfies the inertness and local-norm conditions (a), (b), together with
//! the sufficient conditions (c), (d).

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WeilError};
use crate::modmath::{
    distinct_prime_factors, euler_phi, gcd, inv_mod, lcm, mul_mod, multiplicative_order, pow_mod, primes_up_to,
    reduce_bigint, Rational,
};
use crate::weil::{construct_weil, kernel_basis, WeilContext, WeilElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// A hit satisfies (c) and (d).
    SufficientCd,
    /// A hit satisfies (a) and (b) = true.
    FullAb,
}

impl std::str::FromStr for SearchMode {
    type Err = WeilError;

    fn from_str(s: &str) -> Result<SearchMode> {
        match s {
            "cd" | "sufficient_cd" => Ok(SearchMode::SufficientCd),
            "ab" | "full_ab" => Ok(SearchMode::FullAb),
            _ => Err(WeilError::InvalidInput(format!("unknown search mode {s:?} (expected cd or ab)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    True,
    False,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct SearchTask {
    pub ctx: WeilContext,
    pub n: u64,
    pub mn: u64,
    pub generators: Vec<WeilElement>,
    pub bound: u64,
    pub mode: SearchMode,
}

/// Generators of W(p, n): pi for each kernel basis vector, plus zeta_mn.
pub fn build_task(ctx: WeilContext, n: u64, bound: u64, mode: SearchMode, coeff_bound: u64) -> Result<SearchTask> {
    ctx.check_level(n)?;
    let mut generators: Vec<WeilElement> =
        kernel_basis(&ctx.splitting).iter().map(|s| construct_weil(&ctx, s, n, coeff_bound)).collect::<Result<_>>()?;
    generators.push(WeilElement::root_of_unity(&ctx, n, 1)?);
    let mn = ctx.m() * n;
    Ok(SearchTask { ctx, n, mn, generators, bound, mode })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueCheck {
    pub generator: usize,
    /// Image of zeta_N in F_l defining the prime above l.
    pub root: u64,
    pub residue: u64,
    pub exponent: u64,
    pub is_power: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub l: u64,
    pub passes_a: bool,
    pub passes_b: Verdict,
    pub passes_c: bool,
    pub passes_d: bool,
    pub hit: bool,
    pub l_description: String,
    pub certificate: Vec<String>,
    pub b_residues: Vec<ResidueCheck>,
}

/// (c): mn | l - 1 and p generates the cyclic quotient of order mn of (Z/l)^x.
pub fn condition_c(l: u64, p: u64, mn: u64) -> bool {
    if l == p || mn == 0 || !(l - 1).is_multiple_of(mn) || p.is_multiple_of(l) {
        return false;
    }
    distinct_prime_factors(mn).iter().all(|&r| pow_mod(p % l, (l - 1) / r, l) != 1)
}

/// (a): p is inert in the degree-mn subfield of Q(zeta_l), read off the
/// order of p in (Z/l)^x.
pub fn condition_a(l: u64, p: u64, mn: u64) -> bool {
    if l == p || mn == 0 || !(l - 1).is_multiple_of(mn) || p.is_multiple_of(l) {
        return false;
    }
    let ord = multiplicative_order(p as i64, l).expect("p is a unit mod l");
    ord / gcd(ord, (l - 1) / mn) == mn
}

/// Every image of zeta_N in F_l, for l = 1 mod N.
pub fn primitive_roots_of_unity(n: u64, l: u64) -> Vec<u64> {
    debug_assert_eq!((l - 1) % n, 0);
    let primes = distinct_prime_factors(n);
    let y = (2..l)
        .map(|k| pow_mod(k, (l - 1) / n, l))
        .find(|&y| primes.iter().all(|&r| pow_mod(y, n / r, l) != 1))
        .expect("F_l^x is cyclic");
    let mut roots: Vec<u64> = (1..=n).filter(|&j| gcd(j, n) == 1).map(|j| pow_mod(y, j, l)).collect();
    if n == 1 {
        roots = vec![1];
    }
    roots.sort_unstable();
    roots
}

/// Residue of pi^n = numerator / p^k at the prime zeta_N -> root.
fn residue_of(task: &SearchTask, g: &WeilElement, l: u64, root: u64) -> Result<u64> {
    let x = g.explicit.as_ref().ok_or(WeilError::MissingCertificate { index: 0 })?;
    let mut acc = 0u64;
    let mut r = 1u64;
    for c in x.numerator.coeffs() {
        if !c.is_zero() {
            acc = (acc + mul_mod(reduce_bigint(c, l), r, l)) % l;
        }
        r = mul_mod(r, root, l);
    }
    let p_inv = inv_mod(task.ctx.p() % l, l).expect("l != p");
    Ok(mul_mod(acc, pow_mod(p_inv, x.p_power as u64, l), l))
}

fn require_certificates(task: &SearchTask) -> Result<()> {
    match task.generators.iter().position(|g| g.explicit.is_none()) {
        Some(index) => Err(WeilError::MissingCertificate { index }),
        None => Ok(()),
    }
}

/// (d): l = 1 mod lcm(N, mn) and every generator's pi^n is an n-th power at
/// every prime of K above l.
pub fn condition_d(l: u64, task: &SearchTask) -> Result<bool> {
    require_certificates(task)?;
    let n_k = task.ctx.field.conductor;
    if l == task.ctx.p() || (n_k * task.mn * task.ctx.p()).is_multiple_of(l) {
        return Ok(false);
    }
    if !(l - 1).is_multiple_of(lcm(n_k, task.mn)) {
        return Ok(false);
    }
    if task.n == 1 {
        return Ok(true);
    }
    let roots = primitive_roots_of_unity(n_k, l);
    for g in &task.generators {
        for &root in &roots {
            let res = residue_of(task, g, l, root)?;
            if pow_mod(res, (l - 1) / task.n, l) != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// (b) at the primes above l: for each generator, pi^mn must be an mn-th
/// power residue at every place of Q[pi^mn] above l. The residue test only
/// applies at places of degree 1 over Q_l.
pub fn condition_b(l: u64, task: &SearchTask) -> Result<(Verdict, Vec<ResidueCheck>)> {
    require_certificates(task)?;
    let n_k = task.ctx.field.conductor;
    let mn = task.mn;
    if l == task.ctx.p() || !(l - 1).is_multiple_of(mn) {
        return Ok((Verdict::Undetermined, Vec::new()));
    }
    if !(l - 1).is_multiple_of(n_k) {
        // some place above l has degree > 1 over Q_l; unreachable when N | m
        return Ok((Verdict::Undetermined, Vec::new()));
    }
    let roots = primitive_roots_of_unity(n_k, l);
    let m = task.ctx.m();
    let mut checks = Vec::new();
    let mut verdict = Verdict::True;
    for (gi, g) in task.generators.iter().enumerate() {
        if g.is_torsion() {
            continue;
        }
        for &root in &roots {
            let res = pow_mod(residue_of(task, g, l, root)?, m, l);
            let is_power = pow_mod(res, (l - 1) / mn, l) == 1;
            if !is_power {
                verdict = Verdict::False;
            }
            checks.push(ResidueCheck { generator: gi, root, residue: res, exponent: mn, is_power });
        }
    }
    Ok((verdict, checks))
}

pub fn evaluate(l: u64, task: &SearchTask) -> Result<Candidate> {
    let p = task.ctx.p();
    let mn = task.mn;
    let mut certificate = Vec::new();
    let l_description = format!("degree-{mn} subfield of Q(zeta_{l})");
    if l == p {
        certificate.push(format!("l = p = {p}: excluded"));
        return Ok(Candidate {
            l,
            passes_a: false,
            passes_b: Verdict::Undetermined,
            passes_c: false,
            passes_d: false,
            hit: false,
            l_description,
            certificate,
            b_residues: Vec::new(),
        });
    }
    let passes_a = condition_a(l, p, mn);
    let passes_c = condition_c(l, p, mn);
    if !(l - 1).is_multiple_of(mn) {
        certificate.push(format!("{mn} does not divide {}", l - 1));
    } else {
        let ord = multiplicative_order(p as i64, l)?;
        certificate.push(format!(
            "ord_{l}({p}) = {ord}, image of order {} in the quotient of order {mn}",
            ord / gcd(ord, (l - 1) / mn)
        ));
        for r in distinct_prime_factors(mn) {
            certificate.push(format!("{p}^({}/{r}) = {} mod {l}", l - 1, pow_mod(p % l, (l - 1) / r, l)));
        }
    }
    let passes_d = condition_d(l, task)?;
    certificate.push(format!(
        "l = {} mod lcm(N, mn) = {}",
        l % lcm(task.ctx.field.conductor, mn),
        lcm(task.ctx.field.conductor, mn)
    ));
    let (passes_b, b_residues) = condition_b(l, task)?;
    for c in &b_residues {
        certificate.push(format!(
            "b: generator {} at zeta -> {}: pi^mn = {} mod {l} is {}a {}-th power",
            c.generator,
            c.root,
            c.residue,
            if c.is_power { "" } else { "not " },
            c.exponent
        ));
    }
    let hit = match task.mode {
        SearchMode::SufficientCd => passes_c && passes_d,
        SearchMode::FullAb => passes_a && passes_b == Verdict::True,
    };
    Ok(Candidate { l, passes_a, passes_b, passes_c, passes_d, hit, l_description, certificate, b_residues })
}

fn thread_pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool")
}

/// Every prime l <= bound with its verdicts, ascending. The result does not
/// depend on `threads`.
pub fn search(task: &SearchTask, threads: usize) -> Result<Vec<Candidate>> {
    let primes = primes_up_to(task.bound);
    thread_pool(threads).install(|| primes.par_iter().map(|&l| evaluate(l, task)).collect())
}

pub fn hits(candidates: &[Candidate]) -> Vec<u64> {
    candidates.iter().filter(|c| c.hit).map(|c| c.l).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeSpec {
    pub conductor: u64,
    pub p: u64,
    pub n: u64,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeRow {
    pub spec: ProbeSpec,
    pub mn: Option<u64>,
    pub first_hit_cd: Option<u64>,
    pub first_hit_ab: Option<u64>,
    pub hits_cd: u64,
    pub hits_ab: u64,
    /// Primes l <= bound with l = 1 mod lcm(N, mn), l not dividing N mn p.
    pub eligible: u64,
    #[serde(serialize_with = "crate::modmath::serialize_opt_rational")]
    pub observed_density: Option<Rational>,
    #[serde(serialize_with = "crate::modmath::serialize_opt_rational")]
    pub naive_heuristic: Option<Rational>,
    pub note: String,
    pub error: Option<String>,
}

/// Empirical evidence for the existence question; never a proof of absence.
pub fn probe_question(grid: &[ProbeSpec], coeff_bound: u64, threads: usize) -> Vec<ProbeRow> {
    grid.iter()
        .map(|spec| {
            let empty = |error: String| ProbeRow {
                spec: spec.clone(),
                mn: None,
                first_hit_cd: None,
                first_hit_ab: None,
                hits_cd: 0,
                hits_ab: 0,
                eligible: 0,
                observed_density: None,
                naive_heuristic: None,
                note: String::new(),
                error: Some(error),
            };
            let task = match WeilContext::from_conductor(spec.conductor, spec.p)
                .and_then(|ctx| build_task(ctx, spec.n, spec.bound, SearchMode::SufficientCd, coeff_bound))
            {
                Ok(t) => t,
                Err(e) => return empty(e.to_string()),
            };
            let cands = match search(&task, threads) {
                Ok(c) => c,
                Err(e) => return empty(e.to_string()),
            };
            let modulus = lcm(spec.conductor, task.mn);
            let eligible = cands
                .iter()
                .filter(|c| (c.l - 1) % modulus == 0 && (spec.conductor * task.mn * spec.p) % c.l != 0)
                .count() as u64;
            let cd: Vec<u64> = cands.iter().filter(|c| c.passes_c && c.passes_d).map(|c| c.l).collect();
            let ab: Vec<u64> =
                cands.iter().filter(|c| c.passes_a && c.passes_b == Verdict::True).map(|c| c.l).collect();
            let note =
                if cd.is_empty() && ab.is_empty() { format!("none below {}", spec.bound) } else { String::new() };
            ProbeRow {
                spec: spec.clone(),
                mn: Some(task.mn),
                first_hit_cd: cd.first().copied(),
                first_hit_ab: ab.first().copied(),
                hits_cd: cd.len() as u64,
                hits_ab: ab.len() as u64,
                eligible,
                observed_density: (eligible > 0).then(|| Rational::new(BigInt::from(cd.len()), BigInt::from(eligible))),
                naive_heuristic: Some(Rational::new(BigInt::from(1), BigInt::from(euler_phi(task.mn)))),
                note,
                error: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::{describe_field_with, FieldTable};

    fn task(conductor: u64, p: u64, n: u64, bound: u64, mode: SearchMode) -> SearchTask {
        let ctx = WeilContext::new(describe_field_with(conductor, &FieldTable::embedded()).unwrap(), p).unwrap();
        build_task(ctx, n, bound, mode, 4).unwrap()
    }

    /// Inertness of p in the degree-k subfield of Q(zeta_l) by brute force:
    /// the cosets of the index-k subgroup of k-th powers visited by powers of p.
    fn inert_brute_force(l: u64, p: u64, k: u64) -> bool {
        if !(l - 1).is_multiple_of(k) || l == p {
            return false;
        }
        let powers: std::collections::BTreeSet<u64> = (1..l).map(|x| pow_mod(x, k, l)).collect();
        // p^j lies in the subgroup of k-th powers for the first time at j = k
        (1..=k).find(|&j| powers.contains(&pow_mod(p % l, j, l))) == Some(k)
    }

    #[test]
    fn condition_c_examples() {
        assert!(condition_c(13, 5, 4));
        assert!(condition_c(13, 7, 6));
        assert!(!condition_c(13, 3, 4));
    }

    #[test]
    fn condition_a_agrees_with_c_and_brute_force() {
        for l in primes_up_to(400) {
            for p in [2u64, 3, 5, 7, 11, 13] {
                for k in [1u64, 2, 3, 4, 6, 8, 12] {
                    if l == p {
                        continue;
                    }
                    let bf = inert_brute_force(l, p, k);
                    assert_eq!(condition_a(l, p, k), bf, "l={l} p={p} k={k}");
                    assert_eq!(condition_c(l, p, k), bf, "l={l} p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn condition_d_examples() {
        let t = task(4, 5, 1, 100, SearchMode::FullAb);
        assert!(condition_d(13, &t).unwrap());
        assert!(!condition_d(5, &t).unwrap());
        assert!(condition_d(17, &t).unwrap());
        assert!(!condition_d(7, &t).unwrap());
    }

    #[test]
    fn condition_b_at_13() {
        let t = task(4, 5, 1, 100, SearchMode::FullAb);
        let (v, checks) = condition_b(13, &t).unwrap();
        assert_eq!(v, Verdict::True);
        let mut residues: Vec<u64> = checks.iter().map(|c| c.residue).collect();
        residues.sort_unstable();
        assert_eq!(residues, vec![3, 9]);
        // 2^4 = 3 and 4^4 = 9 mod 13
        assert_eq!(pow_mod(2, 4, 13), 3);
        assert_eq!(pow_mod(4, 4, 13), 9);
    }

    #[test]
    fn first_hit_is_13() {
        for mode in [SearchMode::FullAb, SearchMode::SufficientCd] {
            let t = task(4, 5, 1, 100, mode);
            let c = search(&t, 2).unwrap();
            assert_eq!(hits(&c).first(), Some(&13));
            let short = task(4, 5, 1, 12, mode);
            assert!(hits(&search(&short, 1).unwrap()).is_empty());
        }
    }

    #[test]
    fn inert_prime_task_against_brute_force() {
        // Q(i), p = 3 needs n = 2 (f = 2); mn = 8, kernel empty
        let t = task(4, 3, 2, 400, SearchMode::FullAb);
        assert_eq!(t.mn, 8);
        let c = search(&t, 3).unwrap();
        for cand in &c {
            let expected = cand.l != 3 && inert_brute_force(cand.l, 3, 8);
            assert_eq!(cand.passes_a, expected);
            assert_eq!(cand.hit, expected, "l = {}", cand.l);
        }
        assert_eq!(hits(&c).first(), Some(&17));
    }

    #[test]
    fn cd_hits_satisfy_b() {
        for (conductor, p, n) in [(4u64, 5u64, 1u64), (3, 7, 1), (4, 13, 1), (3, 13, 1), (4, 5, 2), (5, 11, 1)] {
            let t = task(conductor, p, n, 3000, SearchMode::SufficientCd);
            for cand in search(&t, 4).unwrap().into_iter().filter(|c| c.hit) {
                assert_eq!(cand.passes_b, Verdict::True, "N={conductor} p={p} n={n} l={}", cand.l);
                assert!(cand.passes_a);
            }
        }
    }

    #[test]
    fn search_is_independent_of_threads() {
        let t = task(3, 7, 1, 2000, SearchMode::FullAb);
        assert_eq!(search(&t, 1).unwrap(), search(&t, 8).unwrap());
    }

    #[test]
    fn probe_rows() {
        let rows = probe_question(
            &[
                ProbeSpec { conductor: 4, p: 5, n: 1, bound: 10_000 },
                ProbeSpec { conductor: 4, p: 3, n: 1, bound: 100 },
            ],
            4,
            2,
        );
        assert_eq!(rows[0].first_hit_cd, Some(13));
        assert!(rows[0].hits_cd > 0 && rows[0].observed_density.is_some());
        assert!(rows[1].error.as_deref().unwrap().contains("not divisible"));
        assert!(probe_question(&[], 4, 1).is_empty());
    }
}
