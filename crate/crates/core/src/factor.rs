//! Partial integer factorization (trial division plus Pollard rho) and the
//! gcd refinement loop used to shrink sieve outputs.

use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Tunables for [`partial_factor`].
#[derive(Clone, Copy, Debug)]
pub struct FactorBudget {
    /// Trial division runs over all integers below this bound.
    pub trial_bound: u64,
    /// Pollard rho iterations per seed.
    pub rho_iterations: u64,
    /// Number of rho seeds (2, 3, 5, ...) tried per composite.
    pub rho_seeds: usize,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget { trial_bound: 100_000, rho_iterations: 1_000_000, rho_seeds: 3 }
    }
}

impl FactorBudget {
    /// A budget with a short rho phase, used between gcd refinement rounds.
    pub fn cheap() -> Self {
        FactorBudget { trial_bound: 100_000, rho_iterations: 20_000, rho_seeds: 1 }
    }
}

/// `input = composite_remainder * prod p^e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialFactorization {
    #[serde(serialize_with = "crate::serde_big::biguint")]
    pub input: BigUint,
    #[serde(serialize_with = "crate::serde_big::prime_map")]
    pub prime_powers: BTreeMap<BigUint, u32>,
    #[serde(serialize_with = "crate::serde_big::biguint")]
    pub composite_remainder: BigUint,
}

impl PartialFactorization {
    pub fn is_complete(&self) -> bool {
        self.composite_remainder.is_one()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.prime_powers.keys()
    }

    /// Primes that fit in a machine word.
    pub fn small_primes(&self) -> Vec<u64> {
        self.prime_powers.keys().filter_map(|p| p.to_u64()).collect()
    }

    /// Recomputes `remainder * prod p^e`.
    pub fn reconstruct(&self) -> BigUint {
        self.prime_powers
            .iter()
            .fold(self.composite_remainder.clone(), |acc, (p, &e)| acc * num_traits::pow(p.clone(), e as usize))
    }
}

const MR_BASES_64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
fn mulmod64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod64(r, b, m);
        }
        b = mulmod64(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES_64 {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES_64 {
        let mut x = powmod64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primality: deterministic below 2^64, 64 Miller-Rabin rounds with seeded
/// random bases above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    let two = BigUint::from(2u32);
    'rounds: for _ in 0..64 {
        let a = rng.gen_biguint_range(&two, &n1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'rounds;
            }
        }
        return false;
    }
    true
}

/// All primes below `bound`.
pub fn primes_below(bound: u64) -> Vec<u64> {
    let bound = bound as usize;
    if bound < 3 {
        return Vec::new();
    }
    let mut sieve = vec![true; bound];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i < bound {
        if sieve[i] {
            let mut j = i * i;
            while j < bound {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect()
}

/// Primes `p` with `lo < p`, in increasing order, `count` of them.
pub fn primes_above(lo: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = lo + 1;
    while out.len() < count {
        if is_prime_u64(p) {
            out.push(p);
        }
        p += 1;
    }
    out
}

fn trial_primes(bound: u64) -> std::borrow::Cow<'static, [u64]> {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    let v = CACHE.get_or_init(|| primes_below(100_000));
    if bound <= 100_000 {
        let end = v.partition_point(|&p| p < bound);
        std::borrow::Cow::Borrowed(&v[..end])
    } else {
        std::borrow::Cow::Owned(primes_below(bound))
    }
}

fn rho_u64(n: u64, seed: u64, iterations: u64) -> Option<u64> {
    // Brent's cycle detection on x^2 + 1, batching 64 differences per gcd
    let f = |x: u64| ((mulmod64(x, x, n) as u128 + 1) % n as u128) as u64;
    let mut y = seed % n;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut done = 0u64;
    let mut x;
    let mut ys;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        loop {
            ys = y;
            let batch = 64.min(r - k);
            for _ in 0..batch {
                y = f(y);
                q = mulmod64(q, x.abs_diff(y), n);
            }
            done += batch;
            let g = q.gcd(&n);
            if g != 1 {
                if g != n {
                    return Some(g);
                }
                // back up one step at a time
                loop {
                    ys = f(ys);
                    let g = x.abs_diff(ys).gcd(&n);
                    if g != 1 {
                        return if g != n { Some(g) } else { None };
                    }
                }
            }
            k += batch;
            if k >= r || done >= iterations {
                break;
            }
        }
        if done >= iterations {
            return None;
        }
        r *= 2;
    }
}

fn rho_big(n: &BigUint, seed: u64, iterations: u64) -> Option<BigUint> {
    let one = BigUint::one();
    let f = |x: &BigUint| (x * x + &one) % n;
    let mut y = BigUint::from(seed) % n;
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut done = 0u64;
    loop {
        let x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        loop {
            let mut ys = y.clone();
            let batch = 64.min(r - k);
            for _ in 0..batch {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            done += batch;
            let g = q.gcd(n);
            if !g.is_one() {
                if &g != n {
                    return Some(g);
                }
                loop {
                    ys = f(&ys);
                    let diff = if x > ys { &x - &ys } else { &ys - &x };
                    let g = diff.gcd(n);
                    if !g.is_one() {
                        return if &g != n { Some(g) } else { None };
                    }
                }
            }
            k += batch;
            if k >= r || done >= iterations {
                break;
            }
        }
        if done >= iterations {
            return None;
        }
        r *= 2;
    }
}

fn rho_seeds(count: usize) -> Vec<u64> {
    primes_below(1000).into_iter().take(count).collect()
}

/// Splits `n` (composite, no small factors) with Pollard rho.
fn split(n: &BigUint, budget: &FactorBudget) -> Option<BigUint> {
    for seed in rho_seeds(budget.rho_seeds) {
        let found = match n.to_u64() {
            Some(small) => rho_u64(small, seed, budget.rho_iterations).map(BigUint::from),
            None => rho_big(n, seed, budget.rho_iterations),
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Trial division below `budget.trial_bound`, then Pollard rho on what is left.
pub fn partial_factor(d: &BigUint, budget: FactorBudget) -> PartialFactorization {
    assert!(!d.is_zero(), "partial_factor needs d >= 1");
    let mut powers: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut rest = d.clone();
    for &p in trial_primes(budget.trial_bound).iter() {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if let Some(small) = rest.to_u64() {
            if p.saturating_mul(p) > small {
                break;
            }
        }
        while (&rest % p).is_zero() {
            rest /= p;
            *powers.entry(pb.clone()).or_insert(0) += 1;
        }
    }
    let mut remainder = BigUint::one();
    let mut stack = if rest.is_one() { Vec::new() } else { vec![rest] };
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            *powers.entry(m).or_insert(0) += 1;
            continue;
        }
        match split(&m, &budget) {
            Some(f) => {
                let g = &m / &f;
                stack.push(f);
                stack.push(g);
            }
            None => remainder *= m,
        }
    }
    PartialFactorization { input: d.clone(), prime_powers: powers, composite_remainder: remainder }
}

/// Knobs for [`gcd_refine`].
#[derive(Clone, Copy, Debug)]
pub struct RefineOptions {
    /// Values produced before the first factorization attempt.
    pub min_rounds: usize,
    pub max_rounds: usize,
    /// Stop once the unfactored remainder is at most this.
    pub threshold: u64,
    pub budget: FactorBudget,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { min_rounds: 2, max_rounds: 6, threshold: 1, budget: FactorBudget::default() }
    }
}

/// Outcome of [`gcd_refine`]: the final factorization and how many values
/// went into it.
#[derive(Clone, Debug)]
pub struct Refined {
    pub factorization: PartialFactorization,
    pub rounds: usize,
}

impl Refined {
    /// True when the remainder stayed above the threshold.
    pub fn unresolved(&self) -> bool {
        !self.factorization.is_complete()
    }
}

/// Repeatedly replaces `d` by `gcd(d, d')` for fresh values from `run`.
///
/// `run` returns `None` when it cannot produce another value; the loop then
/// factors what it has. Intermediate rounds use a cheap rho budget, the last
/// one the full budget.
pub fn gcd_refine<F>(mut run: F, opts: RefineOptions) -> Option<Refined>
where
    F: FnMut() -> Option<BigUint>,
{
    let mut d = run()?;
    let mut rounds = 1;
    loop {
        if rounds >= opts.min_rounds || d.is_one() {
            let last = rounds >= opts.max_rounds;
            let budget = if last { opts.budget } else { FactorBudget::cheap() };
            let pf = partial_factor(&d, budget);
            if pf.composite_remainder <= BigUint::from(opts.threshold) || last {
                return Some(Refined { factorization: pf, rounds });
            }
        }
        match run() {
            Some(next) => {
                d = d.gcd(&next);
                rounds += 1;
            }
            None => {
                let pf = partial_factor(&d, opts.budget);
                return Some(Refined { factorization: pf, rounds });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn map(pairs: &[(u64, u32)]) -> BTreeMap<BigUint, u32> {
        pairs.iter().map(|&(p, e)| (big(p), e)).collect()
    }

    #[test]
    fn small_examples() {
        let one = partial_factor(&big(1), FactorBudget::default());
        assert!(one.prime_powers.is_empty());
        assert!(one.is_complete());
        assert_eq!(partial_factor(&big(43008), FactorBudget::default()).prime_powers, map(&[(2, 11), (3, 1), (7, 1)]));
        assert_eq!(partial_factor(&big(5332), FactorBudget::default()).prime_powers, map(&[(2, 2), (31, 1), (43, 1)]));
    }

    #[test]
    fn rho_splits_semiprimes() {
        let p = 1_000_003u64;
        let q = 998_244_353u64;
        let pf = partial_factor(&(big(p) * big(q)), FactorBudget::default());
        assert_eq!(pf.prime_powers, map(&[(p, 1), (q, 1)]));
        let r = 2_305_843_009_213_693_951u64; // 2^61 - 1
        let pf = partial_factor(&(big(r) * big(q) * big(q)), FactorBudget::default());
        assert_eq!(pf.prime_powers, map(&[(q, 2), (r, 1)]));
        assert!(pf.is_complete());
    }

    #[test]
    fn exhaustive_small_range() {
        for d in 1..=20_000u64 {
            let pf = partial_factor(&big(d), FactorBudget::default());
            assert!(pf.is_complete(), "{d}");
            assert_eq!(pf.reconstruct(), big(d));
            assert!(pf.primes().all(is_prime));
        }
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(2));
        assert!(!is_prime_u64(1));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751));
        let m127 = (BigUint::one() << 127) - BigUint::one();
        assert!(is_prime(&m127));
        assert!(!is_prime(&(&m127 * big(3))));
    }

    #[test]
    fn refine_examples() {
        let mut vals = vec![big(18), big(12)];
        let r = gcd_refine(|| vals.pop(), RefineOptions::default()).unwrap();
        assert_eq!(r.factorization.prime_powers, map(&[(2, 1), (3, 1)]));

        let p1 = (BigUint::one() << 89) - BigUint::one();
        let p2 = (BigUint::one() << 107) - BigUint::one();
        let p3 = (BigUint::one() << 127) - BigUint::one();
        let mut vals = vec![&p1 * &p2, &p3 * &p3];
        let r = gcd_refine(|| vals.pop(), RefineOptions::default()).unwrap();
        assert!(r.factorization.is_complete());
        assert!(r.factorization.input.is_one());

        let budget = FactorBudget { trial_bound: 1000, rho_iterations: 100, rho_seeds: 1 };
        let semi: BigUint = &p2 * &p3;
        let mut vals = vec![semi.clone(), semi.clone()];
        let opts = RefineOptions { max_rounds: 2, budget, ..RefineOptions::default() };
        let r = gcd_refine(|| vals.pop(), opts).unwrap();
        assert!(r.unresolved());
        assert_eq!(r.factorization.composite_remainder, semi);
    }
}
