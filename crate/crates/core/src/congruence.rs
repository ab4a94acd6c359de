//! Congruence images modulo composite numbers, given the level `M`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::is_prime_u64;
use crate::group::GenSet;
use crate::modular::sl_order;
use crate::params::Params;
use crate::recognition::{exact_order, ImageOrder};

/// `k = a b c` with `a = gcd(k, M)`, every prime of `b` dividing `a`, and
/// `gcd(c, a) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModulusSplit {
    pub k: u64,
    pub level: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

pub fn decompose_modulus(k: u64, level: u64, degree: usize) -> Result<ModulusSplit> {
    if k < 2 || level < 1 {
        return Err(Error::InvalidArgument(format!("need k >= 2 and M >= 1, got k={k}, M={level}")));
    }
    if degree == 2 && !is_prime_u64(k) {
        return Err(Error::DegreeTwoComposite(k));
    }
    let a = k.gcd(&level);
    let mut c = k / a;
    loop {
        let g = c.gcd(&a);
        if g == 1 {
            break;
        }
        c /= g;
    }
    let b = k / (a * c);
    Ok(ModulusSplit { k, level, a, b, c })
}

/// Exact `|phi_k(G)|`.
pub fn image_order_mod(g: &GenSet, k: u64, params: &Params) -> Result<ImageOrder> {
    if k < 2 {
        return Err(Error::InvalidArgument("modulus must be at least 2".into()));
    }
    exact_order(&g.reduce(k), params)
}

/// `|phi_{ab}(G)| * |SL(n, Z/c)|`, the order predicted by the splitting of
/// `phi_k(G)` as a direct product.
pub fn predicted_order(g: &GenSet, split: &ModulusSplit, order_mod_ab: &BigUint) -> BigUint {
    order_mod_ab * sl_order(g.degree(), split.c)
}

/// Orders modulo `p, p^2, ..., p^e` and the exponents of consecutive ratios.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ladder {
    pub prime: u64,
    #[serde(serialize_with = "crate::serde_big::biguint_seq")]
    pub orders: Vec<BigUint>,
    pub exponents: Vec<u32>,
}

impl Ladder {
    pub fn is_monotone(&self) -> bool {
        self.exponents.windows(2).all(|w| w[0] <= w[1])
    }
}

/// `e` with `x = p^e`, if any.
fn p_exponent(mut x: BigUint, p: u64) -> Option<u32> {
    let p = BigUint::from(p);
    let mut e = 0;
    while !x.is_one() {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return None;
        }
        x = q;
        e += 1;
    }
    Some(e)
}

pub fn prime_power_ladder(g: &GenSet, p: u64, e_max: u32, params: &Params) -> Result<Ladder> {
    if !is_prime_u64(p) {
        return Err(Error::CompositeModulus(p));
    }
    let n = g.degree() as u32;
    let mut orders: Vec<BigUint> = Vec::new();
    let mut exponents = Vec::new();
    let mut m = 1u64;
    for _ in 0..e_max {
        m = m.checked_mul(p).ok_or(Error::OrderOracleUnavailable(u64::MAX))?;
        let o = image_order_mod(g, m, params)?.order;
        if let Some(prev) = orders.last() {
            let (q, r) = o.div_rem(prev);
            let e = if r.is_zero() { p_exponent(q, p) } else { None };
            match e {
                Some(e) if e < n * n => exponents.push(e),
                _ => return Err(Error::Invariant(format!("order ratio modulo {m} is not a power of {p} below p^{}", n * n))),
            }
        }
        orders.push(o);
    }
    Ok(Ladder { prime: p, orders, exponents })
}
