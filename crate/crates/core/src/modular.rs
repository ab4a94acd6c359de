//! Matrices over `Z/mZ`, reduction from Z, and orders of `SL(n, Z/mZ)`.

use std::fmt;
use std::ops::Mul;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{adjugate, IntMatrix};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= u32::MAX as u64 {
        (a * b) % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it is a unit.
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

/// Reduces a big integer into `[0, m)`.
pub fn reduce_bigint(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits in u64")
}

/// Square matrix over `Z/mZ`, row-major, entries in `[0, m)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    n: usize,
    modulus: u64,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn new(n: usize, modulus: u64, data: Vec<u64>) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        assert_eq!(data.len(), n * n);
        let data = data.into_iter().map(|x| x % modulus).collect();
        ModMatrix { n, modulus, data }
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R], modulus: u64) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n);
            data.extend(r.iter().map(|&x| x.rem_euclid(modulus as i64) as u64));
        }
        ModMatrix { n, modulus, data }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1 % modulus;
        }
        ModMatrix { n, modulus, data }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn is_identity(&self) -> bool {
        let n = self.n;
        self.data.iter().enumerate().all(|(k, &x)| x == u64::from(k / n == k % n))
    }

    pub fn is_scalar(&self) -> bool {
        let n = self.n;
        let d = self.data[0];
        self.data.iter().enumerate().all(|(k, &x)| if k / n == k % n { x == d } else { x == 0 })
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).fold(0, |t, i| add_mod(t, self.get(i, i), self.modulus))
    }

    pub fn transpose(&self) -> ModMatrix {
        let n = self.n;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        ModMatrix { n, modulus: self.modulus, data }
    }

    pub fn pow(&self, mut e: u64) -> ModMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n, self.modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Lifts entries to the representatives in `[0, m)`.
    pub fn lift(&self) -> IntMatrix {
        IntMatrix::new(self.n, self.data.iter().map(|&x| BigInt::from(x)).collect())
            .expect("square by construction")
    }

    /// Determinant modulo m.
    pub fn determinant(&self) -> u64 {
        reduce_bigint(&self.lift().determinant(), self.modulus)
    }

    /// Row vector times matrix: `v * self`.
    pub fn act_on_row(&self, v: &[u64], out: &mut [u64]) {
        let n = self.n;
        let m = self.modulus;
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let mut acc: u128 = 0;
            for (i, &vi) in v.iter().enumerate().take(n) {
                if vi != 0 {
                    acc += vi as u128 * self.data[i * n + j] as u128;
                }
            }
            *o = (acc % m as u128) as u64;
        }
    }

    /// `[self, other] = self^-1 other^-1 self other`, given both inverses.
    pub fn commutator_with(&self, self_inv: &ModMatrix, other: &ModMatrix, other_inv: &ModMatrix) -> ModMatrix {
        &(&(self_inv * other_inv) * self) * other
    }

    pub fn inverse(&self) -> Result<ModMatrix> {
        inverse_mod(self)
    }

    /// Entries packed into a single word when they fit, for hashing.
    pub fn pack(&self) -> Option<u128> {
        let bits = 64 - (self.modulus - 1).leading_zeros();
        let bits = bits.max(1) as usize;
        if bits * self.data.len() > 128 {
            return None;
        }
        let mut key = 0u128;
        for &x in &self.data {
            key = (key << bits) | x as u128;
        }
        Some(key)
    }
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[u64]> = self.data.chunks(self.n).collect();
        write!(f, "{:?} mod {}", rows, self.modulus)
    }
}

impl Mul for &ModMatrix {
    type Output = ModMatrix;

    fn mul(self, rhs: &ModMatrix) -> ModMatrix {
        debug_assert_eq!(self.n, rhs.n);
        debug_assert_eq!(self.modulus, rhs.modulus);
        let n = self.n;
        let m = self.modulus;
        let mut data = vec![0u64; n * n];
        if m <= (1 << 28) {
            // n <= 16 products of 56-bit terms fit in u64
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0u64;
                    for k in 0..n {
                        acc += self.data[i * n + k] * rhs.data[k * n + j];
                    }
                    data[i * n + j] = acc % m;
                }
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0u128;
                    for k in 0..n {
                        acc = (acc + self.data[i * n + k] as u128 * rhs.data[k * n + j] as u128) % m as u128;
                    }
                    data[i * n + j] = acc as u64;
                }
            }
        }
        ModMatrix { n, modulus: m, data }
    }
}

impl Mul for ModMatrix {
    type Output = ModMatrix;

    fn mul(self, rhs: ModMatrix) -> ModMatrix {
        &self * &rhs
    }
}

/// Entrywise reduction `phi_m(A)`.
pub fn reduce_mod(a: &IntMatrix, m: u64) -> ModMatrix {
    assert!(m >= 2, "modulus must be at least 2");
    let data = a.entries().iter().map(|x| reduce_bigint(x, m)).collect();
    ModMatrix { n: a.degree(), modulus: m, data }
}

/// Inverse over `Z/mZ`: Gauss–Jordan for prime moduli, adjugate times the
/// inverse determinant otherwise.
pub fn inverse_mod(a: &ModMatrix) -> Result<ModMatrix> {
    let m = a.modulus;
    if crate::factor::is_prime_u64(m) {
        return gauss_inverse(a);
    }
    let det = a.determinant();
    let Some(dinv) = inv_mod(det, m) else {
        return Err(Error::NotInvertibleMod { modulus: m });
    };
    let adj = reduce_mod(&adjugate(&a.lift()), m);
    Ok(ModMatrix {
        n: a.n,
        modulus: m,
        data: adj.data.iter().map(|&x| mul_mod(x, dinv, m)).collect(),
    })
}

fn gauss_inverse(a: &ModMatrix) -> Result<ModMatrix> {
    let n = a.n;
    let p = a.modulus;
    let w = 2 * n;
    let mut aug = vec![0u64; n * w];
    for i in 0..n {
        aug[i * w..i * w + n].copy_from_slice(&a.data[i * n..i * n + n]);
        aug[i * w + n + i] = 1;
    }
    for c in 0..n {
        let piv = (c..n).find(|&r| aug[r * w + c] != 0).ok_or(Error::NotInvertibleMod { modulus: p })?;
        if piv != c {
            for j in 0..w {
                aug.swap(piv * w + j, c * w + j);
            }
        }
        let inv = inv_mod(aug[c * w + c], p).expect("non-zero in a field");
        for j in 0..w {
            aug[c * w + j] = mul_mod(aug[c * w + j], inv, p);
        }
        for r in 0..n {
            if r == c || aug[r * w + c] == 0 {
                continue;
            }
            let f = aug[r * w + c];
            for j in 0..w {
                let t = mul_mod(f, aug[c * w + j], p);
                aug[r * w + j] = sub_mod(aug[r * w + j], t, p);
            }
        }
    }
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        data.extend_from_slice(&aug[i * w + n..i * w + w]);
    }
    Ok(ModMatrix { n, modulus: p, data })
}

/// Prime factorisation of a machine-size integer by trial division.
pub fn factor_small(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// `|SL(n, p)| = p^{n(n-1)/2} * prod_{i=2..n} (p^i - 1)`.
fn sl_order_prime(n: usize, p: u64) -> BigUint {
    let p = BigUint::from(p);
    let mut order = num_traits::pow(p.clone(), n * (n - 1) / 2);
    for i in 2..=n {
        order *= num_traits::pow(p.clone(), i) - BigUint::one();
    }
    order
}

/// Exact order of `SL(n, Z/mZ)`.
pub fn sl_order(n: usize, m: u64) -> BigUint {
    assert!(n >= 1 && m >= 1);
    factor_small(m).into_iter().fold(BigUint::one(), |acc, (p, e)| {
        let lift = num_traits::pow(BigUint::from(p), (e as usize - 1) * (n * n - 1));
        acc * lift * sl_order_prime(n, p)
    })
}

/// True iff `g^i != 1` for every `1 <= i <= k`.
pub fn element_order_exceeds(g: &ModMatrix, k: u64) -> bool {
    let mut x = g.clone();
    for _ in 1..=k {
        if x.is_identity() {
            return false;
        }
        x = &x * g;
    }
    true
}

/// Exact multiplicative order of `g`, searched up to `limit`.
pub fn element_order(g: &ModMatrix, limit: u64) -> Option<u64> {
    let mut x = g.clone();
    for i in 1..=limit {
        if x.is_identity() {
            return Some(i);
        }
        x = &x * g;
    }
    None
}

/// Row echelon span of vectors over a prime field `F_p`.
#[derive(Clone, Debug)]
pub struct FpSpan {
    p: u64,
    dimension: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl FpSpan {
    pub fn new(dimension: usize, p: u64) -> Self {
        FpSpan { p, dimension, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut w: Vec<u64> = v.iter().map(|&x| x % p).collect();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let f = w[c];
            if f == 0 {
                continue;
            }
            for (x, &y) in w.iter_mut().zip(row) {
                if y != 0 {
                    *x = sub_mod(*x, mul_mod(f, y, p), p);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Inserts `v`; returns whether the rank grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        debug_assert_eq!(v.len(), self.dimension);
        let p = self.p;
        let mut w = self.reduce(v);
        let Some(c) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(w[c], p).expect("prime field");
        for x in w.iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for row in &mut self.rows {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&w) {
                if y != 0 {
                    *x = sub_mod(*x, mul_mod(f, y, p), p);
                }
            }
        }
        self.rows.push(w);
        self.pivots.push(c);
        true
    }
}

/// Basis of the right null space `{x : A x = 0}` over `F_p`, where `A` has
/// `cols` columns and is given by its rows.
pub fn nullspace_mod(rows: &[Vec<u64>], cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut span = FpSpan::new(cols, p);
    for r in rows {
        span.insert(r);
        if span.rank() == cols {
            return Vec::new();
        }
    }
    // span rows are fully reduced (RREF up to row order)
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (i, &c) in span.pivots.iter().enumerate() {
            v[c] = Some(i);
        }
        v
    };
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| pivot_set[c].is_none()) {
        let mut x = vec![0u64; cols];
        x[free] = 1;
        for (c, slot) in pivot_set.iter().enumerate() {
            if let Some(i) = slot {
                let coeff = span.rows[*i][free];
                x[c] = (p - coeff) % p;
            }
        }
        basis.push(x);
    }
    basis
}

/// Determinant over `F_p` of a flat `n x n` matrix.
pub fn det_mod_prime(n: usize, data: &[u64], p: u64) -> u64 {
    let mut a = data.to_vec();
    let mut det = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| a[r * n + c] != 0) else {
            return 0;
        };
        if piv != c {
            for j in 0..n {
                a.swap(piv * n + j, c * n + j);
            }
            det = (p - det) % p;
        }
        let d = a[c * n + c];
        det = mul_mod(det, d, p);
        let inv = inv_mod(d, p).expect("prime field");
        for r in c + 1..n {
            let f = mul_mod(a[r * n + c], inv, p);
            if f == 0 {
                continue;
            }
            for j in c..n {
                let t = mul_mod(f, a[c * n + j], p);
                a[r * n + j] = sub_mod(a[r * n + j], t, p);
            }
        }
    }
    det
}

/// Binary gcd helper on big integers kept here for callers that mix moduli.
pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn is_zero_big(x: &BigInt) -> bool {
    x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMatrix;

    #[test]
    fn reduce_examples() {
        assert!(reduce_mod(&IntMatrix::identity(3), 5).is_identity());
        let z = IntMatrix::from_rows(&[[0, 0, 1], [1, 0, -1], [0, 1, -2]]);
        assert_eq!(reduce_mod(&z, 2), ModMatrix::from_rows(&[[0, 0, 1], [1, 0, 1], [0, 1, 0]], 2));
        assert!(reduce_mod(&IntMatrix::from_rows(&[[1, 6], [0, 1]]), 3).is_identity());
    }

    #[test]
    fn inverse_examples() {
        assert!(inverse_mod(&ModMatrix::identity(3, 7)).unwrap().is_identity());
        let u = ModMatrix::from_rows(&[[1, 1], [0, 1]], 4);
        assert_eq!(inverse_mod(&u).unwrap(), ModMatrix::from_rows(&[[1, 3], [0, 1]], 4));
        let s = ModMatrix::from_rows(&[[2, 0], [0, 2]], 4);
        assert_eq!(inverse_mod(&s), Err(Error::NotInvertibleMod { modulus: 4 }));
        let g = ModMatrix::from_rows(&[[3, 5, 1], [2, 2, 0], [7, 1, 4]], 11);
        assert!((&g * &inverse_mod(&g).unwrap()).is_identity());
    }

    #[test]
    fn sl_orders() {
        assert_eq!(sl_order(2, 2), BigUint::from(6u32));
        assert_eq!(sl_order(2, 4), BigUint::from(48u32));
        assert_eq!(sl_order(3, 2), BigUint::from(168u32));
        assert_eq!(sl_order(3, 4), BigUint::from(43008u32));
        assert_eq!(sl_order(3, 8), BigUint::from(11010048u32));
        assert_eq!(sl_order(3, 5), BigUint::from(372000u32));
        assert_eq!(sl_order(3, 3), BigUint::from(5616u32));
        assert_eq!(sl_order(5, 2), BigUint::from(9999360u32));
    }

    #[test]
    fn order_exceeds() {
        assert!(!element_order_exceeds(&ModMatrix::identity(2, 5), 5));
        assert!(element_order_exceeds(&ModMatrix::from_rows(&[[1, 1], [0, 1]], 101), 10));
        assert!(!element_order_exceeds(&ModMatrix::from_rows(&[[0, -1], [1, 0]], 7), 10));
        assert_eq!(element_order(&ModMatrix::from_rows(&[[0, -1], [1, 0]], 7), 10), Some(4));
    }

    #[test]
    fn nullspace_and_span() {
        // x + y + z = 0 over F_5
        let ns = nullspace_mod(&[vec![1, 1, 1]], 3, 5);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert_eq!(v.iter().sum::<u64>() % 5, 0);
        }
        let mut s = FpSpan::new(3, 5);
        assert!(s.insert(&[1, 2, 3]));
        assert!(!s.insert(&[2, 4, 1]));
        assert!(s.insert(&[0, 1, 0]));
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn determinant_mod_prime() {
        let d = det_mod_prime(3, &[2, 3, 1, 4, 1, 5, 6, 4, 7], 13);
        // integer determinant is 2*(7-20) - 3*(28-30) + 1*(16-6) = -26 + 6 + 10 = -10
        assert_eq!(d, 3);
    }

    #[test]
    fn large_modulus_arithmetic() {
        let p = 1_000_000_007u64 * 3 + 2; // not prime, exercises u128 path
        let a = ModMatrix::from_rows(&[[p as i64 - 1, 2], [3, 4]], p);
        let b = &a * &a;
        assert_eq!(b.get(0, 0), (1 + 6) % p);
    }
}
