//! Exact integer and rational matrix arithmetic.
//!
//! Everything here is exact: [`IntMatrix`] holds arbitrary-precision integers
//! and [`RationalSpan`] keeps a reduced row echelon basis over Q. These are the
//! global (characteristic zero) counterparts of [`crate::modular`].

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square matrix with arbitrary-precision integer entries, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(n: usize, entries: Vec<BigInt>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        Ok(IntMatrix { n, entries })
    }

    /// Builds a matrix from small integer rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n, "matrix rows must have length {n}");
            entries.extend(r.iter().map(|&x| BigInt::from(x)));
        }
        IntMatrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn zero(n: usize) -> Self {
        IntMatrix { n, entries: vec![BigInt::zero(); n * n] }
    }

    /// `1 + c * E_{ij}`.
    pub fn elementary(n: usize, i: usize, j: usize, c: i64) -> Self {
        let mut m = Self::identity(n);
        m.entries[i * n + j] += c;
        m
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigInt]> {
        self.entries.chunks(self.n)
    }

    pub fn is_identity(&self) -> bool {
        let n = self.n;
        self.entries.iter().enumerate().all(|(k, x)| {
            if k / n == k % n {
                x.is_one()
            } else {
                x.is_zero()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn trace(&self) -> BigInt {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &IntMatrix) -> BigInt {
        let n = self.n;
        let mut t = BigInt::zero();
        for i in 0..n {
            for k in 0..n {
                t += &self.entries[i * n + k] * &other.entries[k * n + i];
            }
        }
        t
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].clone();
            }
        }
        out
    }

    /// `self - 1`.
    pub fn minus_identity(&self) -> IntMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.entries[i * self.n + i] -= 1;
        }
        m
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix { n: self.n, entries: self.entries.iter().map(|x| x * c).collect() }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        debug_assert_eq!(self.n, other.n);
        IntMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n);
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

    /// Largest absolute value of an entry.
    pub fn max_abs_entry(&self) -> BigInt {
        self.entries.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        bareiss(self.n, self.n, self.entries.clone()).0
    }

    /// Rank over Q.
    pub fn rank(&self) -> usize {
        bareiss(self.n, self.n, self.entries.clone()).1
    }

    /// Row-major flattening as rationals, the ambient vector used for spinning.
    pub fn to_rat_vector(&self) -> RatVector {
        RatVector(self.entries.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    /// Entries as decimal strings, row by row.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        self.rows().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }

    /// Entries as `i64` when they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.rows().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_string_rows()).finish()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .to_string_rows()
            .into_iter()
            .map(|r| format!("[{}]", r.join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "degree mismatch in matrix product");
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for k in 0..n {
                    let a = &self.entries[i * n + k];
                    if a.is_zero() {
                        continue;
                    }
                    acc += a * &rhs.entries[k * n + j];
                }
                out.push(acc);
            }
        }
        IntMatrix { n, entries: out }
    }
}

impl Mul for IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: IntMatrix) -> IntMatrix {
        &self * &rhs
    }
}

/// Fraction-free elimination of a `rows x cols` matrix. Returns the
/// determinant (meaningful when square) and the rank.
fn bareiss(rows: usize, cols: usize, mut a: Vec<BigInt>) -> (BigInt, usize) {
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    let mut rank = 0usize;
    let mut r = 0usize;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !a[i * cols + c].is_zero()) else {
            continue;
        };
        if piv != r {
            for j in 0..cols {
                a.swap(piv * cols + j, r * cols + j);
            }
            sign = -sign;
        }
        let p = a[r * cols + c].clone();
        for i in r + 1..rows {
            let f = a[i * cols + c].clone();
            for j in c + 1..cols {
                let v = &p * &a[i * cols + j] - &f * &a[r * cols + j];
                a[i * cols + j] = v / &prev;
            }
            a[i * cols + c] = BigInt::zero();
        }
        prev = p;
        r += 1;
        rank += 1;
    }
    let det = if rows == cols && rank == rows {
        if sign < 0 {
            -prev
        } else {
            prev
        }
    } else {
        BigInt::zero()
    };
    (det, rank)
}

/// Determinant of a square matrix given as a flat row-major vector.
pub fn determinant_flat(n: usize, entries: Vec<BigInt>) -> BigInt {
    bareiss(n, n, entries).0
}

/// Inverse of a matrix with determinant `±1`, via the adjugate.
pub fn unimodular_inverse(a: &IntMatrix) -> Result<IntMatrix> {
    let det = a.determinant();
    if det.abs() != BigInt::one() {
        return Err(Error::NotUnimodular { det: det.to_string() });
    }
    let adj = adjugate(a);
    Ok(if det.is_negative() { adj.scale(&BigInt::from(-1)) } else { adj })
}

/// Classical adjugate `adj(A)` with `A * adj(A) = det(A) * 1`.
pub fn adjugate(a: &IntMatrix) -> IntMatrix {
    let n = a.n;
    if n == 1 {
        return IntMatrix::identity(1);
    }
    let mut out = IntMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ij goes to position (j, i)
            let mut minor = Vec::with_capacity((n - 1) * (n - 1));
            for r in (0..n).filter(|&r| r != i) {
                for c in (0..n).filter(|&c| c != j) {
                    minor.push(a.get(r, c).clone());
                }
            }
            let m = determinant_flat(n - 1, minor);
            out.entries[j * n + i] = if (i + j) % 2 == 0 { m } else { -m };
        }
    }
    out
}

/// Characteristic polynomial `det(x*1 - A)`, coefficients in ascending degree
/// (the last coefficient is the leading 1). Faddeev–LeVerrier with exact
/// integer division.
pub fn char_poly(a: &IntMatrix) -> Vec<BigInt> {
    let n = a.n;
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = IntMatrix::zero(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = a * &m;
        for i in 0..n {
            next.entries[i * n + i] += &coeffs[n - k + 1];
        }
        let t = a.trace_of_product(&next);
        let (q, r) = (-t).div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero());
        coeffs[n - k] = q;
        m = next;
    }
    coeffs
}

/// Outcome of [`finite_order_test`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementOrder {
    Finite(u64),
    Infinite,
}

fn totient(mut m: u64) -> u64 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// `lcm{ m : phi(m) <= n }`, a multiple of the order of every torsion element
/// of `GL(n, Z)`.
pub fn torsion_exponent(n: usize) -> u64 {
    let n = n as u64;
    // phi(m) >= sqrt(m / 2), so m <= 2 n^2 bounds the search.
    (1..=2 * n * n + 2).filter(|&m| totient(m) <= n).fold(1u64, |acc, m| acc.lcm(&m))
}

/// Decides whether `A` has finite order, and if so returns the exact order.
pub fn finite_order_test(a: &IntMatrix) -> ElementOrder {
    let l = torsion_exponent(a.n);
    if !a.pow(l).is_identity() {
        return ElementOrder::Infinite;
    }
    let mut order = l;
    // strip prime factors while the power stays trivial
    let mut primes = Vec::new();
    let mut rest = l;
    let mut p = 2;
    while rest > 1 {
        if rest % p == 0 {
            primes.push(p);
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += 1;
    }
    for p in primes {
        while order % p == 0 && a.pow(order / p).is_identity() {
            order /= p;
        }
    }
    ElementOrder::Finite(order)
}

/// gcd of the absolute values of the non-zero entries; 0 for the zero matrix.
pub fn gcd_nonzero_entries(a: &IntMatrix) -> BigInt {
    a.entries.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// `t` is a transvection: `t - 1` has rank one and squares to zero.
pub fn is_transvection(t: &IntMatrix) -> bool {
    let u = t.minus_identity();
    if u.is_zero() {
        return false;
    }
    (&u * &u).is_zero() && u.rank() == 1
}

/// Vector over Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatVector(pub Vec<BigRational>);

impl RatVector {
    pub fn from_ints(xs: &[i64]) -> Self {
        RatVector(xs.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// Result of inserting a vector into a span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    Inserted,
    Dependent,
}

/// Reduced row echelon basis over Q with a pivot-column map.
#[derive(Clone, Debug, Default)]
pub struct RationalSpan {
    dimension: usize,
    rows: Vec<RatVector>,
    pivots: Vec<usize>,
}

impl RationalSpan {
    pub fn new(dimension: usize) -> Self {
        RationalSpan { dimension, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dimension(&self) -> usize {
        self.dimension
    }

    pub fn basis(&self) -> &[RatVector] {
        &self.rows
    }

    /// Reduces `v` against the basis; the remainder is zero iff `v` lies in the span.
    pub fn reduce(&self, v: &RatVector) -> Result<RatVector> {
        if v.dimension() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: v.dimension() });
        }
        let mut w = v.clone();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if w.0[c].is_zero() {
                continue;
            }
            let f = w.0[c].clone();
            for (x, y) in w.0.iter_mut().zip(&row.0) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        Ok(w)
    }

    pub fn contains(&self, v: &RatVector) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }

    pub fn insert(&mut self, v: &RatVector) -> Result<Insertion> {
        let mut w = self.reduce(v)?;
        let Some(c) = w.0.iter().position(|x| !x.is_zero()) else {
            return Ok(Insertion::Dependent);
        };
        let lead = w.0[c].clone();
        for x in w.0.iter_mut() {
            *x /= &lead;
        }
        for row in &mut self.rows {
            if row.0[c].is_zero() {
                continue;
            }
            let f = row.0[c].clone();
            for (x, y) in row.0.iter_mut().zip(&w.0) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.rows.push(w);
        self.pivots.push(c);
        Ok(Insertion::Inserted)
    }
}

/// Functional form of [`RationalSpan::insert`]: inserts `v` into the span of a
/// reduced basis, returning the extended basis or `None` when `v` is dependent.
pub fn rational_span_insert(basis: &[RatVector], v: &RatVector) -> Result<Option<Vec<RatVector>>> {
    let mut span = RationalSpan::new(v.dimension());
    for b in basis {
        span.insert(b)?;
    }
    match span.insert(v)? {
        Insertion::Inserted => Ok(Some(span.rows)),
        Insertion::Dependent => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho1_z() -> IntMatrix {
        IntMatrix::from_rows(&[[0, 0, 1], [1, 0, -1], [0, 1, -2]])
    }

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn inverse_of_identity() {
        let i = IntMatrix::identity(4);
        assert_eq!(unimodular_inverse(&i).unwrap(), i);
    }

    #[test]
    fn inverse_of_rho1_z() {
        let z = rho1_z();
        let zi = unimodular_inverse(&z).unwrap();
        assert!((&z * &zi).is_identity());
        assert!((&zi * &z).is_identity());
        assert_eq!(zi, IntMatrix::from_rows(&[[1, 1, 0], [2, 0, 1], [1, 0, 0]]));
    }

    #[test]
    fn inverse_rejects_det_two() {
        let a = IntMatrix::from_rows(&[[2, 0], [0, 1]]);
        assert!(matches!(unimodular_inverse(&a), Err(Error::NotUnimodular { .. })));
    }

    #[test]
    fn inverse_of_det_minus_one() {
        let a = IntMatrix::from_rows(&[[0, 1], [1, 0]]);
        assert!((&a * &unimodular_inverse(&a).unwrap()).is_identity());
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(&IntMatrix::identity(2)), ints(&[1, -2, 1]));
        assert_eq!(char_poly(&rho1_z()), ints(&[-1, 1, 2, 1]));
        // companion matrix of x^2 - 3x + 1
        let c = IntMatrix::from_rows(&[[0, -1], [1, 3]]);
        assert_eq!(char_poly(&c), ints(&[1, -3, 1]));
    }

    #[test]
    fn char_poly_of_identity_is_power_of_x_minus_one() {
        // (x - 1)^5
        assert_eq!(char_poly(&IntMatrix::identity(5)), ints(&[-1, 5, -10, 10, -5, 1]));
    }

    #[test]
    fn torsion_exponents() {
        assert_eq!(torsion_exponent(2), 12);
        assert_eq!(torsion_exponent(3), 12);
        assert_eq!(torsion_exponent(4), 120);
        assert_eq!(torsion_exponent(5), 120);
    }

    #[test]
    fn finite_order_examples() {
        assert_eq!(finite_order_test(&IntMatrix::identity(3)), ElementOrder::Finite(1));
        assert_eq!(
            finite_order_test(&IntMatrix::from_rows(&[[1, 1], [0, 1]])),
            ElementOrder::Infinite
        );
        assert_eq!(finite_order_test(&rho1_z()), ElementOrder::Infinite);
        assert_eq!(
            finite_order_test(&IntMatrix::from_rows(&[[0, -1], [1, 0]])),
            ElementOrder::Finite(4)
        );
        assert_eq!(
            finite_order_test(&IntMatrix::from_rows(&[[0, -1], [1, 1]])),
            ElementOrder::Finite(6)
        );
    }

    #[test]
    fn gcd_entries() {
        assert_eq!(gcd_nonzero_entries(&IntMatrix::zero(3)), BigInt::zero());
        assert_eq!(gcd_nonzero_entries(&IntMatrix::from_rows(&[[2, 0], [4, 6]])), BigInt::from(2));
        let t = IntMatrix::from_rows(&[[1, 1], [0, 1]]);
        for i in 1..20u64 {
            assert_eq!(gcd_nonzero_entries(&t.pow(i).minus_identity()), BigInt::from(i));
        }
    }

    #[test]
    fn span_insertions() {
        let e = |i: usize| {
            let mut v = vec![0i64; 3];
            v[i] = 1;
            RatVector::from_ints(&v)
        };
        let b = rational_span_insert(&[], &e(0)).unwrap().unwrap();
        assert_eq!(b.len(), 1);
        assert!(rational_span_insert(&b, &RatVector::from_ints(&[5, 0, 0])).unwrap().is_none());
        let b2 = rational_span_insert(&b, &e(1)).unwrap().unwrap();
        let b3 = rational_span_insert(&b2, &RatVector::from_ints(&[1, 1, 1])).unwrap().unwrap();
        assert_eq!(b3.len(), 3);
        assert!(matches!(
            rational_span_insert(&b3, &RatVector::from_ints(&[1, 1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transvections() {
        assert!(!is_transvection(&IntMatrix::identity(2)));
        assert!(is_transvection(&IntMatrix::elementary(3, 0, 1, 1)));
        assert!(!is_transvection(&IntMatrix::from_rows(&[[-1, 0], [0, -1]])));
        // unipotent but rank 2
        assert!(!is_transvection(&IntMatrix::from_rows(&[[1, 1, 0], [0, 1, 1], [0, 0, 1]])));
    }

    #[test]
    fn determinant_and_rank() {
        let a = IntMatrix::from_rows(&[[2, 3, 1], [4, 1, 5], [6, 4, 6]]);
        assert_eq!(a.determinant(), BigInt::from(0));
        assert_eq!(a.rank(), 2);
        let b = IntMatrix::from_rows(&[[0, 2, 1], [3, 1, 0], [1, 1, 1]]);
        // cofactor expansion along the first row: -2*(3-0) + 1*(3-1)
        assert_eq!(b.determinant(), BigInt::from(-4));
    }
}
