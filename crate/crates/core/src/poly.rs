//! Polynomials over prime fields, coefficients in ascending order.

use crate::modular::{inv_mod, mul_mod, sub_mod};

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.len() > 1 && *f.last().unwrap() == 0 {
        f.pop();
    }
    f
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    poly_rem(&prod, f, p)
}

/// Remainder of `a` by `f` (any nonzero leading coefficient).
pub fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let f = trim(f.to_vec());
    let df = f.len() - 1;
    if df == 0 {
        return vec![0];
    }
    let lead_inv = inv_mod(f[df], p).expect("nonzero leading coefficient");
    let mut r = trim(a.to_vec());
    while r.len() > df {
        let dr = r.len() - 1;
        let c = mul_mod(r[dr], lead_inv, p);
        for (i, &fi) in f.iter().enumerate() {
            let idx = dr - df + i;
            r[idx] = sub_mod(r[idx], mul_mod(c, fi, p), p);
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !(b.len() == 1 && b[0] == 0) {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// `x^e mod f`.
fn x_power(e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = poly_rem(&[0, 1], f, p);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    acc
}

fn compose_power(g: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    // g(x)^p mod f, i.e. the Frobenius image of x^{p^i}
    let mut acc = vec![1u64];
    let mut base = g.to_vec();
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    acc
}

/// Irreducibility of a monic `f` of degree `d >= 1` over `F_p`: no factor of
/// degree `<= d/2`, tested with `gcd(x^{p^i} - x, f)`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let mut xp = x_power(p, &f, p);
    for i in 1..=d / 2 {
        if i > 1 {
            xp = compose_power(&xp, &f, p);
        }
        let mut h = xp.clone();
        if h.len() < 2 {
            h.resize(2, 0);
        }
        h[1] = sub_mod(h[1], 1, p);
        let g = poly_gcd(&f, &h, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// Roots of `f` in `F_p` by exhaustive evaluation.
pub fn roots_by_search(f: &[u64], p: u64) -> Vec<u64> {
    (0..p)
        .filter(|&x| f.iter().rev().fold(0u64, |acc, &c| (mul_mod(acc, x, p) + c) % p) == 0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility() {
        // x^2 + 1 over F_3 irreducible, over F_5 not
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        // x^4 + 1 = (x^2+x+2)(x^2-x+2) over F_3
        assert!(!is_irreducible(&[1, 0, 0, 0, 1], 3));
        // x^3 + 2x^2 + x - 1 is irreducible over F_2 (x^3 + x + 1)
        assert!(is_irreducible(&[1, 1, 0, 1], 2));
        // x^5 - x - 1 is irreducible over F_5
        assert!(is_irreducible(&[4, 4, 0, 0, 0, 1], 5));
        assert_eq!(roots_by_search(&[1, 1, 1], 7), vec![2, 4]);
    }
}
