//! Invariant bilinear forms over prime fields.
//!
//! A form is an `n x n` matrix `F` and `g` preserves it when `g F g^T = F`.
//! Forms are handled as flat row-major vectors of length `n^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::modular::{det_mod_prime, mul_mod, nullspace_mod, sub_mod, FpSpan, ModMatrix};

/// Row vector `r` (a flattened `R`) mapped to `g^T R g`.
fn pull_back(r: &[u64], g: &ModMatrix) -> Vec<u64> {
    let n = g.degree();
    let p = g.modulus();
    let mut tmp = vec![0u64; n * n]; // R g
    for i in 0..n {
        for l in 0..n {
            let mut acc = 0u128;
            for j in 0..n {
                acc += r[i * n + j] as u128 * g.get(j, l) as u128;
            }
            tmp[i * n + l] = (acc % p as u128) as u64;
        }
    }
    let mut out = vec![0u64; n * n];
    for k in 0..n {
        for l in 0..n {
            let mut acc = 0u128;
            for i in 0..n {
                acc += g.get(i, k) as u128 * tmp[i * n + l] as u128;
            }
            out[k * n + l] = (acc % p as u128) as u64;
        }
    }
    out
}

/// Equations `(g F g^T - F)_{ij} = 0` as rows over the `n^2` unknowns.
fn invariance_equations(g: &ModMatrix) -> Vec<Vec<u64>> {
    let n = g.degree();
    let p = g.modulus();
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0u64; n * n];
            for k in 0..n {
                for l in 0..n {
                    row[k * n + l] = mul_mod(g.get(i, k), g.get(j, l), p);
                }
            }
            row[i * n + j] = sub_mod(row[i * n + j], 1, p);
            rows.push(row);
        }
    }
    rows
}

/// Basis of the space of forms preserved by every matrix in `gens`.
pub fn invariant_forms(gens: &[ModMatrix], n: usize, p: u64) -> Vec<Vec<u64>> {
    let rows: Vec<Vec<u64>> = gens.iter().flat_map(invariance_equations).collect();
    nullspace_mod(&rows, n * n, p)
}

/// Basis of the forms preserved by the normal closure of `seeds` in the
/// group generated by `gens`: the largest subspace of forms fixed by the
/// seeds that is stable under `F -> g F g^T`.
pub fn normal_closure_invariant_forms(seeds: &[ModMatrix], gens: &[ModMatrix], n: usize, p: u64) -> Vec<Vec<u64>> {
    let mut eqs = FpSpan::new(n * n, p);
    for s in seeds {
        for r in invariance_equations(s) {
            eqs.insert(&r);
        }
    }
    // F lies in the answer iff E (w F w^T) = 0 for every equation row E and
    // every w; close the row space under E -> w^T E w for the generators.
    let mut frontier: Vec<Vec<u64>> = eqs.basis().to_vec();
    while let Some(r) = frontier.pop() {
        if eqs.rank() == n * n {
            break;
        }
        for g in gens {
            let image = pull_back(&r, g);
            if eqs.insert(&image) {
                frontier.push(image);
            }
        }
    }
    nullspace_mod(eqs.basis(), n * n, p)
}

/// A nondegenerate member of the span of `basis`, if one is found: each basis
/// vector is tried, then `tries` seeded random combinations.
pub fn find_nondegenerate(basis: &[Vec<u64>], n: usize, p: u64, tries: usize) -> Option<Vec<u64>> {
    for f in basis {
        if det_mod_prime(n, f, p) != 0 {
            return Some(f.clone());
        }
    }
    if basis.len() < 2 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0x0f0f);
    for _ in 0..tries {
        let mut f = vec![0u64; n * n];
        for b in basis {
            let c = rng.gen_range(0..p);
            for (x, &y) in f.iter_mut().zip(b) {
                *x = (*x + mul_mod(c, y, p)) % p;
            }
        }
        if det_mod_prime(n, &f, p) != 0 {
            return Some(f);
        }
    }
    None
}

/// True iff `g F g^T = F` for every `g`.
pub fn preserves(gens: &[ModMatrix], form: &[u64]) -> bool {
    gens.iter().all(|g| {
        let t = g.transpose();
        // g F g^T is the transpose-pullback by g^T
        pull_back(form, &t) == form
    })
}

/// Smallest `F -> g F g^T` stable subspace containing `form`, as a basis.
pub fn orbit_span(form: &[u64], gens: &[ModMatrix], n: usize, p: u64) -> Vec<Vec<u64>> {
    let mut span = FpSpan::new(n * n, p);
    let mut out = Vec::new();
    let mut frontier = vec![form.to_vec()];
    while let Some(f) = frontier.pop() {
        if !span.insert(&f) {
            continue;
        }
        for g in gens {
            frontier.push(pull_back(&f, &g.transpose()));
        }
        out.push(f);
    }
    out
}
