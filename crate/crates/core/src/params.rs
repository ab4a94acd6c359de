//! Degree-dependent constants and run budgets.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::factor::FactorBudget;

/// Exponent of `Sym(n)`, `lcm(1, ..., n)`.
pub fn sym_exponent(n: usize) -> u64 {
    (1..=n as u64).fold(1, |acc, i| acc.lcm(&i))
}

/// Derived-length bound for solvable images: 4, 5, then 6 in prime degree.
pub fn derived_length_bound(n: usize) -> u64 {
    match n {
        0..=2 => 4,
        3 => 5,
        _ => 6,
    }
}

/// Largest element order in the small maximal subgroups of `SL(n, p)` that
/// are neither reducible, imprimitive, solvable nor classical.
pub fn order_bound(n: usize) -> Option<u64> {
    match n {
        2 => Some(10),
        3 => Some(21),
        5 => Some(60),
        7 => Some(84),
        11 => Some(253),
        _ => None,
    }
}

pub fn is_prime_degree(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Budgets, caps and seeds shared by the drivers.
#[derive(Clone, Debug)]
pub struct Params {
    pub seed: u64,
    /// Largest group enumerated element by element.
    pub bfs_cap: u64,
    /// Largest basic orbit kept by a stabilizer chain.
    pub orbit_cap: u64,
    /// Largest `p^n` for which sieve refinements run exact oracles.
    pub refine_points: u64,
    pub factor: FactorBudget,
    /// Words tried by each witness search over Z.
    pub sample_budget: usize,
    /// Random elements tried by each certificate search modulo p.
    pub certificate_tries: usize,
    /// Length of the words at the leaves of tree commutators.
    pub leaf_length: usize,
    /// Primes above 3 scanned when looking for p0.
    pub p0_scan: usize,
    pub min_rounds: usize,
    pub max_rounds: usize,
    pub delta: Option<u64>,
    pub order_bound: Option<u64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            seed: 1,
            bfs_cap: 20_000_000,
            orbit_cap: 20_000_000,
            refine_points: 1_000_000,
            factor: FactorBudget::default(),
            sample_budget: 2_000,
            certificate_tries: 300,
            leaf_length: 2,
            p0_scan: 25,
            min_rounds: 2,
            max_rounds: 6,
            delta: None,
            order_bound: None,
        }
    }
}

impl Params {
    pub fn with_seed(seed: u64) -> Self {
        Params { seed, ..Params::default() }
    }

    pub fn delta_for(&self, n: usize) -> u64 {
        self.delta.unwrap_or_else(|| derived_length_bound(n))
    }

    pub fn order_bound_for(&self, n: usize) -> Result<u64> {
        self.order_bound
            .or_else(|| order_bound(n))
            .ok_or_else(|| Error::InvalidArgument(format!("no element order bound known in degree {n}; supply one")))
    }

    /// Seed for a sub-computation, so concurrent searches stay independent.
    pub fn derive_seed(&self, tag: u64) -> u64 {
        let mut x = self.seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        x ^= x >> 31;
        x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x ^ (x >> 29)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables() {
        assert_eq!(sym_exponent(5), 60);
        assert_eq!(sym_exponent(3), 6);
        assert_eq!(derived_length_bound(2), 4);
        assert_eq!(derived_length_bound(3), 5);
        assert_eq!(derived_length_bound(5), 6);
        assert_eq!(order_bound(11), Some(253));
        assert!(is_prime_degree(5) && !is_prime_degree(4) && is_prime_degree(2));
    }
}
