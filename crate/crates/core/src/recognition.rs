//! Surjectivity of congruence images and exact image orders.
//!
//! [`is_surjective_mod_p`] answers `Yes` only with a full certificate set,
//! `No` only with a checkable obstruction, and `Undetermined` otherwise.

use num_bigint::BigUint;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::envelope::algebra_basis_mod;
use crate::error::{Error, Result};
use crate::factor::is_prime_u64;
use crate::forms::{find_nondegenerate, invariant_forms, normal_closure_invariant_forms};
use crate::group::{Expr, GenSet, ModGens, Word, WordSampler};
use crate::linalg::char_poly;
use crate::modular::{det_mod_prime, element_order_exceeds, inv_mod, mul_mod, nullspace_mod, reduce_bigint, sl_order, sub_mod, ModMatrix};
use crate::params::{is_prime_degree, sym_exponent, Params};
use crate::poly::roots_by_search;
use crate::stabchain::{enumerate, enumerate_from, group_order_bfs, Capped, ChainOptions, StabChain};
use crate::witness::{generator_commutators, Claim, FormScope, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMethod {
    Bfs,
    StabilizerChain,
}

/// Exact order of an image modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageOrder {
    pub modulus: u64,
    #[serde(serialize_with = "crate::serde_big::biguint")]
    pub order: BigUint,
    #[serde(serialize_with = "crate::serde_big::biguint")]
    pub full: BigUint,
    pub method: OrderMethod,
}

impl ImageOrder {
    pub fn is_full(&self) -> bool {
        self.order == self.full
    }
}

/// Exact `|phi_m(G)|`: a stabilizer chain when its orbits fit the orbit cap,
/// otherwise breadth-first enumeration under the BFS cap.
pub fn exact_order(g: &ModGens, params: &Params) -> Result<ImageOrder> {
    let full = sl_order(g.degree, g.modulus);
    let opts = ChainOptions { seed: params.seed, orbit_cap: params.orbit_cap, ..ChainOptions::default() };
    let modulus = g.modulus;
    match StabChain::build(g, Some(&full), opts) {
        Ok(chain) => return Ok(ImageOrder { modulus, order: chain.order(), full, method: OrderMethod::StabilizerChain }),
        Err(Error::OrbitTooLarge { .. }) => {}
        Err(e) => return Err(e),
    }
    match group_order_bfs(g, params.bfs_cap) {
        Capped::Order(o) => Ok(ImageOrder { modulus, order: BigUint::from(o), full, method: OrderMethod::Bfs }),
        Capped::ExceedsCap => Err(Error::OrderOracleUnavailable(modulus)),
    }
}

/// `phi_m(G) = SL(n, Z/mZ)`, decided by exact order.
pub fn is_surjective_mod_m(g: &GenSet, m: u64, params: &Params) -> Result<bool> {
    if m < 2 {
        return Err(Error::InvalidArgument("modulus must be at least 2".into()));
    }
    Ok(exact_order(&g.reduce(m), params)?.is_full())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Undetermined,
}

/// A surjectivity verdict at one prime with the witnesses behind it.
#[derive(Clone, Debug, Serialize)]
pub struct Decision {
    pub prime: u64,
    pub verdict: Verdict,
    pub method: &'static str,
    pub witnesses: Vec<Witness>,
}

impl Decision {
    fn new(prime: u64, verdict: Verdict, method: &'static str, witnesses: Vec<Witness>) -> Self {
        Decision { prime, verdict, method, witnesses }
    }
}

fn from_order(p: u64, o: ImageOrder) -> Decision {
    let verdict = if o.is_full() { Verdict::Yes } else { Verdict::No };
    let method = match o.method {
        OrderMethod::Bfs => "bfs",
        OrderMethod::StabilizerChain => "stabilizer_chain",
    };
    let claim = Claim::ImageOrder { modulus: p, order: o.order.to_string(), full: o.full.to_string() };
    Decision::new(p, verdict, method, vec![Witness::new(None, claim)])
}

/// Surjectivity of `phi_p(G)` onto `SL(n, p)` for prime degree `n`.
pub fn is_surjective_mod_p(g: &GenSet, p: u64, params: &Params) -> Result<Decision> {
    let n = g.degree();
    if !is_prime_degree(n) {
        return Err(Error::DegreeNotPrime(n));
    }
    if !is_prime_u64(p) {
        return Err(Error::CompositeModulus(p));
    }
    let gm = g.reduce(p);
    if p <= 3 {
        return Ok(from_order(p, exact_order(&gm, params)?));
    }

    let (words, mats) = algebra_basis_mod(&gm);
    if mats.len() < n * n {
        let claim = Claim::AlgebraDimension { modulus: Some(p), dimension: mats.len(), words };
        return Ok(Decision::new(p, Verdict::No, "algebra_dimension", vec![Witness::new(None, claim)]));
    }
    let full_algebra = Witness::new(None, Claim::AlgebraDimension { modulus: Some(p), dimension: n * n, words });

    if n > 2 {
        if let Some(form) = derived_form(&gm) {
            let claim = Claim::InvariantForm { modulus: p, scope: FormScope::Derived, form };
            return Ok(Decision::new(p, Verdict::No, "derived_form", vec![Witness::new(None, claim)]));
        }
    }

    if let Some(mut certs) = certificates(&gm, params)? {
        certs.insert(0, full_algebra);
        return Ok(Decision::new(p, Verdict::Yes, "certificates", certs));
    }

    if let Some(lines) = find_monomial_system(&gm, params)? {
        let claim = Claim::MonomialSystem { modulus: p, lines };
        return Ok(Decision::new(p, Verdict::No, "monomial_system", vec![Witness::new(None, claim)]));
    }

    match exact_order(&gm, params) {
        Ok(o) => Ok(from_order(p, o)),
        Err(Error::OrderOracleUnavailable(_)) => Ok(Decision::new(p, Verdict::Undetermined, "budget", Vec::new())),
        Err(e) => Err(e),
    }
}

/// A nondegenerate form preserved by the derived group of the image.
fn derived_form(gm: &ModGens) -> Option<Vec<u64>> {
    let comms = generator_commutators(&gm.gens, &gm.invs);
    if comms.is_empty() {
        return None;
    }
    let basis = normal_closure_invariant_forms(&comms, &gm.gens, gm.degree, gm.modulus);
    find_nondegenerate(&basis, gm.degree, gm.modulus, 20)
}

/// Searches the image for the positive certificate set; `None` when any
/// search exhausts its budget.
fn certificates(gm: &ModGens, params: &Params) -> Result<Option<Vec<Witness>>> {
    let n = gm.degree;
    let p = gm.modulus;
    let ngens = gm.len();
    let tries = params.certificate_tries;
    let mut sampler = WordSampler::new(params.derive_seed(p));
    let mut out = Vec::new();

    // non-solvable: a nontrivial balanced commutator of depth delta + 1
    let leaves = 1usize << (params.delta_for(n) + 1);
    let mut found = None;
    for t in 0..tries {
        let len = params.leaf_length + t / 20;
        let tree = Expr::tree_commutator((0..leaves).map(|_| sampler.word_of_length(ngens, len).into()).collect());
        if !tree.evaluate_mod(gm)?.0.is_identity() {
            found = Some(tree);
            break;
        }
    }
    let Some(tree) = found else { return Ok(None) };
    out.push(Witness::new(tree, Claim::NontrivialMod { modulus: p }));

    let k = sym_exponent(n);
    if n >= 5 {
        let mut found = None;
        for _ in 0..tries {
            let a = Expr::pow(sampler.next_word(ngens).into(), k);
            let b = Expr::pow(sampler.next_word(ngens).into(), k);
            let c = Expr::comm(a, b);
            if !c.evaluate_mod(gm)?.0.is_identity() {
                found = Some(c);
                break;
            }
            sampler.record_failure();
        }
        let Some(c) = found else { return Ok(None) };
        out.push(Witness::new(c, Claim::NontrivialMod { modulus: p }));
    }

    if n >= 3 {
        let mut found = None;
        for _ in 0..tries {
            let c = Expr::comm(sampler.next_word(ngens).into(), sampler.next_word(ngens).into());
            let (m, mi) = c.evaluate_mod(gm)?;
            if m.trace() != mi.trace() {
                found = Some(c);
                break;
            }
            sampler.record_failure();
        }
        let Some(c) = found else { return Ok(None) };
        out.push(Witness::new(c, Claim::TraceAsymmetricMod { modulus: p }));
    }

    let bound = params.order_bound_for(n)?;
    let mut found = None;
    for _ in 0..tries {
        let w = sampler.next_word(ngens);
        if element_order_exceeds(&gm.evaluate(&w)?, bound) {
            found = Some(w);
            break;
        }
        sampler.record_failure();
    }
    let Some(w) = found else { return Ok(None) };
    out.push(Witness::new(Expr::Word(w), Claim::OrderExceedsMod { modulus: p, bound }));
    Ok(Some(out))
}

// ---------------------------------------------------------------------------
// monomial systems

fn normalize_line(v: &mut [u64], p: u64) -> bool {
    let Some(&lead) = v.iter().find(|&&x| x != 0) else { return false };
    let inv = inv_mod(lead, p).expect("prime field");
    for x in v.iter_mut() {
        *x = mul_mod(*x, inv, p);
    }
    true
}

/// True iff `lines` are `n` spanning lines permuted by every generator.
pub fn monomial_system_holds(gm: &ModGens, lines: &[Vec<u64>]) -> bool {
    let n = gm.degree;
    let p = gm.modulus;
    if !is_prime_u64(p) || lines.len() != n || lines.iter().any(|l| l.len() != n) {
        return false;
    }
    let flat: Vec<u64> = lines.iter().flatten().map(|&x| x % p).collect();
    if det_mod_prime(n, &flat, p) == 0 {
        return false;
    }
    let mut set = FxHashSet::default();
    for l in lines {
        let mut v: Vec<u64> = l.iter().map(|&x| x % p).collect();
        normalize_line(&mut v, p);
        set.insert(v);
    }
    let mut img = vec![0u64; n];
    gm.gens.iter().all(|g| {
        set.iter().all(|v| {
            g.act_on_row(v, &mut img);
            normalize_line(&mut img, p) && set.contains(&img)
        })
    })
}

/// Largest prime for which eigenvalues are found by exhaustive search.
const ROOT_SEARCH_LIMIT: u64 = 1_000_000;

fn char_poly_mod(m: &ModMatrix) -> Vec<u64> {
    char_poly(&m.lift()).iter().map(|c| reduce_bigint(c, m.modulus())).collect()
}

/// Splits the span of `basis` into eigenspaces of `h`; `None` if `h` is not
/// diagonalizable over `F_p` on it.
fn split_by(basis: &[Vec<u64>], h: &ModMatrix, roots: &[u64]) -> Option<Vec<Vec<Vec<u64>>>> {
    let n = h.degree();
    let p = h.modulus();
    let d = basis.len();
    let mut parts = Vec::new();
    let mut total = 0;
    for &lambda in roots {
        // M = B (h - lambda), find c with c M = 0
        let mut m = vec![vec![0u64; n]; d];
        let mut row = vec![0u64; n];
        for (r, b) in basis.iter().enumerate() {
            h.act_on_row(b, &mut row);
            for j in 0..n {
                m[r][j] = sub_mod(row[j], mul_mod(lambda, b[j], p), p);
            }
        }
        let cols: Vec<Vec<u64>> = (0..n).map(|j| (0..d).map(|r| m[r][j]).collect()).collect();
        let cs = nullspace_mod(&cols, d, p);
        if cs.is_empty() {
            continue;
        }
        total += cs.len();
        let part = cs
            .iter()
            .map(|c| {
                let mut v = vec![0u64; n];
                for (ci, b) in c.iter().zip(basis) {
                    for j in 0..n {
                        v[j] = (v[j] + mul_mod(*ci, b[j], p)) % p;
                    }
                }
                v
            })
            .collect();
        parts.push(part);
    }
    (total == d).then_some(parts)
}

/// Looks for a system of lines permuted by the image, from joint eigenlines
/// of `k`-th powers of random elements (`k = lcm(1..n)`), which are diagonal
/// in any monomial group.
pub fn find_monomial_system(gm: &ModGens, params: &Params) -> Result<Option<Vec<Vec<u64>>>> {
    let n = gm.degree;
    let p = gm.modulus;
    if p > ROOT_SEARCH_LIMIT || gm.is_empty() {
        return Ok(None);
    }
    let k = sym_exponent(n);
    let mut sampler = WordSampler::new(params.derive_seed(p ^ 0x6d6f6e));
    let mut hs: Vec<ModMatrix> = Vec::new();
    for _ in 0..8 {
        let h = gm.evaluate(&sampler.next_word(gm.len()))?.pow(k);
        if !h.is_scalar() {
            hs.push(h);
        }
    }
    for (i, a) in hs.iter().enumerate() {
        if hs[i + 1..].iter().any(|b| a * b != b * a) {
            return Ok(None);
        }
    }
    let identity: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    let mut spaces = vec![identity];
    for h in &hs {
        let roots = roots_by_search(&char_poly_mod(h), p);
        let mut next = Vec::new();
        for s in &spaces {
            match split_by(s, h, &roots) {
                Some(parts) => next.extend(parts),
                None => return Ok(None),
            }
        }
        spaces = next;
        if spaces.len() == n {
            break;
        }
    }
    if spaces.len() != n {
        return Ok(None);
    }
    let mut lines: Vec<Vec<u64>> = spaces.into_iter().map(|mut s| s.remove(0)).collect();
    for l in &mut lines {
        normalize_line(l, p);
    }
    Ok(monomial_system_holds(gm, &lines).then_some(lines))
}

// ---------------------------------------------------------------------------
// predicates on enumerated images

/// Properties of an image modulo a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Predicates {
    pub solvable: bool,
    pub monomial: bool,
    pub preserves_form: bool,
    pub similarity: bool,
}

/// Subgroup generated by `gens`, as a set of packed elements.
fn closure(gens: &[ModMatrix], identity: &ModMatrix, cap: u64) -> Result<Vec<ModMatrix>> {
    enumerate_from(gens, identity.clone(), cap).ok_or(Error::EnumerationTooLarge(cap))
}

/// Derived subgroup of the group generated by `gens` (all elements `elts`):
/// the normal closure of the generator commutators.
fn derived_subgroup(gens: &[ModMatrix], elts: &[ModMatrix], cap: u64) -> Result<Vec<ModMatrix>> {
    let identity = elts[0].clone();
    let invs = gens.iter().map(ModMatrix::inverse).collect::<Result<Vec<_>>>()?;
    let mut seeds: Vec<ModMatrix> = generator_commutators(gens, &invs).into_iter().filter(|c| !c.is_identity()).collect();
    if seeds.is_empty() {
        return Ok(vec![identity]);
    }
    loop {
        let h = closure(&seeds, &identity, cap)?;
        let members: FxHashSet<&[u64]> = h.iter().map(|m| m.data()).collect();
        let mut extra = Vec::new();
        for (g, gi) in gens.iter().zip(&invs) {
            for s in &seeds {
                let c = &(gi * s) * g;
                if !members.contains(c.data()) {
                    extra.push(c);
                }
            }
        }
        if extra.is_empty() {
            return Ok(h);
        }
        extra.truncate(4);
        seeds.extend(extra);
    }
}

/// Solvability by the derived series of the enumerated image.
pub fn image_is_solvable(gm: &ModGens, cap: u64) -> Result<bool> {
    let mut gens: Vec<ModMatrix> = gm.gens.iter().filter(|g| !g.is_identity()).cloned().collect();
    let mut elts = enumerate(gm, cap).ok_or(Error::EnumerationTooLarge(cap))?;
    loop {
        if elts.len() == 1 {
            return Ok(true);
        }
        let d = derived_subgroup(&gens, &elts, cap)?;
        if d.len() == elts.len() {
            return Ok(false);
        }
        gens = small_generating_set(&d);
        elts = d;
    }
}

/// Generators of the group with element list `elts` picked greedily.
fn small_generating_set(elts: &[ModMatrix]) -> Vec<ModMatrix> {
    let identity = elts[0].clone();
    let mut gens: Vec<ModMatrix> = Vec::new();
    let mut span: FxHashSet<Vec<u64>> = FxHashSet::default();
    span.insert(identity.data().to_vec());
    for e in elts {
        if span.contains(e.data()) {
            continue;
        }
        gens.push(e.clone());
        let h = enumerate_from(&gens, identity.clone(), u64::MAX).expect("uncapped");
        span = h.iter().map(|m| m.data().to_vec()).collect();
        if span.len() == elts.len() {
            break;
        }
    }
    gens
}

/// Monomiality by orbits on projective points: a union of orbits made of
/// `n` spanning lines.
pub fn image_is_monomial(gm: &ModGens) -> Result<bool> {
    let n = gm.degree;
    let p = gm.modulus;
    let count = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > 50_000_000 {
        return Err(Error::EnumerationTooLarge(u64::try_from(count).unwrap_or(u64::MAX)));
    }
    let mut seen: FxHashSet<Vec<u64>> = FxHashSet::default();
    let mut small_orbits: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut img = vec![0u64; n];
    for code in 1..count as u64 {
        let mut v = vec![0u64; n];
        let mut c = code;
        for x in v.iter_mut() {
            *x = c % p;
            c /= p;
        }
        normalize_line(&mut v, p);
        if !seen.insert(v.clone()) {
            continue;
        }
        let mut orbit = vec![v];
        let mut head = 0;
        while head < orbit.len() {
            let x = orbit[head].clone();
            head += 1;
            for g in &gm.gens {
                g.act_on_row(&x, &mut img);
                normalize_line(&mut img, p);
                if seen.insert(img.clone()) {
                    orbit.push(img.clone());
                }
            }
        }
        if orbit.len() <= n {
            small_orbits.push(orbit);
        }
    }
    Ok(spanning_union(&small_orbits, Vec::new(), 0, n, p))
}

fn spanning_union(orbits: &[Vec<Vec<u64>>], chosen: Vec<Vec<u64>>, from: usize, n: usize, p: u64) -> bool {
    if chosen.len() == n {
        let flat: Vec<u64> = chosen.iter().flatten().copied().collect();
        return det_mod_prime(n, &flat, p) != 0;
    }
    for i in from..orbits.len() {
        if chosen.len() + orbits[i].len() <= n {
            let mut next = chosen.clone();
            next.extend(orbits[i].iter().cloned());
            if spanning_union(orbits, next, i + 1, n, p) {
                return true;
            }
        }
    }
    false
}

/// Solvable, monomial, isometry and similarity predicates of `phi_p(G)`.
pub fn image_predicates(g: &GenSet, p: u64, params: &Params) -> Result<Predicates> {
    if !is_prime_u64(p) {
        return Err(Error::CompositeModulus(p));
    }
    let n = g.degree();
    let gm = g.reduce(p);
    let preserves_form = find_nondegenerate(&invariant_forms(&gm.gens, n, p), n, p, 20).is_some();
    let similarity = derived_form(&gm).is_some();
    Ok(Predicates { solvable: image_is_solvable(&gm, params.bfs_cap)?, monomial: image_is_monomial(&gm)?, preserves_form, similarity })
}

/// Words of the sampler reused by callers that need a fresh random word.
pub fn random_word(sampler: &mut WordSampler, ngens: usize) -> Word {
    sampler.next_word(ngens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    #[test]
    fn worked_example_orders() {
        let rho = catalog("rho_F", 7).unwrap();
        let params = Params::default();
        let o = |m| exact_order(&rho.reduce(m), &params).unwrap().order;
        assert_eq!(o(3), BigUint::from(9u32));
        assert_eq!(o(19), BigUint::from(3420u32));
        assert_eq!(o(15), BigUint::from(1800u32));
    }

    #[test]
    fn surjectivity_examples() {
        let rho = catalog("rho_F", 7).unwrap();
        let params = Params::default();
        assert_eq!(is_surjective_mod_p(&rho, 19, &params).unwrap().verdict, Verdict::No);
        let d = is_surjective_mod_p(&rho, 7, &params).unwrap();
        assert_eq!(d.verdict, Verdict::Yes);
        for w in &d.witnesses {
            assert!(w.verify(&rho).unwrap(), "{w:?}");
        }
        let id = GenSet::from_i64("id", &[vec![vec![1, 0], vec![0, 1]]]).unwrap();
        assert_eq!(is_surjective_mod_p(&id, 5, &params).unwrap().verdict, Verdict::No);
        let sl4 = catalog("sl", 4).unwrap();
        assert_eq!(is_surjective_mod_p(&sl4, 5, &params).unwrap_err(), Error::DegreeNotPrime(4));
    }

    #[test]
    fn mod_four() {
        let params = Params::default();
        let rho = catalog("rho_F", 1).unwrap();
        assert!(is_surjective_mod_m(&rho, 2, &params).unwrap());
        assert!(!is_surjective_mod_m(&rho, 4, &params).unwrap());
        assert!(!is_surjective_mod_m(&catalog("h1", 1).unwrap(), 4, &params).unwrap());
        assert!(is_surjective_mod_m(&catalog("sl2", 0).unwrap(), 4, &params).unwrap());
    }

    #[test]
    fn predicates() {
        let params = Params::default();
        let rho = catalog("rho_F", 7).unwrap();
        assert!(image_predicates(&rho, 3, &params).unwrap().solvable);
        let sl2 = catalog("sl2", 0).unwrap();
        let p2 = image_predicates(&sl2, 2, &params).unwrap();
        assert!(p2.solvable);
        assert!(!p2.monomial);
        let sl3 = catalog("sl", 3).unwrap();
        let p5 = image_predicates(&sl3, 5, &params).unwrap();
        assert_eq!(p5, Predicates { solvable: false, monomial: false, preserves_form: false, similarity: false });
    }

    #[test]
    fn monomial_certificate() {
        // signed permutation matrices with a diagonal element
        let g = GenSet::from_i64(
            "mono",
            &[vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]], vec![vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 1]]],
        );
        // det 6 is not 1 over Z, so build it modulo 13 directly
        assert!(g.is_err());
        let gens = vec![
            ModMatrix::from_rows(&[[0, 1, 0], [0, 0, 1], [1, 0, 0]], 13),
            ModMatrix::from_rows(&[[2, 0, 0], [0, 3, 0], [0, 0, 11]], 13),
        ];
        let invs = gens.iter().map(|g| g.inverse().unwrap()).collect();
        let gm = ModGens { modulus: 13, degree: 3, gens, invs };
        let lines = find_monomial_system(&gm, &Params::default()).unwrap().expect("lines");
        assert!(monomial_system_holds(&gm, &lines));
        assert!(image_is_monomial(&gm).unwrap());
    }
}
