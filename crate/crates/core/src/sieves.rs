//! The six candidate-prime sieves.
//!
//! Each sieve finds a witness over Z whose associated integer is divisible by
//! every prime where the image falls into one class of proper subgroups, and
//! shrinks it by gcd over independent witnesses. Witness searches are first
//! run modulo a surjective prime `p0` and then checked exactly.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::envelope::{algebra_basis_q, algebra_basis_q_with, algebra_dim_mod};
use crate::error::{Error, Result};
use crate::factor::{gcd_refine, PartialFactorization, RefineOptions};
use crate::forms::{find_nondegenerate, invariant_forms, normal_closure_invariant_forms};
use crate::group::{Expr, GenSet, ModGens, Word, WordSampler};
use crate::linalg::{finite_order_test, gcd_nonzero_entries, ElementOrder};
use crate::modular::element_order_exceeds;
use crate::params::{sym_exponent, Params};
use crate::recognition::{exact_order, image_is_monomial, image_is_solvable};
use crate::stabchain::{group_order_bfs, Capped};
use crate::witness::{generator_commutators, Claim, FormScope, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineVerdict {
    In,
    Out,
    Deferred,
}

/// Per-prime refinement of a sieve candidate.
#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    pub verdict: RefineVerdict,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl Refinement {
    fn new(verdict: RefineVerdict, witness: Option<Witness>) -> Self {
        Refinement { verdict, witness, note: None }
    }

    fn deferred(note: impl Into<String>) -> Self {
        Refinement { verdict: RefineVerdict::Deferred, witness: None, note: Some(note.into()) }
    }
}

/// Output of one sieve.
#[derive(Clone, Debug, Serialize)]
pub struct CandidateReport {
    pub sieve: &'static str,
    /// One witness per gcd round.
    pub witnesses: Vec<Witness>,
    pub factorization: PartialFactorization,
    pub rounds: usize,
    pub candidates: Vec<u64>,
    /// Prime factors too large for the per-prime machinery.
    pub untestable: Vec<String>,
    pub refined: BTreeMap<u64, Refinement>,
}

impl CandidateReport {
    /// Candidates whose refinement is `In`.
    pub fn in_set(&self) -> Vec<u64> {
        self.refined.iter().filter(|(_, r)| r.verdict == RefineVerdict::In).map(|(&p, _)| p).collect()
    }

    /// The factored integer behind the candidates.
    pub fn value(&self) -> &BigUint {
        &self.factorization.input
    }
}

fn refine_options(params: &Params) -> RefineOptions {
    RefineOptions { min_rounds: params.min_rounds, max_rounds: params.max_rounds, threshold: 1, budget: params.factor }
}

/// Runs `gcd_refine` over witness values from `next`, then refines every
/// candidate with `refine`.
fn run_sieve<N, R>(sieve: &'static str, params: &Params, mut next: N, refine: R, missing: Error) -> Result<CandidateReport>
where
    N: FnMut() -> Result<Option<(BigUint, Witness)>>,
    R: Fn(u64) -> Result<Refinement>,
{
    let mut witnesses = Vec::new();
    let mut failure = None;
    let refined = gcd_refine(
        || match next() {
            Ok(Some((v, w))) => {
                witnesses.push(w);
                Some(v)
            }
            Ok(None) => None,
            Err(e) => {
                failure = Some(e);
                None
            }
        },
        refine_options(params),
    );
    if let Some(e) = failure {
        if witnesses.is_empty() {
            return Err(e);
        }
    }
    let Some(refined) = refined else { return Err(missing) };
    let mut candidates = Vec::new();
    let mut untestable = Vec::new();
    for p in refined.factorization.primes() {
        match p.to_u64() {
            Some(q) => candidates.push(q),
            None => untestable.push(p.to_string()),
        }
    }
    if !refined.factorization.is_complete() {
        untestable.push(format!("unfactored {}", refined.factorization.composite_remainder));
    }
    let mut map = BTreeMap::new();
    for &p in &candidates {
        map.insert(p, refine(p)?);
    }
    Ok(CandidateReport {
        sieve,
        witnesses,
        rounds: refined.rounds,
        factorization: refined.factorization,
        candidates,
        untestable,
        refined: map,
    })
}

fn abs_big(x: &BigInt) -> BigUint {
    x.magnitude().clone()
}

fn small_image(p: u64, n: usize, params: &Params) -> bool {
    (p as u128).checked_pow(n as u32).is_some_and(|c| c <= params.refine_points as u128)
}

/// Primes where the image may have no element of order above `k`.
///
/// Finds `h` of infinite order, takes `m_i = gcd(h^i - 1)` for `i <= k` and
/// `l = lcm(m_i)`.
pub fn primes_for_order(g: &GenSet, k: u64, params: &Params, p0: Option<u64>) -> Result<CandidateReport> {
    let ngens = g.len();
    if ngens == 0 {
        return Err(Error::NoInfiniteOrderElement);
    }
    let mut sampler = WordSampler::new(params.derive_seed(1));
    let mirror = p0.map(|p| g.reduce(p));
    let mut next = || -> Result<Option<(BigUint, Witness)>> {
        for _ in 0..params.sample_budget {
            let w = sampler.next_word(ngens);
            sampler.record_failure();
            if let Some(gm) = &mirror {
                if !element_order_exceeds(&gm.evaluate(&w)?, k) {
                    continue;
                }
            }
            let h = crate::group::evaluate_word(g, &w)?;
            if finite_order_test(&h) != ElementOrder::Infinite {
                continue;
            }
            let mut l = BigInt::from(1);
            let mut power = h.clone();
            for _ in 1..=k {
                let m = gcd_nonzero_entries(&power.minus_identity());
                l = num_integer::lcm(l, m);
                power = &power * &h;
            }
            let value = abs_big(&l);
            return Ok(Some((value, Witness::new(Expr::Word(w), Claim::InfiniteOrder))));
        }
        Ok(None)
    };
    let first = next()?.ok_or(Error::NoInfiniteOrderElement)?;
    let mut pending = Some(first);
    let refine = |p: u64| -> Result<Refinement> {
        Ok(match group_order_bfs(&g.reduce(p), k + 1) {
            Capped::Order(o) if o <= k => {
                let full = crate::modular::sl_order(g.degree(), p).to_string();
                let claim = Claim::ImageOrder { modulus: p, order: o.to_string(), full };
                Refinement::new(RefineVerdict::In, Some(Witness::new(None, claim)))
            }
            _ => Refinement { verdict: RefineVerdict::Out, witness: None, note: Some(format!("image order exceeds {k}")) },
        })
    };
    run_sieve(
        "order",
        params,
        || match pending.take() {
            Some(x) => Ok(Some(x)),
            None => next(),
        },
        refine,
        Error::NoInfiniteOrderElement,
    )
}

/// Primes where the image is not absolutely irreducible, from Gram
/// determinants of enveloping-algebra bases.
pub fn primes_for_abs_irreducible(g: &GenSet, params: &Params) -> Result<CandidateReport> {
    let n = g.degree();
    let base = algebra_basis_q(g)?;
    if !base.is_full() {
        return Err(Error::NotAbsolutelyIrreducible { dimension: base.dimension() });
    }
    abs_irreducible_from(g, base, params, |s| {
        let mut steps: Vec<Word> = (0..g.len()).map(Word::generator).collect();
        for _ in 0..g.len() + 1 {
            steps.push(s.word_of_length(g.len(), 2));
        }
        algebra_basis_q_with(g, &steps)
    }, move |p| {
        let dim = algebra_dim_mod(g, p)?;
        let claim = Claim::AlgebraDimension { modulus: Some(p), dimension: dim, words: crate::envelope::algebra_basis_mod(&g.reduce(p)).0 };
        let verdict = if dim < n * n { RefineVerdict::In } else { RefineVerdict::Out };
        Ok(Refinement::new(verdict, Some(Witness::new(None, claim))))
    })
}

fn abs_irreducible_from<S, R>(
    g: &GenSet,
    base: crate::envelope::AlgebraBasis,
    params: &Params,
    mut respin: S,
    refine: R,
) -> Result<CandidateReport>
where
    S: FnMut(&mut WordSampler) -> Result<crate::envelope::AlgebraBasis>,
    R: Fn(u64) -> Result<Refinement>,
{
    let n = g.degree();
    let mut sampler = WordSampler::new(params.derive_seed(2));
    let mut first = Some(base);
    let next = || -> Result<Option<(BigUint, Witness)>> {
        for _ in 0..8 {
            let b = match first.take() {
                Some(b) => b,
                None => respin(&mut sampler)?,
            };
            if let Some(d) = &b.gram_det {
                let claim = Claim::AlgebraDimension { modulus: None, dimension: n * n, words: b.words.clone() };
                return Ok(Some((abs_big(d), Witness::new(None, claim))));
            }
        }
        Ok(None)
    };
    run_sieve("abs_irreducible", params, next, refine, Error::NotAbsolutelyIrreducible { dimension: 0 })
}

/// Primes where the image may be monomial, from `[g^k, h^k]` with
/// `k = lcm(1..n)`; prime degree at least 5.
pub fn primes_for_monomial(g: &GenSet, params: &Params, p0: Option<u64>) -> Result<CandidateReport> {
    let n = g.degree();
    if n < 5 {
        return Err(Error::DegreeSkip { sieve: "monomial", degree: n });
    }
    let k = sym_exponent(n);
    let ngens = g.len();
    let mirror = p0.map(|p| g.reduce(p));
    let mut sampler = WordSampler::new(params.derive_seed(3));
    let next = || -> Result<Option<(BigUint, Witness)>> {
        for _ in 0..params.sample_budget {
            let a = sampler.next_word(ngens);
            let b = sampler.next_word(ngens);
            sampler.record_failure();
            let c = Expr::comm(Expr::pow(a.into(), k), Expr::pow(b.into(), k));
            if let Some(gm) = &mirror {
                if c.evaluate_mod(gm)?.0.is_identity() {
                    continue;
                }
            }
            let (m, _) = c.evaluate(g)?;
            if m.is_identity() {
                continue;
            }
            let d = abs_big(&gcd_nonzero_entries(&m.minus_identity()));
            let claim = Claim::GcdEntries { value: d.to_string() };
            return Ok(Some((d, Witness::new(c, claim))));
        }
        Ok(None)
    };
    let refine = |p: u64| -> Result<Refinement> {
        if !small_image(p, n, params) {
            return Ok(Refinement::deferred("left to the surjectivity filter"));
        }
        let verdict = if image_is_monomial(&g.reduce(p))? { RefineVerdict::In } else { RefineVerdict::Out };
        Ok(Refinement::new(verdict, None))
    };
    run_sieve("monomial", params, next, refine, Error::WitnessNotFound("monomial"))
}

/// Random balanced commutator of depth `delta + 1` with leaves of the
/// configured length, nontrivial modulo `p0` when given.
fn tree_witness(
    g: &GenSet,
    sampler: &mut WordSampler,
    mirror: Option<&ModGens>,
    params: &Params,
    tries: usize,
) -> Result<Option<Expr>> {
    let n = g.degree();
    let leaves = 1usize << (params.delta_for(n) + 1);
    for t in 0..tries {
        let len = params.leaf_length + t / 50;
        let tree = Expr::tree_commutator((0..leaves).map(|_| sampler.word_of_length(g.len(), len).into()).collect());
        match mirror {
            Some(gm) => {
                if !tree.evaluate_mod(gm)?.0.is_identity() {
                    return Ok(Some(tree));
                }
            }
            None => {
                if !tree.evaluate(g)?.0.is_identity() {
                    return Ok(Some(tree));
                }
            }
        }
    }
    Ok(None)
}

/// Primes where the image may be solvable, from a nontrivial tree commutator.
pub fn primes_for_solvable(g: &GenSet, params: &Params, p0: Option<u64>) -> Result<CandidateReport> {
    let n = g.degree();
    if g.is_empty() {
        return Err(Error::SolvableWitnessNotFound);
    }
    let mirror = p0.map(|p| g.reduce(p));
    let mut sampler = WordSampler::new(params.derive_seed(4));
    let tries = params.sample_budget / 10;
    let next = || -> Result<Option<(BigUint, Witness)>> {
        let Some(tree) = tree_witness(g, &mut sampler, mirror.as_ref(), params, tries)? else { return Ok(None) };
        let (m, _) = tree.evaluate(g)?;
        if m.is_identity() {
            return Ok(None);
        }
        let d = abs_big(&gcd_nonzero_entries(&m.minus_identity()));
        let claim = Claim::GcdEntries { value: d.to_string() };
        Ok(Some((d, Witness::new(tree, claim))))
    };
    let refine = |p: u64| -> Result<Refinement> {
        if !small_image(p, n, params) {
            return Ok(Refinement::deferred("left to the surjectivity filter"));
        }
        let gm = g.reduce(p);
        let o = exact_order(&gm, params)?;
        let claim = Claim::ImageOrder { modulus: p, order: o.order.to_string(), full: o.full.to_string() };
        let witness = Some(Witness::new(None, claim));
        if o.is_full() {
            return Ok(Refinement::new(RefineVerdict::Out, witness));
        }
        if o.order > BigUint::from(params.refine_points) {
            return Ok(Refinement::deferred("image too large to enumerate"));
        }
        let verdict = if image_is_solvable(&gm, params.refine_points)? { RefineVerdict::In } else { RefineVerdict::Out };
        Ok(Refinement::new(verdict, witness))
    };
    run_sieve("solvable", params, next, refine, Error::SolvableWitnessNotFound)
}

fn trace_gap(e: &Expr, g: &GenSet) -> Result<BigInt> {
    let (m, mi) = e.evaluate(g)?;
    Ok(m.trace() - mi.trace())
}

/// Shared search for `a = tr(h) - tr(h^-1) != 0` over elements drawn by
/// `draw`.
fn trace_sieve<D, R>(sieve: &'static str, g: &GenSet, params: &Params, p0: Option<u64>, mut draw: D, refine: R) -> Result<CandidateReport>
where
    D: FnMut(&mut WordSampler) -> Expr,
    R: Fn(u64) -> Result<Refinement>,
{
    let mirror = p0.map(|p| g.reduce(p));
    let mut sampler = WordSampler::new(params.derive_seed(if sieve == "isometry" { 5 } else { 6 }));
    let next = || -> Result<Option<(BigUint, Witness)>> {
        for _ in 0..params.sample_budget {
            let e = draw(&mut sampler);
            sampler.record_failure();
            if let Some(gm) = &mirror {
                let (m, mi) = e.evaluate_mod(gm)?;
                if m.trace() == mi.trace() {
                    continue;
                }
            }
            let a = trace_gap(&e, g)?;
            if a.is_zero() {
                continue;
            }
            let claim = Claim::TraceDifference { value: a.to_string() };
            return Ok(Some((abs_big(&a), Witness::new(e, claim))));
        }
        Ok(None)
    };
    run_sieve(sieve, params, next, refine, Error::WitnessNotFound(sieve))
}

fn isometry_refine(g: &GenSet, p: u64) -> Result<Refinement> {
    let n = g.degree();
    let gm = g.reduce(p);
    Ok(match find_nondegenerate(&invariant_forms(&gm.gens, n, p), n, p, 20) {
        Some(form) => {
            let claim = Claim::InvariantForm { modulus: p, scope: FormScope::Generators, form };
            Refinement::new(RefineVerdict::In, Some(Witness::new(None, claim)))
        }
        None => Refinement::new(RefineVerdict::Out, None),
    })
}

/// Primes where the image may preserve a nondegenerate form.
pub fn primes_for_isometry(g: &GenSet, params: &Params, p0: Option<u64>) -> Result<CandidateReport> {
    let base = algebra_basis_q(g)?;
    if !base.is_full() {
        return Err(Error::NotAbsolutelyIrreducible { dimension: base.dimension() });
    }
    let ngens = g.len();
    trace_sieve("isometry", g, params, p0, |s| Expr::Word(s.next_word(ngens)), |p| isometry_refine(g, p))
}

/// Random product of one to three conjugates `w t w^-1`.
pub fn normal_closure_element(s: &mut WordSampler, ngens: usize, t: &Word) -> Word {
    use rand::Rng;
    let count = s.rng().gen_range(1..=3);
    let mut acc = Word::identity();
    for _ in 0..count {
        let len = s.rng().gen_range(0..=3);
        let w = s.word_of_length(ngens, len);
        let e = if s.rng().gen_bool(0.5) { t.clone() } else { t.inverse() };
        acc = acc.concat(&w.concat(&e).concat(&w.inverse()));
    }
    acc
}

/// Isometry sieve over the normal closure of the transvection `t`.
pub fn primes_for_isometry_normal_closure(g: &GenSet, t: &Word, params: &Params) -> Result<CandidateReport> {
    let ngens = g.len();
    let n = g.degree();
    let tm = crate::group::evaluate_word(g, t)?;
    let refine = |p: u64| -> Result<Refinement> {
        let gm = g.reduce(p);
        let seed = crate::modular::reduce_mod(&tm, p);
        let basis = normal_closure_invariant_forms(std::slice::from_ref(&seed), &gm.gens, n, p);
        Ok(match find_nondegenerate(&basis, n, p, 20) {
            Some(form) => {
                let claim = Claim::InvariantForm { modulus: p, scope: FormScope::NormalClosure, form };
                Refinement::new(RefineVerdict::In, Some(Witness::new(Expr::Word(t.clone()), claim)))
            }
            None => Refinement::new(RefineVerdict::Out, None),
        })
    };
    trace_sieve("isometry", g, params, None, |s| Expr::Word(normal_closure_element(s, ngens, t)), refine)
}

/// Primes where the derived group may preserve a form (similarity images);
/// degree at least 3.
pub fn primes_for_similarity(g: &GenSet, params: &Params, p0: Option<u64>) -> Result<CandidateReport> {
    let n = g.degree();
    if n == 2 {
        return Err(Error::DegreeSkip { sieve: "similarity", degree: n });
    }
    let ngens = g.len();
    let refine = |p: u64| -> Result<Refinement> {
        let gm = g.reduce(p);
        let comms = generator_commutators(&gm.gens, &gm.invs);
        let basis = normal_closure_invariant_forms(&comms, &gm.gens, n, p);
        Ok(match find_nondegenerate(&basis, n, p, 20) {
            Some(form) => {
                let claim = Claim::InvariantForm { modulus: p, scope: FormScope::Derived, form };
                Refinement::new(RefineVerdict::In, Some(Witness::new(None, claim)))
            }
            None => Refinement::new(RefineVerdict::Out, None),
        })
    };
    trace_sieve(
        "similarity",
        g,
        params,
        p0,
        |s| Expr::comm(s.next_word(ngens).into(), s.next_word(ngens).into()),
        refine,
    )
}

/// Abs-irreducibility sieve over the normal closure of `t`: Gram
/// determinants of the normal-closure algebra, re-spun from random
/// conjugates of `t`.
pub fn primes_for_abs_irreducible_normal_closure(g: &GenSet, t: &Word, params: &Params) -> Result<CandidateReport> {
    let n = g.degree();
    let base = crate::envelope::normal_closure_algebra_basis_q(g, t)?;
    if !base.is_full() {
        return Err(Error::NotAbsolutelyIrreducible { dimension: base.dimension() });
    }
    let tm = crate::group::evaluate_word(g, t)?;
    let ngens = g.len();
    abs_irreducible_from(
        g,
        base,
        params,
        |s| {
            let mut words = vec![Word::identity(), t.clone()];
            for _ in 0..2 * n * n {
                words.push(normal_closure_element(s, ngens, t));
            }
            span_basis(g, &words, n)
        },
        move |p| {
            let gm = g.reduce(p);
            let dim = crate::envelope::normal_closure_algebra_mod(&gm, &crate::modular::reduce_mod(&tm, p)).len();
            let verdict = if dim < n * n { RefineVerdict::In } else { RefineVerdict::Out };
            let mut r = Refinement::new(verdict, None);
            r.note = Some(format!("normal closure algebra dimension {dim}"));
            Ok(r)
        },
    )
}

/// Algebra basis from the products of pairs of `words` (and the words).
fn span_basis(g: &GenSet, words: &[Word], n: usize) -> Result<crate::envelope::AlgebraBasis> {
    use crate::linalg::{Insertion, RationalSpan};
    let mut span = RationalSpan::new(n * n);
    let mut kept = Vec::new();
    let mut mats = Vec::new();
    let candidates = words.iter().cloned().chain(words.iter().flat_map(|a| words.iter().map(move |b| a.concat(b))));
    for w in candidates {
        let m = crate::group::evaluate_word(g, &w)?;
        if span.insert(&m.to_rat_vector())? == Insertion::Inserted {
            kept.push(w);
            mats.push(m);
            if mats.len() == n * n {
                break;
            }
        }
    }
    let gram_det = if mats.len() == n * n {
        let entries = mats.iter().flat_map(|a| mats.iter().map(move |b| a.trace_of_product(b))).collect();
        Some(crate::linalg::determinant_flat(n * n, entries))
    } else {
        None
    };
    Ok(crate::envelope::AlgebraBasis { degree: n, words: kept, matrices: mats, gram_det })
}
