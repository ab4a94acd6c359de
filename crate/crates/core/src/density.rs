//! Drivers computing the exceptional primes of a dense group.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::normal_closure_algebra_mod;
use crate::error::{Error, Result};
use crate::factor::{is_prime_u64, primes_above, primes_below};
use crate::forms::{find_nondegenerate, normal_closure_invariant_forms};
use crate::group::{evaluate_word, Expr, GenSet, Word, WordSampler};
use crate::linalg::{char_poly, is_transvection};
use crate::modular::{reduce_bigint, reduce_mod};
use crate::params::{is_prime_degree, Params};
use crate::poly::is_irreducible;
use crate::recognition::{exact_order, is_surjective_mod_m, is_surjective_mod_p, Decision, Verdict};
use crate::sieves::{self, normal_closure_element, CandidateReport};
use crate::witness::{Claim, Witness};

/// Smallest prime `p > 3` among the first scanned ones with surjective image.
pub fn find_p0(g: &GenSet, params: &Params) -> Result<u64> {
    for p in primes_above(3, params.p0_scan) {
        if is_surjective_mod_p(g, p, params)?.verdict == Verdict::Yes {
            return Ok(p);
        }
    }
    Err(Error::NoSurjectivePrimeFound)
}

/// Outcome of one sieve inside a driver run.
#[derive(Clone, Debug, Serialize)]
pub struct SieveEntry {
    pub sieve: &'static str,
    pub status: &'static str,
    pub error: Option<String>,
    pub report: Option<CandidateReport>,
}

/// The mod 2 / mod 4 comparison behind the Π̃ adjustment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwoAdicTest {
    pub surjective_mod_2: bool,
    pub surjective_mod_4: bool,
}

/// Best-effort witnesses for the equivalent density criteria.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DensityDiagnostics {
    pub irreducible_element: Option<Witness>,
    pub non_solvable: Option<Witness>,
    pub trace_asymmetry: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PiReport {
    pub degree: usize,
    pub p0: Option<u64>,
    pub pi: Vec<u64>,
    pub pi_tilde: Vec<u64>,
    pub candidates: Vec<u64>,
    pub sieves: Vec<SieveEntry>,
    pub verdicts: Vec<Decision>,
    /// Expected empty; a nonempty set means Π may be incomplete.
    pub undetermined: Vec<u64>,
    pub untestable: Vec<String>,
    pub two_adic: Option<TwoAdicTest>,
    pub diagnostics: Option<DensityDiagnostics>,
}

impl PiReport {
    /// Every witness in the report, in a stable order.
    pub fn witnesses(&self) -> Vec<&Witness> {
        let mut out = Vec::new();
        for s in &self.sieves {
            if let Some(r) = &s.report {
                out.extend(&r.witnesses);
                out.extend(r.refined.values().filter_map(|x| x.witness.as_ref()));
            }
        }
        for d in &self.verdicts {
            out.extend(&d.witnesses);
        }
        if let Some(d) = &self.diagnostics {
            out.extend([&d.irreducible_element, &d.non_solvable, &d.trace_asymmetry].into_iter().flatten());
        }
        out
    }
}

/// Π̃ from Π: adds 2 when `n <= 4` and the image is onto mod 2 but not mod 4.
pub fn pi_tilde(g: &GenSet, pi: &[u64], params: &Params) -> Result<(Vec<u64>, Option<TwoAdicTest>)> {
    let mut out: BTreeSet<u64> = pi.iter().copied().collect();
    if g.degree() > 4 {
        return Ok((out.into_iter().collect(), None));
    }
    let s2 = is_surjective_mod_m(g, 2, params)?;
    let s4 = if s2 { is_surjective_mod_m(g, 4, params)? } else { false };
    if s2 && !s4 {
        out.insert(2);
    }
    Ok((out.into_iter().collect(), Some(TwoAdicTest { surjective_mod_2: s2, surjective_mod_4: s4 })))
}

#[derive(Clone, Copy)]
enum SieveKind {
    Order,
    AbsIrreducible,
    Monomial,
    Solvable,
    Isometry,
    Similarity,
}

impl SieveKind {
    fn name(self) -> &'static str {
        match self {
            SieveKind::Order => "order",
            SieveKind::AbsIrreducible => "abs_irreducible",
            SieveKind::Monomial => "monomial",
            SieveKind::Solvable => "solvable",
            SieveKind::Isometry => "isometry",
            SieveKind::Similarity => "similarity",
        }
    }
}

fn collect_sieves(results: Vec<(&'static str, Result<CandidateReport>)>) -> Result<(Vec<SieveEntry>, BTreeSet<u64>, Vec<String>)> {
    let mut entries = Vec::new();
    let mut candidates = BTreeSet::new();
    let mut untestable = Vec::new();
    for (name, r) in results {
        match r {
            Ok(rep) => {
                candidates.extend(rep.candidates.iter().copied());
                untestable.extend(rep.untestable.iter().map(|u| format!("{name}: {u}")));
                entries.push(SieveEntry { sieve: name, status: "ok", error: None, report: Some(rep) });
            }
            Err(e @ Error::DegreeSkip { .. }) => {
                entries.push(SieveEntry { sieve: name, status: "skipped", error: Some(e.to_string()), report: None });
            }
            Err(e) => return Err(e),
        }
    }
    Ok((entries, candidates, untestable))
}

/// Π(G) and Π̃(G) for a group of prime degree.
///
/// Candidates are the union of the sieve outputs together with 2 and 3; each
/// candidate is then settled by [`is_surjective_mod_p`].
pub fn primes_for_dense(g: &GenSet, params: &Params) -> Result<PiReport> {
    let n = g.degree();
    if !is_prime_degree(n) {
        return Err(Error::DegreeNotPrime(n));
    }
    let k_n = params.order_bound_for(n)?;
    let p0 = find_p0(g, params)?;
    let mut kinds = vec![SieveKind::Order, SieveKind::AbsIrreducible, SieveKind::Solvable];
    if n >= 5 {
        kinds.push(SieveKind::Monomial);
    }
    if n >= 3 {
        kinds.extend([SieveKind::Isometry, SieveKind::Similarity]);
    }
    let results: Vec<(&'static str, Result<CandidateReport>)> = kinds
        .par_iter()
        .map(|&kind| {
            let r = match kind {
                SieveKind::Order => sieves::primes_for_order(g, k_n, params, Some(p0)),
                SieveKind::AbsIrreducible => sieves::primes_for_abs_irreducible(g, params),
                SieveKind::Monomial => sieves::primes_for_monomial(g, params, Some(p0)),
                SieveKind::Solvable => sieves::primes_for_solvable(g, params, Some(p0)),
                SieveKind::Isometry => sieves::primes_for_isometry(g, params, Some(p0)),
                SieveKind::Similarity => sieves::primes_for_similarity(g, params, Some(p0)),
            };
            (kind.name(), r)
        })
        .collect();
    let (entries, mut candidates, untestable) = collect_sieves(results)?;
    candidates.extend([2, 3]);
    let candidates: Vec<u64> = candidates.into_iter().collect();
    let verdicts = candidates.par_iter().map(|&p| is_surjective_mod_p(g, p, params)).collect::<Result<Vec<_>>>()?;
    let pi: Vec<u64> = verdicts.iter().filter(|d| d.verdict == Verdict::No).map(|d| d.prime).collect();
    let undetermined = verdicts.iter().filter(|d| d.verdict == Verdict::Undetermined).map(|d| d.prime).collect();
    let (pi_tilde, two_adic) = pi_tilde(g, &pi, params)?;
    Ok(PiReport {
        degree: n,
        p0: Some(p0),
        pi,
        pi_tilde,
        candidates,
        sieves: entries,
        verdicts,
        undetermined,
        untestable,
        two_adic,
        diagnostics: Some(density_diagnostics_with(g, params, Some(p0))),
    })
}

/// Surjectivity at `p` for the transvection driver.
///
/// Small cases use the exact oracle. Otherwise the image of `N = <t>^G` is
/// examined: absolutely irreducible and not an isometry group means it is
/// all of `SL(n, p)` (it is generated by transvections).
pub fn transvection_verdict(g: &GenSet, t: &Word, p: u64, params: &Params) -> Result<Decision> {
    let n = g.degree();
    let gm = g.reduce(p);
    let tm = reduce_mod(&evaluate_word(g, t)?, p);
    let feasible = (p as u128).checked_pow(n as u32).is_some_and(|c| c <= params.orbit_cap as u128);
    if feasible || p <= 3 {
        match exact_order(&gm, params) {
            Ok(o) => {
                let verdict = if o.is_full() { Verdict::Yes } else { Verdict::No };
                let claim = Claim::ImageOrder { modulus: p, order: o.order.to_string(), full: o.full.to_string() };
                return Ok(Decision { prime: p, verdict, method: "exact_order", witnesses: vec![Witness::new(None, claim)] });
            }
            Err(Error::OrderOracleUnavailable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let dim = normal_closure_algebra_mod(&gm, &tm).len();
    if dim < n * n {
        return Ok(Decision { prime: p, verdict: Verdict::No, method: "normal_closure_algebra", witnesses: Vec::new() });
    }
    let forms = normal_closure_invariant_forms(std::slice::from_ref(&tm), &gm.gens, n, p);
    if let Some(form) = find_nondegenerate(&forms, n, p, 20) {
        let claim = Claim::InvariantForm { modulus: p, scope: crate::witness::FormScope::NormalClosure, form };
        let w = Witness::new(Expr::Word(t.clone()), claim);
        return Ok(Decision { prime: p, verdict: Verdict::No, method: "normal_closure_form", witnesses: vec![w] });
    }
    let mut sampler = WordSampler::new(params.derive_seed(p ^ 0x7472));
    for _ in 0..params.certificate_tries {
        let w = normal_closure_element(&mut sampler, g.len(), t);
        let (m, mi) = gm.evaluate_pair(&w)?;
        if m.trace() != mi.trace() {
            let w = Witness::new(Expr::Word(w), Claim::TraceAsymmetricMod { modulus: p });
            return Ok(Decision { prime: p, verdict: Verdict::Yes, method: "transvections", witnesses: vec![w] });
        }
    }
    Ok(Decision { prime: p, verdict: Verdict::Undetermined, method: "budget", witnesses: Vec::new() })
}

/// Π(G) for even degree, given a transvection `t` (a word in `G`).
pub fn primes_for_dense_transvection(g: &GenSet, t: &Word, params: &Params) -> Result<PiReport> {
    let n = g.degree();
    if n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("transvection driver needs even degree, got {n}")));
    }
    if !is_transvection(&evaluate_word(g, t)?) {
        return Err(Error::NotTransvection);
    }
    let not_dense = |e: Error| match e {
        Error::NotAbsolutelyIrreducible { dimension } => {
            Error::NotDense(format!("normal closure of the transvection spans an algebra of dimension {dimension}"))
        }
        Error::WitnessNotFound(_) => Error::NotDense("no trace-asymmetric element in the normal closure".into()),
        e => e,
    };
    let (abs, iso) = rayon::join(
        || sieves::primes_for_abs_irreducible_normal_closure(g, t, params),
        || sieves::primes_for_isometry_normal_closure(g, t, params),
    );
    let abs = abs.map_err(not_dense)?;
    let iso = iso.map_err(not_dense)?;
    let (entries, mut candidates, untestable) = collect_sieves(vec![("abs_irreducible", Ok(abs)), ("isometry", Ok(iso))])?;
    candidates.extend([2, 3]);
    let candidates: Vec<u64> = candidates.into_iter().collect();
    let verdicts = candidates.par_iter().map(|&p| transvection_verdict(g, t, p, params)).collect::<Result<Vec<_>>>()?;
    let pi: Vec<u64> = verdicts.iter().filter(|d| d.verdict == Verdict::No).map(|d| d.prime).collect();
    let undetermined = verdicts.iter().filter(|d| d.verdict == Verdict::Undetermined).map(|d| d.prime).collect();
    let (pi_tilde, two_adic) = pi_tilde(g, &pi, params)?;
    Ok(PiReport {
        degree: n,
        p0: None,
        pi,
        pi_tilde,
        candidates,
        sieves: entries,
        verdicts,
        undetermined,
        untestable,
        two_adic,
        diagnostics: None,
    })
}

/// Witnesses for the density criteria; absence means "not found".
pub fn density_diagnostics(g: &GenSet, params: &Params) -> DensityDiagnostics {
    let p0 = find_p0(g, params).ok();
    density_diagnostics_with(g, params, p0)
}

fn density_diagnostics_with(g: &GenSet, params: &Params, p0: Option<u64>) -> DensityDiagnostics {
    let mut out = DensityDiagnostics::default();
    if g.is_empty() {
        return out;
    }
    let ngens = g.len();
    let mut sampler = WordSampler::new(params.derive_seed(7));
    let test_primes = primes_below(200);
    for _ in 0..params.certificate_tries {
        let w = sampler.next_word(ngens);
        let Ok(m) = evaluate_word(g, &w) else { break };
        let f = char_poly(&m);
        if let Some(&q) = test_primes.iter().find(|&&q| {
            let fq: Vec<u64> = f.iter().map(|c| reduce_bigint(c, q)).collect();
            is_irreducible(&fq, q)
        }) {
            out.irreducible_element = Some(Witness::new(Expr::Word(w), Claim::IrreducibleCharPoly { prime: q }));
            break;
        }
        sampler.record_failure();
    }

    let q = p0.unwrap_or(5);
    if is_prime_u64(q) {
        let gm = g.reduce(q);
        let leaves = 1usize << (params.delta_for(g.degree()) + 1);
        for t in 0..params.certificate_tries {
            let len = params.leaf_length + t / 50;
            let tree = Expr::tree_commutator((0..leaves).map(|_| sampler.word_of_length(ngens, len).into()).collect());
            if tree.evaluate_mod(&gm).map(|(m, _)| !m.is_identity()).unwrap_or(false) {
                out.non_solvable = Some(Witness::new(tree, Claim::NontrivialMod { modulus: q }));
                break;
            }
        }
    }

    for _ in 0..params.certificate_tries {
        let w = sampler.next_word(ngens);
        let e = Expr::Word(w);
        if let Ok((m, mi)) = e.evaluate(g) {
            let a = m.trace() - mi.trace();
            if a != num_bigint::BigInt::from(0) {
                out.trace_asymmetry = Some(Witness::new(e, Claim::TraceDifference { value: a.to_string() }));
                break;
            }
        }
        sampler.record_failure();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    #[test]
    fn p0_examples() {
        let params = Params::default();
        assert_eq!(find_p0(&catalog("sl", 3).unwrap(), &params).unwrap(), 5);
        assert_eq!(find_p0(&catalog("rho_F", 7).unwrap(), &params).unwrap(), 7);
        let id = GenSet::from_i64("id", &[vec![vec![1, 0], vec![0, 1]]]).unwrap();
        assert_eq!(find_p0(&id, &params).unwrap_err(), Error::NoSurjectivePrimeFound);
    }

    #[test]
    fn rho7_pi() {
        let rho = catalog("rho_F", 7).unwrap();
        let r = primes_for_dense(&rho, &Params::default()).unwrap();
        assert_eq!(r.pi_tilde, vec![3, 5, 19]);
        assert!(r.undetermined.is_empty());
        let d = r.diagnostics.as_ref().unwrap();
        assert!(d.irreducible_element.is_some() && d.non_solvable.is_some() && d.trace_asymmetry.is_some());
        for w in r.witnesses() {
            assert!(w.verify(&rho).unwrap(), "{w:?}");
        }
    }

    #[test]
    fn transvection_driver() {
        let params = Params::default();
        let sl4 = catalog("sl", 4).unwrap();
        let r = primes_for_dense_transvection(&sl4, &Word::generator(0), &params).unwrap();
        assert!(r.pi.is_empty(), "{:?}", r.pi);
        let sp4 = catalog("sp4", 0).unwrap();
        let e = primes_for_dense_transvection(&sp4, &Word::generator(0), &Params { sample_budget: 300, ..params.clone() });
        assert!(matches!(e, Err(Error::NotDense(_))), "{e:?}");
        let only_t = GenSet::from_i64("t", &[vec![vec![1, 1, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]]]).unwrap();
        let e = primes_for_dense_transvection(&only_t, &Word::generator(0), &params);
        assert!(matches!(e, Err(Error::NotDense(_))), "{e:?}");
    }
}
