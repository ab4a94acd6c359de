//! Re-checkable claims about words in a group.
//!
//! Every report entry pairs an optional witness expression with a [`Claim`];
//! [`Witness::verify`] recomputes the claim from the generators alone.

use serde::{Deserialize, Serialize};

use crate::envelope::{algebra_basis_mod, algebra_basis_q_with};
use crate::error::{Error, Result};
use crate::forms::{orbit_span, preserves};
use crate::group::{Expr, GenSet, Word};
use crate::linalg::{char_poly, finite_order_test, gcd_nonzero_entries, ElementOrder};
use crate::modular::{det_mod_prime, element_order_exceeds, reduce_bigint, sl_order, FpSpan, ModMatrix};
use crate::params::Params;
use crate::poly::is_irreducible;
use crate::recognition::{exact_order, monomial_system_holds};

/// A checkable statement. Integers are decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// The word has infinite order in `SL(n, Z)`.
    InfiniteOrder,
    /// `gcd` of the nonzero entries of `w - 1` is `value`.
    GcdEntries { value: String },
    /// `tr(w) - tr(w^-1) = value`.
    TraceDifference { value: String },
    /// `w` is not the identity modulo `modulus`.
    NontrivialMod { modulus: u64 },
    /// `w^i != 1` modulo `modulus` for `1 <= i <= bound`.
    OrderExceedsMod { modulus: u64, bound: u64 },
    /// `tr(w) != tr(w^-1)` modulo `modulus`.
    TraceAsymmetricMod { modulus: u64 },
    /// The characteristic polynomial of `w` is irreducible modulo `prime`,
    /// hence over Q.
    IrreducibleCharPoly { prime: u64 },
    /// The listed words span an algebra of this dimension, and spinning the
    /// generators gives the same dimension (over Q when `modulus` is absent).
    AlgebraDimension { modulus: Option<u64>, dimension: usize, words: Vec<Word> },
    /// Exact order of the image modulo `modulus`.
    ImageOrder { modulus: u64, order: String, full: String },
    /// A nondegenerate form preserved by the generators (`scope = generators`),
    /// by the derived group (`derived`), or by the normal closure of the
    /// witness word (`normal_closure`).
    InvariantForm { modulus: u64, scope: FormScope, form: Vec<u64> },
    /// A system of `n` lines (row vectors) permuted by the generators.
    MonomialSystem { modulus: u64, lines: Vec<Vec<u64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormScope {
    Generators,
    Derived,
    NormalClosure,
}

/// A claim with the expression it is about.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub word: Option<Expr>,
    pub claim: Claim,
}

impl Witness {
    pub fn new(word: impl Into<Option<Expr>>, claim: Claim) -> Self {
        Witness { word: word.into(), claim }
    }

    fn need_word(&self) -> Result<&Expr> {
        self.word.as_ref().ok_or_else(|| Error::Schema("claim needs a witness word".into()))
    }

    /// Recomputes the claim for the group `g`.
    pub fn verify(&self, g: &GenSet) -> Result<bool> {
        let n = g.degree();
        Ok(match &self.claim {
            Claim::InfiniteOrder => {
                let (m, _) = self.need_word()?.evaluate(g)?;
                finite_order_test(&m) == ElementOrder::Infinite
            }
            Claim::GcdEntries { value } => {
                let (m, _) = self.need_word()?.evaluate(g)?;
                gcd_nonzero_entries(&m.minus_identity()).to_string() == *value
            }
            Claim::TraceDifference { value } => {
                let (m, mi) = self.need_word()?.evaluate(g)?;
                (m.trace() - mi.trace()).to_string() == *value
            }
            Claim::NontrivialMod { modulus } => {
                let (m, _) = self.need_word()?.evaluate_mod(&g.reduce(*modulus))?;
                !m.is_identity()
            }
            Claim::OrderExceedsMod { modulus, bound } => {
                let (m, _) = self.need_word()?.evaluate_mod(&g.reduce(*modulus))?;
                element_order_exceeds(&m, *bound)
            }
            Claim::TraceAsymmetricMod { modulus } => {
                let (m, mi) = self.need_word()?.evaluate_mod(&g.reduce(*modulus))?;
                m.trace() != mi.trace()
            }
            Claim::IrreducibleCharPoly { prime } => {
                let (m, _) = self.need_word()?.evaluate(g)?;
                let f: Vec<u64> = char_poly(&m).iter().map(|c| reduce_bigint(c, *prime)).collect();
                is_irreducible(&f, *prime)
            }
            Claim::AlgebraDimension { modulus, dimension, words } => match modulus {
                None => {
                    let steps: Vec<Word> = (0..g.len()).map(Word::generator).collect();
                    let spun = algebra_basis_q_with(g, &steps)?.dimension();
                    let mut span = crate::linalg::RationalSpan::new(n * n);
                    for w in words {
                        span.insert(&crate::group::evaluate_word(g, w)?.to_rat_vector())?;
                    }
                    spun == *dimension && span.rank() == *dimension
                }
                Some(p) => {
                    let gm = g.reduce(*p);
                    let spun = algebra_basis_mod(&gm).0.len();
                    let mut span = FpSpan::new(n * n, *p);
                    for w in words {
                        span.insert(gm.evaluate(w)?.data());
                    }
                    spun == *dimension && span.rank() == *dimension
                }
            },
            Claim::ImageOrder { modulus, order, full } => {
                let target = sl_order(n, *modulus);
                let got = exact_order(&g.reduce(*modulus), &Params::default())?.order;
                got.to_string() == *order && target.to_string() == *full
            }
            Claim::InvariantForm { modulus, scope, form } => {
                let p = *modulus;
                if form.len() != n * n || det_mod_prime(n, form, p) == 0 {
                    return Ok(false);
                }
                let gm = g.reduce(p);
                match scope {
                    FormScope::Generators => preserves(&gm.gens, form),
                    FormScope::Derived => {
                        let comms = generator_commutators(&gm.gens, &gm.invs);
                        orbit_span(form, &gm.gens, n, p).iter().all(|f| preserves(&comms, f))
                    }
                    FormScope::NormalClosure => {
                        let (t, _) = self.need_word()?.evaluate_mod(&gm)?;
                        orbit_span(form, &gm.gens, n, p).iter().all(|f| preserves(std::slice::from_ref(&t), f))
                    }
                }
            }
            Claim::MonomialSystem { modulus, lines } => monomial_system_holds(&g.reduce(*modulus), lines),
        })
    }
}

/// `[a, b]` for every ordered pair of distinct generators.
pub fn generator_commutators(gens: &[ModMatrix], invs: &[ModMatrix]) -> Vec<ModMatrix> {
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in 0..gens.len() {
            if i != j {
                out.push(gens[i].commutator_with(&invs[i], &gens[j], &invs[j]));
            }
        }
    }
    out
}
