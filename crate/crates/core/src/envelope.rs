//! Enveloping algebras by spinning, over Q and over prime fields.
//!
//! Every basis element is recorded as a word in the generators so that
//! results computed modulo `p` lift back to the integral group.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::is_prime_u64;
use crate::group::{evaluate_word, GenSet, ModGens, Word};
use crate::linalg::{determinant_flat, is_transvection, IntMatrix, Insertion, RationalSpan};
use crate::modular::{FpSpan, ModMatrix};

/// Q-basis of an enveloping algebra, with the word behind every element.
#[derive(Clone, Debug, Serialize)]
pub struct AlgebraBasis {
    pub degree: usize,
    pub words: Vec<Word>,
    #[serde(skip)]
    pub matrices: Vec<IntMatrix>,
    /// `det[tr(A_i A_j)]`, present when the algebra is all of `M_n(Q)`.
    #[serde(serialize_with = "crate::serde_big::opt_bigint")]
    pub gram_det: Option<BigInt>,
}

impl AlgebraBasis {
    pub fn dimension(&self) -> usize {
        self.words.len()
    }

    pub fn is_full(&self) -> bool {
        self.dimension() == self.degree * self.degree
    }
}

fn gram_determinant(mats: &[IntMatrix]) -> BigInt {
    let m = mats.len();
    let mut entries = Vec::with_capacity(m * m);
    for a in mats {
        for b in mats {
            entries.push(a.trace_of_product(b));
        }
    }
    determinant_flat(m, entries)
}

fn finish(degree: usize, words: Vec<Word>, matrices: Vec<IntMatrix>) -> Result<AlgebraBasis> {
    let gram_det = if words.len() == degree * degree {
        let d = gram_determinant(&matrices);
        if d.is_zero() {
            return Err(Error::Invariant("full enveloping algebra with zero Gram determinant".into()));
        }
        Some(d)
    } else {
        None
    };
    Ok(AlgebraBasis { degree, words, matrices, gram_det })
}

/// Spins the identity under right multiplication by `steps` (words in `g`).
pub fn algebra_basis_q_with(g: &GenSet, steps: &[Word]) -> Result<AlgebraBasis> {
    let n = g.degree();
    let step_mats = steps.iter().map(|w| evaluate_word(g, w)).collect::<Result<Vec<_>>>()?;
    let mut span = RationalSpan::new(n * n);
    let id = IntMatrix::identity(n);
    span.insert(&id.to_rat_vector())?;
    let mut words = vec![Word::identity()];
    let mut mats = vec![id];
    let mut next = 0;
    while next < mats.len() && mats.len() < n * n {
        let (w, x) = (words[next].clone(), mats[next].clone());
        next += 1;
        for (s, sm) in steps.iter().zip(&step_mats) {
            let y = &x * sm;
            if span.insert(&y.to_rat_vector())? == Insertion::Inserted {
                words.push(w.concat(s));
                mats.push(y);
                if mats.len() == n * n {
                    break;
                }
            }
        }
    }
    finish(n, words, mats)
}

/// Q-basis of the enveloping algebra of `g`, in breadth-first word order.
pub fn algebra_basis_q(g: &GenSet) -> Result<AlgebraBasis> {
    let steps: Vec<Word> = (0..g.len()).map(Word::generator).collect();
    algebra_basis_q_with(g, &steps)
}

/// Basis matrices (and words) of the enveloping algebra of the image mod `p`.
pub fn algebra_basis_mod(g: &ModGens) -> (Vec<Word>, Vec<ModMatrix>) {
    let n = g.degree;
    let p = g.modulus;
    let mut span = FpSpan::new(n * n, p);
    let id = g.identity();
    span.insert(id.data());
    let mut words = vec![Word::identity()];
    let mut mats = vec![id];
    let mut next = 0;
    while next < mats.len() && mats.len() < n * n {
        let (w, x) = (words[next].clone(), mats[next].clone());
        next += 1;
        for (i, s) in g.gens.iter().enumerate() {
            let y = &x * s;
            if span.insert(y.data()) {
                words.push(w.concat(&Word::generator(i)));
                mats.push(y);
                if mats.len() == n * n {
                    break;
                }
            }
        }
    }
    (words, mats)
}

/// Dimension over `F_p` of the enveloping algebra of `phi_p(g)`.
pub fn algebra_dim_mod(g: &GenSet, p: u64) -> Result<usize> {
    if !is_prime_u64(p) {
        return Err(Error::CompositeModulus(p));
    }
    Ok(algebra_basis_mod(&g.reduce(p)).0.len())
}

/// Basis of the Q-algebra generated by all `g`-conjugates of the transvection
/// `t` (given as a word in `g`).
///
/// Starting from `{1, t}`, the span is closed under products of basis
/// elements and under conjugation by each generator until it is stable.
pub fn normal_closure_algebra_basis_q(g: &GenSet, t: &Word) -> Result<AlgebraBasis> {
    let n = g.degree();
    let tm = evaluate_word(g, t)?;
    if !is_transvection(&tm) {
        return Err(Error::NotTransvection);
    }
    let mut span = RationalSpan::new(n * n);
    let mut words = Vec::new();
    let mut mats: Vec<IntMatrix> = Vec::new();
    let mut pending = vec![(Word::identity(), IntMatrix::identity(n)), (t.clone(), tm)];
    while let Some((w, x)) = pending.pop() {
        if mats.len() == n * n {
            break;
        }
        if span.insert(&x.to_rat_vector())? != Insertion::Inserted {
            continue;
        }
        for (y_word, y) in words.iter().zip(&mats) {
            pending.push((w.concat(y_word), &x * y));
            pending.push((y_word.concat(&w), y * &x));
        }
        pending.push((w.concat(&w), &x * &x));
        for i in 0..g.len() {
            let c = &(&g.generators()[i] * &x) * &g.inverses()[i];
            pending.push((w.conjugate_by_generator(i), c));
        }
        words.push(w);
        mats.push(x);
    }
    finish(n, words, mats)
}

/// `F_p` counterpart of [`normal_closure_algebra_basis_q`]; returns the basis.
pub fn normal_closure_algebra_mod(g: &ModGens, t: &ModMatrix) -> Vec<ModMatrix> {
    let n = g.degree;
    let mut span = FpSpan::new(n * n, g.modulus);
    let mut mats: Vec<ModMatrix> = Vec::new();
    let mut pending = vec![g.identity(), t.clone()];
    while let Some(x) = pending.pop() {
        if mats.len() == n * n {
            break;
        }
        if !span.insert(x.data()) {
            continue;
        }
        for y in &mats {
            pending.push(&x * y);
            pending.push(y * &x);
        }
        pending.push(&x * &x);
        for (gi, ginv) in g.gens.iter().zip(&g.invs) {
            pending.push(&(gi * &x) * ginv);
        }
        mats.push(x);
    }
    mats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    #[test]
    fn spin_examples() {
        let id = GenSet::from_i64("id", &[vec![vec![1, 0], vec![0, 1]]]).unwrap();
        assert_eq!(algebra_basis_q(&id).unwrap().dimension(), 1);
        let sl2 = catalog("sl2", 0).unwrap();
        let b = algebra_basis_q(&sl2).unwrap();
        assert!(b.is_full());
        assert!(!b.gram_det.unwrap().is_zero());
        assert_eq!(algebra_basis_q(&catalog("rho_F", 7).unwrap()).unwrap().dimension(), 9);
    }

    #[test]
    fn spin_mod_examples() {
        let id = GenSet::from_i64("id", &[vec![vec![1, 0], vec![0, 1]]]).unwrap();
        assert_eq!(algebra_dim_mod(&id, 5).unwrap(), 1);
        let rho = catalog("rho_F", 7).unwrap();
        assert_eq!(algebra_dim_mod(&rho, 7).unwrap(), 9);
        assert!(algebra_dim_mod(&rho, 3).unwrap() < 9);
        assert_eq!(algebra_dim_mod(&rho, 4), Err(Error::CompositeModulus(4)));
    }

    #[test]
    fn words_reproduce_basis() {
        let rho = catalog("rho_Gamma", 7).unwrap();
        let b = algebra_basis_q(&rho).unwrap();
        for (w, m) in b.words.iter().zip(&b.matrices) {
            assert_eq!(&evaluate_word(&rho, w).unwrap(), m);
        }
    }

    #[test]
    fn normal_closure_examples() {
        let sl2 = catalog("sl2", 0).unwrap();
        let t = Word::generator(1);
        assert_eq!(normal_closure_algebra_basis_q(&sl2, &t).unwrap().dimension(), 4);
        let only_t = GenSet::from_i64("t", &[vec![vec![1, 1], vec![0, 1]]]).unwrap();
        assert_eq!(normal_closure_algebra_basis_q(&only_t, &Word::generator(0)).unwrap().dimension(), 2);
        let sl4 = catalog("sl", 4).unwrap();
        let b = normal_closure_algebra_basis_q(&sl4, &Word::generator(0)).unwrap();
        assert_eq!(b.dimension(), 16);
        for (w, m) in b.words.iter().zip(&b.matrices) {
            assert_eq!(&evaluate_word(&sl4, w).unwrap(), m);
        }
        assert_eq!(normal_closure_algebra_basis_q(&sl2, &Word::generator(0)).unwrap_err(), Error::NotTransvection);
        assert_eq!(normal_closure_algebra_mod(&sl4.reduce(5), &sl4.reduce(5).gens[0]).len(), 16);
    }
}
