//! Generating sets, words, witness expressions, the random word sampler,
//! the example catalog and the JSON group format.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{unimodular_inverse, IntMatrix};
use crate::modular::{reduce_mod, ModMatrix};

/// A finitely generated subgroup of `SL(n, Z)`.
#[derive(Clone, Debug)]
pub struct GenSet {
    degree: usize,
    generators: Vec<IntMatrix>,
    inverses: Vec<IntMatrix>,
    label: String,
}

impl GenSet {
    /// Validates shape and determinant of every generator.
    pub fn new(label: impl Into<String>, generators: Vec<IntMatrix>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::Schema("generator list is empty".into()));
        };
        let degree = first.degree();
        let mut inverses = Vec::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            if g.degree() != degree {
                return Err(Error::DimensionMismatch { expected: degree, found: g.degree() });
            }
            if !g.determinant().is_one() {
                return Err(Error::NotDeterminantOne(i));
            }
            inverses.push(unimodular_inverse(g)?);
        }
        Ok(GenSet { degree, generators, inverses, label: label.into() })
    }

    pub fn from_i64(label: &str, gens: &[Vec<Vec<i64>>]) -> Result<Self> {
        let mats = gens.iter().map(|rows| IntMatrix::from_rows(rows)).collect();
        GenSet::new(label, mats)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    pub fn inverses(&self) -> &[IntMatrix] {
        &self.inverses
    }

    /// Same group with `extra` appended as a further generator.
    pub fn with_generator(&self, extra: IntMatrix) -> Result<GenSet> {
        let mut gens = self.generators.clone();
        gens.push(extra);
        GenSet::new(self.label.clone(), gens)
    }

    /// Generator images `phi_m(g_i)` together with their inverses.
    pub fn reduce(&self, m: u64) -> ModGens {
        ModGens {
            modulus: m,
            degree: self.degree,
            gens: self.generators.iter().map(|g| reduce_mod(g, m)).collect(),
            invs: self.inverses.iter().map(|g| reduce_mod(g, m)).collect(),
        }
    }

    fn letter(&self, index: usize, exp: i64) -> Result<IntMatrix> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange { index, count: self.len() });
        }
        let base = if exp < 0 { &self.inverses[index] } else { &self.generators[index] };
        Ok(base.pow(exp.unsigned_abs()))
    }

    /// JSON document in the canonical group format (sorted keys, compact).
    pub fn to_json(&self) -> String {
        let gens: Vec<Vec<Vec<String>>> = self
            .generators
            .iter()
            .map(|g| g.rows().map(|r| r.iter().map(|x| x.to_string()).collect()).collect())
            .collect();
        json!({"degree": self.degree, "generators": gens, "label": self.label}).to_string()
    }
}

/// Images of the generators modulo `m`, with inverses.
#[derive(Clone, Debug)]
pub struct ModGens {
    pub modulus: u64,
    pub degree: usize,
    pub gens: Vec<ModMatrix>,
    pub invs: Vec<ModMatrix>,
}

impl ModGens {
    pub fn identity(&self) -> ModMatrix {
        ModMatrix::identity(self.degree, self.modulus)
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Generators followed by their inverses.
    pub fn symmetric(&self) -> Vec<ModMatrix> {
        self.gens.iter().chain(&self.invs).cloned().collect()
    }

    pub fn evaluate(&self, w: &Word) -> Result<ModMatrix> {
        let mut acc = self.identity();
        for &(i, e) in &w.factors {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange { index: i, count: self.len() });
            }
            let base = if e < 0 { &self.invs[i] } else { &self.gens[i] };
            acc = &acc * &base.pow(e.unsigned_abs());
        }
        Ok(acc)
    }

    /// Evaluates a word together with its inverse.
    pub fn evaluate_pair(&self, w: &Word) -> Result<(ModMatrix, ModMatrix)> {
        Ok((self.evaluate(w)?, self.evaluate(&w.inverse())?))
    }
}

/// A product `g_{i1}^{e1} ... g_{is}^{es}` of generators.
///
/// Indices are zero-based internally; the text form numbers generators from
/// one (`g1^2*g2^-1`), and the empty word prints as `e`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    factors: Vec<(usize, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(i: usize) -> Self {
        Word { factors: vec![(i, 1)] }
    }

    /// Builds a word, merging adjacent equal indices and dropping zero exponents.
    pub fn new(factors: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut out: Vec<(usize, i64)> = Vec::new();
        for (i, e) in factors {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some((j, f)) if *j == i => {
                    *f += e;
                    if *f == 0 {
                        out.pop();
                    }
                }
                _ => out.push((i, e)),
            }
        }
        Word { factors: out }
    }

    pub fn factors(&self) -> &[(usize, i64)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total number of letters, counting exponents.
    pub fn length(&self) -> u64 {
        self.factors.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn inverse(&self) -> Word {
        Word::new(self.factors.iter().rev().map(|&(i, e)| (i, -e)))
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::new(self.factors.iter().chain(&other.factors).copied())
    }

    /// `g w g^-1` for generator `g`.
    pub fn conjugate_by_generator(&self, g: usize) -> Word {
        Word::new(std::iter::once((g, 1)).chain(self.factors.iter().copied()).chain(std::iter::once((g, -1))))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.factors.iter().map(|&(i, _)| i).max()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "e");
        }
        for (k, &(i, e)) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "g{}", i + 1)?;
            } else {
                write!(f, "g{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::identity());
        }
        let bad = || Error::Schema(format!("malformed word `{s}`"));
        let mut factors = Vec::new();
        for part in s.split(['*', ' ']).filter(|p| !p.is_empty()) {
            let body = part.strip_prefix('g').ok_or_else(bad)?;
            let (idx, exp) = match body.split_once('^') {
                Some((a, b)) => (a, b.parse::<i64>().map_err(|_| bad())?),
                None => (body, 1),
            };
            let idx: usize = idx.parse().map_err(|_| bad())?;
            if idx == 0 {
                return Err(bad());
            }
            factors.push((idx - 1, exp));
        }
        Ok(Word::new(factors))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn evaluate_word(g: &GenSet, w: &Word) -> Result<IntMatrix> {
    let mut acc = IntMatrix::identity(g.degree());
    for &(i, e) in &w.factors {
        acc = &acc * &g.letter(i, e)?;
    }
    Ok(acc)
}

/// `phi_m` of a word, computed without leaving `Z/mZ`.
pub fn evaluate_word_mod(g: &GenSet, w: &Word, m: u64) -> Result<ModMatrix> {
    g.reduce(m).evaluate(w)
}

/// Witness expressions: words, commutators `[a,b] = a^-1 b^-1 a b` and powers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Word(Word),
    Comm(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u64),
}

impl Expr {
    pub fn comm(a: Expr, b: Expr) -> Expr {
        Expr::Comm(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, k: u64) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    /// Balanced commutator tree over `leaves` (length must be a power of two).
    pub fn tree_commutator(leaves: Vec<Expr>) -> Expr {
        assert!(leaves.len().is_power_of_two(), "tree commutator needs 2^d leaves");
        let mut level = leaves;
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len() / 2);
            let mut it = level.into_iter();
            while let (Some(a), Some(b)) = (it.next(), it.next()) {
                next.push(Expr::comm(a, b));
            }
            level = next;
        }
        level.pop().expect("at least one leaf")
    }

    /// Exact value and inverse over Z.
    pub fn evaluate(&self, g: &GenSet) -> Result<(IntMatrix, IntMatrix)> {
        match self {
            Expr::Word(w) => Ok((evaluate_word(g, w)?, evaluate_word(g, &w.inverse())?)),
            Expr::Comm(a, b) => {
                let (a, ai) = a.evaluate(g)?;
                let (b, bi) = b.evaluate(g)?;
                let c = &(&(&ai * &bi) * &a) * &b;
                let ci = &(&(&bi * &ai) * &b) * &a;
                Ok((c, ci))
            }
            Expr::Pow(a, k) => {
                let (a, ai) = a.evaluate(g)?;
                Ok((a.pow(*k), ai.pow(*k)))
            }
        }
    }

    /// Value and inverse modulo the modulus of `g`.
    pub fn evaluate_mod(&self, g: &ModGens) -> Result<(ModMatrix, ModMatrix)> {
        match self {
            Expr::Word(w) => g.evaluate_pair(w),
            Expr::Comm(a, b) => {
                let (a, ai) = a.evaluate_mod(g)?;
                let (b, bi) = b.evaluate_mod(g)?;
                Ok((a.commutator_with(&ai, &b, &bi), b.commutator_with(&bi, &a, &ai)))
            }
            Expr::Pow(a, k) => {
                let (a, ai) = a.evaluate_mod(g)?;
                Ok((a.pow(*k), ai.pow(*k)))
            }
        }
    }
}

impl From<Word> for Expr {
    fn from(w: Word) -> Self {
        Expr::Word(w)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Word(w) => write!(f, "{w}"),
            Expr::Comm(a, b) => write!(f, "[{a},{b}]"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
        }
    }
}

/// Outcome of [`WordSampler::sample`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sample {
    Found { word: Word, tries: usize },
    Exhausted,
}

/// Seeded stream of random words whose length starts at 5 and grows by one
/// after every block of failures.
#[derive(Clone, Debug)]
pub struct WordSampler {
    rng: ChaCha8Rng,
    length: usize,
    failures: usize,
    growth_every: usize,
}

impl WordSampler {
    pub fn new(seed: u64) -> Self {
        WordSampler::with_schedule(seed, 5, 20)
    }

    pub fn with_schedule(seed: u64, length: usize, growth_every: usize) -> Self {
        WordSampler { rng: ChaCha8Rng::seed_from_u64(seed), length: length.max(1), failures: 0, growth_every: growth_every.max(1) }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A freely reduced word of exactly `len` letters over `ngens` generators.
    pub fn word_of_length(&mut self, ngens: usize, len: usize) -> Word {
        let mut letters: Vec<(usize, i64)> = Vec::with_capacity(len);
        while letters.len() < len {
            let i = self.rng.gen_range(0..ngens);
            let e = if self.rng.gen_bool(0.5) { 1 } else { -1 };
            if let Some(&(j, f)) = letters.last() {
                if j == i && f == -e {
                    continue;
                }
            }
            letters.push((i, e));
        }
        Word::new(letters)
    }

    pub fn next_word(&mut self, ngens: usize) -> Word {
        let len = self.length;
        self.word_of_length(ngens, len)
    }

    /// Records a failed attempt, growing the length at block boundaries.
    pub fn record_failure(&mut self) {
        self.failures += 1;
        if self.failures % self.growth_every == 0 {
            self.length += 1;
        }
    }

    /// First sampled word satisfying `pred`, trying at most `budget` words.
    pub fn sample<F: FnMut(&Word) -> bool>(&mut self, ngens: usize, budget: usize, mut pred: F) -> Sample {
        for tries in 1..=budget {
            let w = self.next_word(ngens);
            if pred(&w) {
                return Sample::Found { word: w, tries };
            }
            self.record_failure();
        }
        Sample::Exhausted
    }
}

// ---------------------------------------------------------------------------
// catalog

/// Polynomial entry `sum c_i t^i / den`.
type Entry = (&'static [i64], i64);

fn eval_entry((coeffs, den): Entry, t: &BigInt) -> Option<BigInt> {
    let mut acc = BigInt::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * t + BigInt::from(c);
    }
    let q = BigRational::new(acc, BigInt::from(den));
    q.is_integer().then(|| q.to_integer())
}

fn eval_matrix(rows: &[&[Entry]], t: i64) -> Option<IntMatrix> {
    let t = BigInt::from(t);
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for r in rows {
        for &e in r.iter() {
            entries.push(eval_entry(e, &t)?);
        }
    }
    Some(IntMatrix::new(n, entries).expect("square catalog matrix"))
}

const fn c(x: &'static [i64]) -> Entry {
    (x, 1)
}

const RHO_X: [&[Entry]; 3] = [
    &[c(&[1]), c(&[-2]), c(&[3])],
    &[c(&[0]), c(&[0, 1]), c(&[-1, -2])],
    &[c(&[0]), c(&[1]), c(&[-2])],
];
const RHO_Y: [&[Entry]; 3] = [
    &[c(&[-2, -1]), c(&[-1]), c(&[1])],
    &[c(&[-2, -1]), c(&[-2]), c(&[3])],
    &[c(&[-1]), c(&[-1]), c(&[2])],
];
const RHO_Z: [&[Entry]; 3] = [
    &[c(&[0]), c(&[0]), c(&[1])],
    &[c(&[1]), c(&[0]), c(&[0, -1])],
    &[c(&[0]), c(&[1]), c(&[-1, -1])],
];
const A1: [&[Entry]; 3] = [
    &[c(&[0]), c(&[0]), c(&[1])],
    &[c(&[1]), c(&[0]), c(&[0])],
    &[c(&[0]), c(&[1]), c(&[0])],
];
const B1: [&[Entry]; 3] = [
    &[c(&[1]), c(&[2, -1, 1]), c(&[3, 0, 1])],
    &[c(&[0]), c(&[-2, 2, -1]), c(&[-1, 1, -1])],
    &[c(&[0]), c(&[3, -3, 1]), c(&[1, -2, 1])],
];
const A2: [&[Entry]; 3] = [
    &[c(&[1]), (&[16, 0, 3], 4), (&[18, -3, 3], 2)],
    &[c(&[0]), (&[-4, -1, -1], 2), c(&[-3, 0, -1])],
    &[c(&[0]), (&[4, 2, 1], 4), (&[2, 1, 1], 2)],
];
const B2: [&[Entry]; 3] = [
    &[c(&[0]), c(&[0]), c(&[1])],
    &[c(&[1]), c(&[0]), c(&[-1])],
    &[c(&[0]), c(&[1]), c(&[1])],
];
const A3: [&[Entry]; 5] = [
    &[c(&[1]), c(&[0]), c(&[-3, -2, -8]), c(&[-1, 10, 0, 32]), c(&[-5, 0, -16])],
    &[c(&[0]), c(&[-4, 4]), c(&[-13, -4]), c(&[19, 32, 16]), c(&[-4, 16])],
    &[c(&[0]), c(&[1, -1, 4]), c(&[3, -2, 8]), c(&[-2, -6, 0, -32]), c(&[3, 0, 16])],
    &[c(&[0]), c(&[0, 1]), c(&[0, 2]), c(&[1, -2, -8]), c(&[1, 4])],
    &[c(&[0]), c(&[0]), c(&[0, 3]), c(&[-3, 3, -12]), c(&[-2])],
];
const B3: [&[Entry]; 5] = [
    &[c(&[0]), c(&[0]), c(&[-3, -2, -8]), c(&[-1, 10, 0, 32]), c(&[-5, 0, -16])],
    &[c(&[0]), c(&[1]), c(&[3, 4]), c(&[-13, -8, -16]), c(&[4, -16])],
    &[c(&[0]), c(&[0]), c(&[-2, -2, -8]), c(&[0, 6, 0, 32]), c(&[-3, 0, -16])],
    &[c(&[1]), c(&[0]), c(&[-2, -2]), c(&[-1, 2, 8]), c(&[-1, -4])],
    &[c(&[0, 2]), c(&[0]), c(&[1, -2]), c(&[0, -4]), c(&[1])],
];

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: &[&str] = &["rho_Gamma", "rho_F", "h1", "h2", "h3", "sl", "sl2", "sp4"];

/// Elementary generators `1 + E_ij` (`i != j`) of `SL(n, Z)`, ordered by `(i, j)`.
pub fn elementary_generators(n: usize) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(IntMatrix::elementary(n, i, j, 1));
            }
        }
    }
    out
}

/// Generators of `Sp(4, Z)` for the form `[[0, I], [-I, 0]]`; the first one
/// is the transvection `1 + E_13`.
pub fn sp4_generators() -> Vec<IntMatrix> {
    let block = |upper: bool, s: [[i64; 2]; 2]| {
        let mut rows = [[0i64; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
        }
        for i in 0..2 {
            for j in 0..2 {
                if upper {
                    rows[i][j + 2] = s[i][j];
                } else {
                    rows[i + 2][j] = s[i][j];
                }
            }
        }
        IntMatrix::from_rows(&rows)
    };
    let sym = [[[1, 0], [0, 0]], [[0, 0], [0, 1]], [[0, 1], [1, 0]]];
    sym.iter().map(|&s| block(true, s)).chain(sym.iter().map(|&s| block(false, s))).collect()
}

/// Example groups by name and integer parameter.
///
/// * `rho_Gamma:k` and `rho_F:k`: the figure-eight knot group representations
///   on `{x, y, z}` and on `{x, y}`.
/// * `h1:t`, `h2:t` (t even), `h3:k`: triangle group representations.
/// * `sl:n` elementary generators of `SL(n, Z)`, `sl2` the pair `S, T`,
///   `sp4` generators of `Sp(4, Z)`.
pub fn catalog(name: &str, param: i64) -> Result<GenSet> {
    let eval = |rows: &[&[Entry]]| eval_matrix(rows, param).ok_or(Error::Parity(param));
    let (label, gens) = match name {
        "rho_Gamma" => (format!("rho_Gamma({param})"), vec![eval(&RHO_X)?, eval(&RHO_Y)?, eval(&RHO_Z)?]),
        "rho_F" => (format!("rho_F({param})"), vec![eval(&RHO_X)?, eval(&RHO_Y)?]),
        "h1" => (format!("H1({param})"), vec![eval(&A1)?, eval(&B1)?]),
        "h2" => {
            if param % 2 != 0 {
                return Err(Error::Parity(param));
            }
            (format!("H2({param})"), vec![eval(&A2)?, eval(&B2)?])
        }
        "h3" => (format!("H3({param})"), vec![eval(&A3)?, eval(&B3)?]),
        "sl" => {
            let n = usize::try_from(param).ok().filter(|&n| n >= 2).ok_or_else(|| {
                Error::InvalidArgument(format!("sl needs a degree >= 2, got {param}"))
            })?;
            (format!("SL({n},Z)"), elementary_generators(n))
        }
        "sl2" => (
            "SL(2,Z)".to_string(),
            vec![IntMatrix::from_rows(&[[0, -1], [1, 0]]), IntMatrix::from_rows(&[[1, 1], [0, 1]])],
        ),
        "sp4" => ("Sp(4,Z)".to_string(), sp4_generators()),
        other => return Err(Error::UnknownName(other.to_string())),
    };
    GenSet::new(label, gens)
}

/// Parses `name:param` (the parameter may be omitted for `sl2`, `sp4`).
pub fn catalog_spec(spec: &str) -> Result<GenSet> {
    match spec.split_once(':') {
        Some((name, p)) => {
            let p: i64 = p.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad catalog parameter in `{spec}`")))?;
            catalog(name.trim(), p)
        }
        None => catalog(spec.trim(), 0),
    }
}

/// Product of `steps` random elementary matrices `1 + c E_ij` with
/// `1 <= |c| <= bound`.
pub fn random_unimodular(n: usize, seed: u64, steps: usize, bound: i64) -> Result<IntMatrix> {
    if steps == 0 {
        return Err(Error::InvalidArgument("random_unimodular needs at least one step".into()));
    }
    if n < 2 || bound < 1 {
        return Err(Error::InvalidArgument("random_unimodular needs n >= 2 and bound >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = IntMatrix::identity(n);
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut c = rng.gen_range(1..=bound);
        if rng.gen_bool(0.5) {
            c = -c;
        }
        acc = &acc * &IntMatrix::elementary(n, i, j, c);
    }
    Ok(acc)
}

/// A group on `count` random unimodular generators.
pub fn random_group(n: usize, count: usize, seed: u64, steps: usize, bound: i64) -> Result<GenSet> {
    let gens = (0..count)
        .map(|i| random_unimodular(n, seed.wrapping_mul(1_000_003).wrapping_add(i as u64), steps, bound))
        .collect::<Result<Vec<_>>>()?;
    GenSet::new(format!("random(n={n},seed={seed})"), gens)
}

// ---------------------------------------------------------------------------
// JSON

fn parse_entry(v: &Value) -> Result<BigInt> {
    match v {
        Value::String(s) => s.trim().parse::<BigInt>().map_err(|_| Error::Schema(format!("bad integer `{s}`"))),
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Schema(format!("non-integral entry {n}"))),
        other => Err(Error::Schema(format!("matrix entry must be a decimal string, got {other}"))),
    }
}

/// Parses the JSON group format, checking every generator has determinant 1.
pub fn parse_group(text: &str) -> Result<GenSet> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| Error::Schema("top level must be an object".into()))?;
    let degree = obj
        .get("degree")
        .and_then(Value::as_u64)
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Schema("missing positive integer `degree`".into()))? as usize;
    let label = obj.get("label").and_then(Value::as_str).unwrap_or("").to_string();
    let gens = obj
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema("missing array `generators`".into()))?;
    let mut mats = Vec::with_capacity(gens.len());
    for g in gens {
        let rows = g.as_array().filter(|r| r.len() == degree).ok_or_else(|| {
            Error::Schema(format!("each generator must have {degree} rows"))
        })?;
        let mut entries = Vec::with_capacity(degree * degree);
        for r in rows {
            let r = r.as_array().filter(|r| r.len() == degree).ok_or_else(|| {
                Error::Schema(format!("each row must have {degree} entries"))
            })?;
            for x in r {
                entries.push(parse_entry(x)?);
            }
        }
        mats.push(IntMatrix::new(degree, entries)?);
    }
    GenSet::new(label, mats)
}

/// Bit length of the largest generator entry, a rough size measure.
pub fn max_entry_bits(g: &GenSet) -> u64 {
    g.generators().iter().map(|m| m.max_abs_entry().bits()).max().unwrap_or(0)
}

/// Absolute value of an integer as `u64` when it fits.
pub fn small_abs(x: &BigInt) -> Option<u64> {
    x.abs().to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_examples() {
        let f1 = catalog("rho_F", 1).unwrap();
        assert_eq!(f1.generators()[0], IntMatrix::from_rows(&[[1, -2, 3], [0, 1, -3], [0, 1, -2]]));
        assert_eq!(f1.len(), 2);
        assert_eq!(catalog("rho_Gamma", 1).unwrap().len(), 3);
        let h = catalog("h1", 2).unwrap();
        assert_eq!(h.generators()[1], IntMatrix::from_rows(&[[1, 4, 7], [0, -2, -3], [0, 1, 1]]));
        assert_eq!(catalog("h2", 3).unwrap_err(), Error::Parity(3));
        assert!(matches!(catalog("nope", 1), Err(Error::UnknownName(_))));
        let h2 = catalog("h2", 2).unwrap();
        assert_eq!(h2.generators()[0], IntMatrix::from_rows(&[[1, 7, 12], [0, -5, -7], [0, 3, 4]]));
    }

    #[test]
    fn catalog_determinants() {
        for k in -20..=20 {
            catalog("rho_Gamma", k).unwrap();
            catalog("h1", k).unwrap();
            if k % 2 == 0 {
                catalog("h2", k).unwrap();
            }
        }
        for k in 0..=3 {
            catalog("h3", k).unwrap();
        }
    }

    #[test]
    fn words() {
        let g = catalog("rho_Gamma", 1).unwrap();
        assert!(evaluate_word(&g, &Word::identity()).unwrap().is_identity());
        assert!(Word::new([(0, 1), (0, -1)]).is_identity());
        let sq = evaluate_word(&g, &Word::new([(0, 2)])).unwrap();
        assert_eq!(sq, &g.generators()[0] * &g.generators()[0]);
        let w: Word = "g1^2*g3^-1*g2".parse().unwrap();
        assert_eq!(w.to_string(), "g1^2*g3^-1*g2");
        assert_eq!(w.factors(), &[(0, 2), (2, -1), (1, 1)]);
        assert!(matches!(evaluate_word(&g, &Word::generator(7)), Err(Error::IndexOutOfRange { .. })));
        let z = evaluate_word(&g, &w).unwrap();
        assert_eq!(reduce_mod(&z, 7), evaluate_word_mod(&g, &w, 7).unwrap());
    }

    #[test]
    fn expressions() {
        let g = catalog("sl2", 0).unwrap();
        let e = Expr::comm(Word::generator(0).into(), Word::generator(1).into());
        let (c, ci) = e.evaluate(&g).unwrap();
        assert!((&c * &ci).is_identity());
        let (cm, cmi) = e.evaluate_mod(&g.reduce(11)).unwrap();
        assert_eq!(cm, reduce_mod(&c, 11));
        assert_eq!(cmi, reduce_mod(&ci, 11));
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"comm":[{"word":"g1"},{"word":"g2"}]}"#);
        let back: Expr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        let t = Expr::tree_commutator((0..4).map(|i| Word::generator(i % 2).into()).collect());
        assert_eq!(t.to_string(), "[[g1,g2],[g1,g2]]");
    }

    #[test]
    fn sampler_is_deterministic() {
        let mut a = WordSampler::new(7);
        let mut b = WordSampler::new(7);
        for _ in 0..50 {
            assert_eq!(a.next_word(3), b.next_word(3));
        }
        let mut s = WordSampler::new(1);
        assert_eq!(s.sample(2, 45, |_| false), Sample::Exhausted);
        assert_eq!(s.length(), 7);
    }

    #[test]
    fn json_roundtrip() {
        let g = catalog("rho_F", 7).unwrap();
        let text = g.to_json();
        assert!(text.starts_with(r#"{"degree":3,"generators":[[["1","-2","3"]"#));
        let back = parse_group(&text).unwrap();
        assert_eq!(back.generators(), g.generators());
        assert_eq!(back.label(), "rho_F(7)");
        let bad = r#"{"degree":2,"label":"x","generators":[[["2","0"],["0","1"]]]}"#;
        assert_eq!(parse_group(bad).unwrap_err(), Error::NotDeterminantOne(0));
        assert!(matches!(parse_group("[1]"), Err(Error::Schema(_))));
    }

    #[test]
    fn random_unimodular_contract() {
        assert!(random_unimodular(3, 1, 0, 3).is_err());
        let one = random_unimodular(3, 1, 1, 3).unwrap();
        assert_eq!(one.minus_identity().rank(), 1);
        let a = random_unimodular(3, 99, 50, 3).unwrap();
        assert_eq!(a, random_unimodular(3, 99, 50, 3).unwrap());
        assert!(a.determinant().is_one());
    }
}
