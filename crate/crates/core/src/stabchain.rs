//! Exact orders of matrix groups over `Z/mZ`: breadth-first enumeration and
//! Schreier-Sims on the natural action on row vectors.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::group::ModGens;
use crate::modular::ModMatrix;

/// Outcome of a capped enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Capped {
    Order(u64),
    ExceedsCap,
}

fn key(g: &ModMatrix) -> Vec<u64> {
    g.data().to_vec()
}

/// Breadth-first closure of the generated subgroup, stopping above `cap`.
pub fn group_order_bfs(g: &ModGens, cap: u64) -> Capped {
    match enumerate(g, cap) {
        Some(elts) => Capped::Order(elts.len() as u64),
        None => Capped::ExceedsCap,
    }
}

/// All elements of the generated subgroup, or `None` above `cap`.
pub fn enumerate(g: &ModGens, cap: u64) -> Option<Vec<ModMatrix>> {
    enumerate_from(&g.gens, g.identity(), cap)
}

/// Elements of the subgroup generated by `gens` (a finite group, so positive
/// words suffice).
pub fn enumerate_from(gens: &[ModMatrix], identity: ModMatrix, cap: u64) -> Option<Vec<ModMatrix>> {
    let packed = identity.pack().is_some();
    let mut seen_packed: FxHashSet<u128> = FxHashSet::default();
    let mut seen_vec: FxHashSet<Vec<u64>> = FxHashSet::default();
    let mut insert = |m: &ModMatrix| -> bool {
        if packed {
            seen_packed.insert(m.pack().expect("packable"))
        } else {
            seen_vec.insert(key(m))
        }
    };
    insert(&identity);
    let mut elements = vec![identity];
    let mut head = 0;
    while head < elements.len() {
        let x = elements[head].clone();
        head += 1;
        for s in gens {
            let y = &x * s;
            if insert(&y) {
                if elements.len() as u64 >= cap {
                    return None;
                }
                elements.push(y);
            }
        }
    }
    Some(elements)
}

// ---------------------------------------------------------------------------
// Schreier-Sims

const ROOT: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Level {
    /// Base point is the standard basis vector `e_base`.
    base: usize,
    gens: Vec<ModMatrix>,
    invs: Vec<ModMatrix>,
    /// Schreier vector: point code to the label of the generator that
    /// reached it.
    orbit: FxHashMap<u64, u32>,
    points: Vec<u64>,
}

/// A base and strong generating set for a subgroup of `SL(n, Z/mZ)` acting
/// on `(Z/mZ)^n`, base `e_1, ..., e_n`.
#[derive(Clone, Debug)]
pub struct StabChain {
    n: usize,
    m: u64,
    levels: Vec<Level>,
    orbit_cap: u64,
}

/// Tunables for [`StabChain::build`].
#[derive(Clone, Copy, Debug)]
pub struct ChainOptions {
    pub seed: u64,
    pub orbit_cap: u64,
    /// Consecutive trivially-sifting random elements before the random phase
    /// ends.
    pub stall: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { seed: 1, orbit_cap: 20_000_000, stall: 40 }
    }
}

impl StabChain {
    fn encode(&self, v: &[u64]) -> u64 {
        v.iter().rev().fold(0u64, |acc, &x| acc * self.m + x)
    }

    fn decode(&self, mut code: u64, out: &mut [u64]) {
        for x in out.iter_mut() {
            *x = code % self.m;
            code /= self.m;
        }
    }

    fn image(&self, code: u64, g: &ModMatrix) -> u64 {
        let mut v = vec![0u64; self.n];
        let mut w = vec![0u64; self.n];
        self.decode(code, &mut v);
        g.act_on_row(&v, &mut w);
        self.encode(&w)
    }

    fn base_code(&self, i: usize) -> u64 {
        let mut v = vec![0u64; self.n];
        v[self.levels[i].base] = 1;
        self.encode(&v)
    }

    /// Image of the base point of level `i` under `g`: row `base` of `g`.
    fn base_image(&self, i: usize, g: &ModMatrix) -> u64 {
        let b = self.levels[i].base;
        let row: Vec<u64> = (0..self.n).map(|j| g.get(b, j)).collect();
        self.encode(&row)
    }

    fn new(n: usize, m: u64, orbit_cap: u64) -> Result<Self> {
        let points = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if points > u64::MAX as u128 / 2 {
            return Err(Error::OrbitTooLarge { points });
        }
        let mut chain = StabChain { n, m, levels: Vec::with_capacity(n), orbit_cap };
        for i in 0..n {
            chain.levels.push(Level {
                base: i,
                gens: Vec::new(),
                invs: Vec::new(),
                orbit: FxHashMap::default(),
                points: Vec::new(),
            });
            let root = chain.base_code(i);
            chain.levels[i].orbit.insert(root, ROOT);
            chain.levels[i].points.push(root);
        }
        Ok(chain)
    }

    /// Group order as the product of the basic orbit lengths.
    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.points.len()))
    }

    pub fn orbit_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.points.len()).collect()
    }

    /// Extends the orbit at level `i` after generators `from..` were added.
    fn extend_orbit(&mut self, i: usize, from: usize) -> Result<()> {
        let nold = self.levels[i].points.len();
        // new generators on old points, then all generators on new points
        let mut head = 0;
        while head < self.levels[i].points.len() {
            let x = self.levels[i].points[head];
            let start = if head < nold { from } else { 0 };
            for s in start..self.levels[i].gens.len() {
                let y = self.image(x, &self.levels[i].gens[s]);
                let level = &mut self.levels[i];
                if let std::collections::hash_map::Entry::Vacant(e) = level.orbit.entry(y) {
                    e.insert(s as u32);
                    level.points.push(y);
                    if level.points.len() as u64 > self.orbit_cap {
                        return Err(Error::OrbitTooLarge { points: level.points.len() as u128 });
                    }
                }
            }
            head += 1;
        }
        Ok(())
    }

    /// Adds `h` (fixing the base points of levels `< j`) to levels `0..=j`.
    fn add_generator(&mut self, h: ModMatrix, j: usize) -> Result<()> {
        let hinv = h.inverse()?;
        for i in 0..=j {
            let from = self.levels[i].gens.len();
            self.levels[i].gens.push(h.clone());
            self.levels[i].invs.push(hinv.clone());
            self.extend_orbit(i, from)?;
        }
        Ok(())
    }

    /// Multiplies `g` on the right by the inverse transversal element of
    /// `point` at level `i`, so that the result fixes the level's base point.
    fn strip(&self, i: usize, mut point: u64, g: &mut ModMatrix) {
        let level = &self.levels[i];
        loop {
            let label = level.orbit[&point];
            if label == ROOT {
                return;
            }
            let s = label as usize;
            *g = &*g * &level.invs[s];
            point = self.image(point, &level.invs[s]);
        }
    }

    /// Transversal element mapping the base point of level `i` to `point`.
    fn transversal(&self, i: usize, mut point: u64) -> ModMatrix {
        let level = &self.levels[i];
        let mut labels = Vec::new();
        loop {
            let label = level.orbit[&point];
            if label == ROOT {
                break;
            }
            labels.push(label as usize);
            point = self.image(point, &level.invs[label as usize]);
        }
        let mut u = ModMatrix::identity(self.n, self.m);
        for &s in labels.iter().rev() {
            u = &u * &level.gens[s];
        }
        u
    }

    /// Sifts from level `start`; returns the residue and the level where it
    /// stopped (`n` when it passed every level).
    fn sift_from(&self, mut g: ModMatrix, start: usize) -> (ModMatrix, usize) {
        for i in start..self.n {
            let x = self.base_image(i, &g);
            if !self.levels[i].orbit.contains_key(&x) {
                return (g, i);
            }
            self.strip(i, x, &mut g);
        }
        (g, self.n)
    }

    /// True iff `g` lies in the group described by the chain.
    pub fn contains(&self, g: &ModMatrix) -> bool {
        let (r, _) = self.sift_from(g.clone(), 0);
        r.is_identity()
    }

    /// Inserts `g` if it does not already sift; returns whether it was new.
    fn absorb(&mut self, g: ModMatrix, start: usize) -> Result<bool> {
        let (r, j) = self.sift_from(g, start);
        if r.is_identity() {
            return Ok(false);
        }
        let j = j.min(self.n - 1);
        self.add_generator(r, j)?;
        Ok(true)
    }

    /// Builds a complete chain for the group generated by `g`.
    ///
    /// A random phase (product replacement) runs until the order reaches
    /// `target` or `opts.stall` random elements in a row sift trivially. If the
    /// target was not reached, every Schreier generator is then sifted, so the
    /// returned chain is exact either way.
    pub fn build(g: &ModGens, target: Option<&BigUint>, opts: ChainOptions) -> Result<Self> {
        let mut chain = StabChain::new(g.degree, g.modulus, opts.orbit_cap)?;
        for s in &g.gens {
            if !s.is_identity() {
                chain.absorb(s.clone(), 0)?;
            }
        }
        if g.gens.iter().all(ModMatrix::is_identity) {
            return Ok(chain);
        }
        let reached = |c: &StabChain| target.is_some_and(|t| &c.order() >= t);
        if reached(&chain) {
            return Ok(chain);
        }
        let mut pr = ProductReplacement::new(&g.gens, opts.seed);
        let mut stall = 0;
        while stall < opts.stall {
            let x = pr.next();
            if chain.absorb(x, 0)? {
                stall = 0;
                if reached(&chain) {
                    return Ok(chain);
                }
            } else {
                stall += 1;
            }
        }
        chain.verify(target)?;
        Ok(chain)
    }

    /// Deterministic Schreier-Sims completion, deepest level first.
    fn verify(&mut self, target: Option<&BigUint>) -> Result<()> {
        let mut i = self.n;
        'levels: while i > 0 {
            i -= 1;
            let mut k = 0;
            while k < self.levels[i].points.len() {
                let q = self.levels[i].points[k];
                let uq = self.transversal(i, q);
                let ngens = self.levels[i].gens.len();
                for s in 0..ngens {
                    let y = self.image(q, &self.levels[i].gens[s]);
                    if self.levels[i].orbit[&y] == s as u32 && self.image(y, &self.levels[i].invs[s]) == q {
                        // tree edge: the Schreier generator is trivial
                        continue;
                    }
                    let mut sch = &uq * &self.levels[i].gens[s];
                    self.strip(i, y, &mut sch);
                    if i + 1 >= self.n {
                        if !sch.is_identity() {
                            return Err(Error::Invariant("stabilizer of every base point is not trivial".into()));
                        }
                        continue;
                    }
                    let (r, j) = self.sift_from(sch, i + 1);
                    if !r.is_identity() {
                        let j = j.min(self.n - 1);
                        self.add_generator(r, j)?;
                        if target.is_some_and(|t| &self.order() >= t) {
                            return Ok(());
                        }
                        i = j + 1;
                        continue 'levels;
                    }
                }
                k += 1;
            }
        }
        Ok(())
    }
}

/// Product replacement random element generator.
struct ProductReplacement {
    state: Vec<ModMatrix>,
    acc: ModMatrix,
    rng: ChaCha8Rng,
}

impl ProductReplacement {
    fn new(gens: &[ModMatrix], seed: u64) -> Self {
        let mut state: Vec<ModMatrix> = gens.to_vec();
        while state.len() < 10 {
            let i = state.len() % gens.len();
            state.push(gens[i].clone());
        }
        let acc = gens[0].clone();
        let mut pr = ProductReplacement { state, acc, rng: ChaCha8Rng::seed_from_u64(seed) };
        for _ in 0..50 {
            pr.next();
        }
        pr
    }

    fn next(&mut self) -> ModMatrix {
        let k = self.state.len();
        let i = self.rng.gen_range(0..k);
        let mut j = self.rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let prod = if self.rng.gen_bool(0.5) { &self.state[i] * &self.state[j] } else { &self.state[j] * &self.state[i] };
        self.state[i] = prod;
        self.acc = &self.acc * &self.state[i];
        self.acc.clone()
    }
}

/// Exact order of the group generated by `g` via a stabilizer chain.
pub fn group_order_stabilizer_chain(g: &ModGens, target: Option<&BigUint>, opts: ChainOptions) -> Result<BigUint> {
    Ok(StabChain::build(g, target, opts)?.order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;
    use crate::modular::sl_order;

    #[test]
    fn bfs_examples() {
        let sl2 = catalog("sl2", 0).unwrap();
        assert_eq!(group_order_bfs(&sl2.reduce(2), 100), Capped::Order(6));
        assert_eq!(group_order_bfs(&sl2.reduce(2), 1), Capped::ExceedsCap);
        for (n, m) in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (3, 4)] {
            let g = catalog("sl", n as i64).unwrap();
            let expect = sl_order(n, m);
            assert_eq!(group_order_bfs(&g.reduce(m), 1_000_000), Capped::Order(expect.try_into().unwrap()), "{n} {m}");
        }
    }

    #[test]
    fn chain_matches_bfs() {
        for (name, k, m) in [("rho_F", 7, 3), ("rho_F", 7, 19), ("rho_F", 1, 4), ("h1", 2, 8), ("sl2", 0, 9)] {
            let g = catalog(name, k).unwrap().reduce(m);
            let Capped::Order(bfs) = group_order_bfs(&g, 5_000_000) else { panic!() };
            let chain = group_order_stabilizer_chain(&g, None, ChainOptions::default()).unwrap();
            assert_eq!(chain, BigUint::from(bfs), "{name}({k}) mod {m}");
        }
    }

    #[test]
    fn chain_reaches_full_group() {
        let g = catalog("sl", 3).unwrap().reduce(7);
        let t = sl_order(3, 7);
        assert_eq!(group_order_stabilizer_chain(&g, Some(&t), ChainOptions::default()).unwrap(), t);
        assert_eq!(group_order_stabilizer_chain(&g, None, ChainOptions::default()).unwrap(), t);
    }
}
