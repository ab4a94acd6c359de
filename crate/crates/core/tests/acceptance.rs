//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines show up in plain `cargo test` output.

use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zdense::congruence::{decompose_modulus, image_order_mod, predicted_order, prime_power_ladder};
use zdense::density::{primes_for_dense, primes_for_dense_transvection};
use zdense::group::{catalog, random_group, Expr, ModGens, Word, WordSampler};
use zdense::modular::{inv_mod, sl_order, ModMatrix};
use zdense::params::Params;
use zdense::recognition::{exact_order, is_surjective_mod_m, is_surjective_mod_p, Verdict};

struct Outcome {
    pass: bool,
    detail: String,
    /// A failing part that no implementation can satisfy; reported but not
    /// counted toward the exit status.
    known_red: Option<String>,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into(), known_red: None }
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn table_rows(rows: &[(&str, i64, &[u64])]) -> Outcome {
    let params = Params::default();
    let mut bad = Vec::new();
    let mut slowest = 0.0f64;
    for &(name, t, want) in rows {
        let start = Instant::now();
        let got = catalog(name, t).and_then(|g| primes_for_dense(&g, &params)).map(|r| (r.pi_tilde, r.undetermined));
        slowest = slowest.max(start.elapsed().as_secs_f64());
        match got {
            Ok((pt, und)) if pt == want && und.is_empty() => {}
            other => bad.push(format!("{name}:{t} -> {other:?}")),
        }
    }
    ok(bad.is_empty(), format!("{} rows, slowest {slowest:.1}s{}", rows.len(), if bad.is_empty() { String::new() } else { format!("; mismatches {bad:?}") }))
}

fn criterion_1() -> Outcome {
    let mut rows: Vec<(&str, i64, &[u64])> = Vec::new();
    let expected: [(i64, &[u64]); 6] =
        [(1, &[2, 3]), (6, &[2, 31, 43]), (7, &[3, 5, 19]), (10, &[2, 3, 11, 37]), (15, &[229, 241]), (20, &[409, 421])];
    for (k, want) in expected {
        rows.push(("rho_F", k, want));
        rows.push(("rho_Gamma", k, want));
    }
    table_rows(&rows)
}

fn criterion_2() -> Outcome {
    let params = Params::default();
    let mut bad = Vec::new();
    for name in ["rho_F", "rho_Gamma"] {
        for k in [1, 6, 10] {
            let g = catalog(name, k).unwrap();
            let m2 = is_surjective_mod_m(&g, 2, &params);
            let m4 = is_surjective_mod_m(&g, 4, &params);
            let r = primes_for_dense(&g, &params).unwrap();
            if m2 != Ok(true) || m4 != Ok(false) || r.pi.contains(&2) || !r.pi_tilde.contains(&2) {
                bad.push(format!("{name}:{k} mod2={m2:?} mod4={m4:?} pi={:?}", r.pi));
            }
        }
    }
    ok(bad.is_empty(), if bad.is_empty() { "6 groups onto SL(3,2), not onto SL(3,Z/4); 2 in pi_tilde only".into() } else { format!("{bad:?}") })
}

fn criterion_3() -> Outcome {
    table_rows(&[
        ("h1", 1, &[2, 3, 5, 19]),
        ("h1", 2, &[2]),
        ("h1", 5, &[2, 7, 19, 31]),
        ("h1", 9, &[2, 67]),
        ("h1", 10, &[2, 3, 7]),
        ("h1", 12, &[2, 7, 31]),
        ("h1", 50, &[2, 601]),
        ("h1", 100, &[2, 3, 19, 43]),
        ("h2", 2, &[2, 13]),
        ("h2", 10, &[2, 5, 109]),
        ("h2", 12, &[2, 3, 17]),
        ("h2", 50, &[2, 5, 13, 193]),
        ("h3", 0, &[2, 7, 19]),
        ("h3", 1, &[2, 67]),
        ("h3", 2, &[2, 13, 211]),
        ("h3", 3, &[2, 7, 11, 41]),
    ])
}

fn criterion_4() -> Outcome {
    let params = Params::default();
    let mut bad = Vec::new();
    for t in [1, 5, 9] {
        let g = catalog("h1", t).unwrap();
        let (m2, m4) = (is_surjective_mod_m(&g, 2, &params), is_surjective_mod_m(&g, 4, &params));
        if m2 != Ok(true) || m4 != Ok(false) {
            bad.push(format!("h1:{t} mod2={m2:?} mod4={m4:?}"));
        }
    }
    ok(bad.is_empty(), if bad.is_empty() { "h1:1, h1:5, h1:9".into() } else { format!("{bad:?}") })
}

fn criterion_5() -> Outcome {
    let params = Params::default();
    let g = catalog("rho_F", 7).unwrap();
    let order = |m| image_order_mod(&g, m, &params).unwrap().order;
    let (o3, o5, o19, o15) = (order(3), order(5), order(19), order(15));
    let ladder = prime_power_ladder(&g, 3, 4, &params).unwrap();
    let ladder_ok = ladder.orders == [9u64, 243, 6561, 531441].map(big) && ladder.exponents == [3, 3, 4] && ladder.is_monotone();
    let attainable = o3 == big(9) && o19 == big(3420) && o15 == big(1800) && ladder_ok;
    let detail = format!("mod 3 = {o3}, mod 19 = {o19}, mod 15 = {o15}, ladder at 3 = {:?} exponents {:?}", ladder.orders, ladder.exponents);
    let known_red = (o5 != big(1800)).then(|| {
        format!(
            "mod 5 = {o5}, not 1800: |SL(3,5)| = {} is not divisible by 9, so no subgroup has order 1800; 1800 is the order mod 15",
            sl_order(3, 5)
        )
    });
    Outcome { pass: attainable && known_red.is_none(), detail, known_red: if attainable { known_red } else { None } }
}

fn criterion_6() -> Outcome {
    let g = catalog("h1", 2).unwrap();
    let o = image_order_mod(&g, 8, &Params::default()).unwrap().order;
    let index = sl_order(3, 8) / &o;
    ok(o == big(12288) && index == big(128 * 7), format!("|image mod 8| = {o}, index {index}"))
}

fn criterion_7() -> Outcome {
    let params = Params::default();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut check = |name: &str, t: i64, k: u64, level: u64| {
        let g = catalog(name, t).unwrap();
        let split = decompose_modulus(k, level, 3).unwrap();
        let ab = split.a * split.b;
        let base = if ab == 1 { big(1) } else { image_order_mod(&g, ab, &params).unwrap().order };
        let predicted = predicted_order(&g, &split, &base);
        let exact = image_order_mod(&g, k, &params).unwrap().order;
        pass &= predicted == exact;
        lines.push(format!("{name}:{t} k={k} predicted {predicted} exact {exact}"));
    };
    check("h1", 2, 24, 8);
    check("sl", 3, 6, 1);
    check("sl", 3, 12, 1);
    pass &= image_order_mod(&catalog("h1", 2).unwrap(), 24, &params).unwrap().order == big(12288 * 5616);
    ok(pass, lines.join("; "))
}

fn criterion_8() -> Outcome {
    let params = Params::default();
    let mut checked = 0;
    let mut by_certificate = 0;
    let mut not_surjective = 0;
    let mut bad = Vec::new();
    for seed in 0..50u64 {
        let steps = 2 + (seed % 7) as usize;
        let g = random_group(3, 2, seed, steps, 3).unwrap();
        for p in [2u64, 3, 5, 7, 11, 13] {
            let oracle = exact_order(&g.reduce(p), &params).unwrap().is_full();
            let d = is_surjective_mod_p(&g, p, &params).unwrap();
            let agrees = matches!((d.verdict, oracle), (Verdict::Yes, true) | (Verdict::No, false));
            checked += 1;
            if !matches!(d.method, "bfs" | "stabilizer_chain") {
                by_certificate += 1;
            }
            if d.verdict == Verdict::No {
                not_surjective += 1;
            }
            if !agrees {
                bad.push(format!("seed {seed} p {p}: {:?} by {} vs oracle {oracle}", d.verdict, d.method));
            }
        }
    }
    ok(bad.is_empty(), format!("{checked} (group, prime) pairs, {not_surjective} not surjective, {by_certificate} decided without the exact oracle{}", if bad.is_empty() { String::new() } else { format!("; disagreements {bad:?}") }))
}

fn mod_gens(p: u64, gens: Vec<ModMatrix>) -> ModGens {
    let invs = gens.iter().map(|g| g.inverse().expect("invertible")).collect();
    ModGens { modulus: p, degree: gens[0].degree(), gens, invs }
}

fn random_perm_diag(rng: &mut ChaCha8Rng, n: usize, p: u64, perm: Option<Vec<usize>>) -> ModMatrix {
    let perm = perm.unwrap_or_else(|| {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        v
    });
    let mut data = vec![0; n * n];
    for (i, &j) in perm.iter().enumerate() {
        data[i * n + j] = rng.gen_range(1..p);
    }
    ModMatrix::new(n, p, data)
}

fn random_upper(rng: &mut ChaCha8Rng, n: usize, p: u64) -> ModMatrix {
    let mut data = vec![0; n * n];
    for i in 0..n {
        data[i * n + i] = rng.gen_range(1..p);
        for j in i + 1..n {
            data[i * n + j] = rng.gen_range(0..p);
        }
    }
    ModMatrix::new(n, p, data)
}

/// `x -> x + a B(v, x) v` for the standard alternating form.
fn symplectic_transvection(rng: &mut ChaCha8Rng, n: usize, p: u64) -> ModMatrix {
    let h = n / 2;
    let v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
    let a = rng.gen_range(1..p);
    // row vector (J v)^T where J = [[0, I], [-I, 0]]
    let jv: Vec<u64> = (0..n).map(|i| if i < h { (p - v[i + h]) % p } else { v[i - h] }).collect();
    let mut data = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = (u64::from(i == j) + a * v[i] % p * jv[j]) % p;
        }
    }
    ModMatrix::new(n, p, data)
}

/// Reflection in an anisotropic vector for the diagonal form `d`.
fn reflection(rng: &mut ChaCha8Rng, d: &[u64], p: u64) -> ModMatrix {
    let n = d.len();
    loop {
        let v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        let q = (0..n).fold(0, |acc, i| (acc + d[i] * v[i] % p * v[i]) % p);
        let Some(qi) = inv_mod(q, p) else { continue };
        let c = 2 * qi % p;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let s = c * v[i] % p * (v[j] * d[j] % p) % p;
                data[i * n + j] = (u64::from(i == j) + p - s) % p;
            }
        }
        return ModMatrix::new(n, p, data);
    }
}

fn lcm_upto(n: u64) -> u64 {
    (1..=n).fold(1, |l, i| l / num_integer::gcd(l, i) * i)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sampler = WordSampler::new(9);
    let primes = [5u64, 7, 11, 13, 17, 19, 23];
    let mut word = |ngens: usize| -> Expr {
        let len = 3 + sampler.rng().gen_range(0..6);
        sampler.word_of_length(ngens, len).into()
    };

    // monomial groups: [g^k, h^k] = 1
    let mut monomial_violations = 0;
    for i in 0..120 {
        let n = [3usize, 4, 5, 7][i % 4];
        let p = primes[i % primes.len()];
        let gm = mod_gens(p, (0..2 + i % 2).map(|_| random_perm_diag(&mut rng, n, p, None)).collect());
        let k = lcm_upto(n as u64);
        for _ in 0..10 {
            let e = Expr::comm(Expr::pow(word(gm.len()), k), Expr::pow(word(gm.len()), k));
            if !e.evaluate_mod(&gm).unwrap().0.is_identity() {
                monomial_violations += 1;
            }
        }
    }

    // isometry groups: tr(g) = tr(g^-1)
    let mut isometry_violations = 0;
    for i in 0..120 {
        let p = primes[i % primes.len()];
        let gens = if i % 2 == 0 {
            let n = [4usize, 6][i / 2 % 2];
            (0..3).map(|_| symplectic_transvection(&mut rng, n, p)).collect()
        } else {
            let n = 3 + i / 2 % 3;
            let d: Vec<u64> = (0..n).map(|_| rng.gen_range(1..p)).collect();
            (0..3).map(|_| &reflection(&mut rng, &d, p) * &reflection(&mut rng, &d, p)).collect()
        };
        let gm = mod_gens(p, gens);
        for _ in 0..10 {
            let (x, xi) = word(gm.len()).evaluate_mod(&gm).unwrap();
            if x.trace() != xi.trace() {
                isometry_violations += 1;
            }
        }
    }

    // solvable groups of derived length <= 4: depth-5 tree commutators vanish
    let mut solvable_violations = 0;
    for i in 0..120 {
        let p = primes[i % primes.len()];
        let gens: Vec<ModMatrix> = match i % 3 {
            0 => (0..2).map(|_| random_upper(&mut rng, 3, p)).collect(),
            1 => (0..2).map(|_| random_upper(&mut rng, 4, p)).collect(),
            // diagonal-by-S4 monomial group
            _ => vec![
                random_perm_diag(&mut rng, 4, p, Some(vec![1, 2, 3, 0])),
                random_perm_diag(&mut rng, 4, p, Some(vec![1, 0, 2, 3])),
            ],
        };
        let gm = mod_gens(p, gens);
        for _ in 0..4 {
            let tree = Expr::tree_commutator((0..32).map(|_| word(gm.len())).collect());
            if !tree.evaluate_mod(&gm).unwrap().0.is_identity() {
                solvable_violations += 1;
            }
        }
    }

    // the same probes do fire on SL(3, 7)
    let sl = catalog("sl", 3).unwrap().reduce(7);
    let live = (0..4).any(|_| !Expr::tree_commutator((0..32).map(|_| word(sl.len())).collect()).evaluate_mod(&sl).unwrap().0.is_identity());

    ok(
        monomial_violations + isometry_violations + solvable_violations == 0 && live,
        format!(
            "120 groups per suite; violations: monomial {monomial_violations}, isometry {isometry_violations}, solvable {solvable_violations}; probe nontrivial on SL(3,7): {live}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let params = Params::default();
    let sl4 = catalog("sl", 4).unwrap();
    let t = Word::generator(0);
    let r = primes_for_dense_transvection(&sl4, &t, &params);
    let small: Vec<u64> = [2, 3, 5, 7, 11, 13].into_iter().filter(|&p| !exact_order(&sl4.reduce(p), &params).unwrap().is_full()).collect();
    let sp4 = primes_for_dense_transvection(&catalog("sp4", 0).unwrap(), &t, &params);
    let rejected = matches!(&sp4, Err(e) if e.signals_not_dense());
    let pass = matches!(&r, Ok(rep) if rep.pi.iter().all(|&p| p > 13)) && small.is_empty() && rejected;
    ok(pass, format!("SL(4) pi = {:?}, exact oracle failures at p <= 13: {small:?}; Sp(4) -> {:?}", r.map(|x| x.pi), sp4.err()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("rho_k exceptional primes", criterion_1),
        ("surjective mod 2, not mod 4", criterion_2),
        ("H1, H2, H3 exceptional primes", criterion_3),
        ("H1(t), t = 1 mod 4, at 2 and 4", criterion_4),
        ("rho_7 image orders and ladder", criterion_5),
        ("H1(2) order mod 8", criterion_6),
        ("direct-product splitting", criterion_7),
        ("certificates agree with exact oracle", criterion_8),
        ("certificate soundness suites", criterion_9),
        ("transvection driver", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name} ({secs:.1}s): {}", i + 1, o.detail);
        if let Some(why) = &o.known_red {
            println!("             unattainable as stated: {why}");
        } else if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
