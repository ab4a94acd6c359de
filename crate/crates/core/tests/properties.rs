use num_integer::Integer;
use proptest::prelude::*;

use zdense::congruence::decompose_modulus;
use zdense::group::{catalog, evaluate_word, evaluate_word_mod, Expr, Word};
use zdense::modular::reduce_mod;

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec((0usize..2, -3i64..=3), 0..12).prop_map(Word::new)
}

proptest! {
    #[test]
    fn split_multiplies_back(k in 2u64..5000, m in 1u64..5000) {
        let s = decompose_modulus(k, m, 3).unwrap();
        prop_assert_eq!(s.a * s.b * s.c, k);
        prop_assert_eq!(s.a, k.gcd(&m));
        prop_assert_eq!(s.c.gcd(&s.a), 1);
        prop_assert_eq!(s.c.gcd(&m), 1);
    }

    #[test]
    fn lifting_commutes_with_reduction(w in word(), m in 2u64..60) {
        let g = catalog("rho_F", 7).unwrap();
        let exact = evaluate_word(&g, &w).unwrap();
        prop_assert_eq!(reduce_mod(&exact, m), evaluate_word_mod(&g, &w, m).unwrap());
    }

    #[test]
    fn word_times_inverse_is_identity(w in word()) {
        let g = catalog("h1", 5).unwrap();
        let x = evaluate_word(&g, &w.concat(&w.inverse())).unwrap();
        prop_assert!(x.is_identity());
    }

    #[test]
    fn word_text_round_trips(w in word()) {
        let text = w.to_string();
        prop_assert_eq!(text.parse::<Word>().unwrap(), w);
    }

    #[test]
    fn commutator_inverse_matches(a in word(), b in word(), m in 2u64..40) {
        let g = catalog("rho_Gamma", 6).unwrap();
        let e = Expr::comm(a.into(), b.into());
        let (x, xi) = e.evaluate(&g).unwrap();
        prop_assert!((&x * &xi).is_identity());
        let (y, yi) = e.evaluate_mod(&g.reduce(m)).unwrap();
        prop_assert_eq!(reduce_mod(&x, m), y);
        prop_assert_eq!(reduce_mod(&xi, m), yi);
    }
}
