use cubesum::arith::{crt_combine, factorize, gcd, is_prime, mod_inverse, pow_mod};
use cubesum::expsums::{triple_sum_direct, triple_sum_fast};
use cubesum::localsolve::local_count_table;
use cubesum::series::SeriesTable;
use num_bigint::BigUint;
use proptest::prelude::*;

fn naive_pow(b: u64, e: u64, m: u64) -> u64 {
    (0..e).fold(1 % m, |acc, _| (acc as u128 * b as u128 % m as u128) as u64)
}

proptest! {
    #[test]
    fn factorization_recomposes(n in 1u64..u64::MAX) {
        let f = factorize(n).unwrap();
        prop_assert_eq!(f.recompose(), n);
        for &(p, e) in f.factors() {
            prop_assert!(is_prime(p));
            prop_assert!(e >= 1);
        }
        prop_assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn pow_mod_agrees_with_repeated_products(b in 0u64..1 << 40, e in 0u64..200, m in 1u64..1 << 40) {
        prop_assert_eq!(pow_mod(b, e, m), naive_pow(b, e, m));
    }

    #[test]
    fn inverse_exists_for_units(a in 1u64..1_000_000, m in 2u64..1_000_000) {
        match mod_inverse(a, m) {
            Some(x) => prop_assert_eq!(a as u128 * x as u128 % m as u128, 1),
            None => prop_assert!(gcd(a, m) != 1),
        }
    }

    #[test]
    fn crt_satisfies_every_congruence(r1 in -1000i64..1000, r2 in -1000i64..1000, m1 in 1u64..5000, m2 in 1u64..5000) {
        prop_assume!(gcd(m1, m2) == 1);
        let (x, m) = crt_combine(&[(r1, m1), (r2, m2)]).unwrap();
        prop_assert_eq!(m, m1 * m2);
        prop_assert!(x < m);
        prop_assert_eq!((x as i64 - r1).rem_euclid(m1 as i64), 0);
        prop_assert_eq!((x as i64 - r2).rem_euclid(m2 as i64), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_triple_sum_matches_direct(q in 1u64..80, a in -200i64..200, k in 2u32..4) {
        let fast = triple_sum_fast(q, a, k).value();
        let direct = triple_sum_direct(q, a, k).unwrap().value();
        prop_assert!((fast - direct).norm() <= 1e-9 * (q as f64).powi(3));
    }

    #[test]
    fn triple_sum_conjugates(q in 2u64..120, a in 1u64..1000, k in 2u32..4) {
        let a = a % q;
        let s = triple_sum_fast(q, a as i64, k).value();
        let t = triple_sum_fast(q, (q - a) as i64, k).value();
        prop_assert!((s - t.conj()).norm() <= 1e-9 * (q as f64).powi(3));
        prop_assert!(s.norm() <= (q as f64).powi(3) * (1.0 + 1e-12));
    }

    #[test]
    fn series_terms_are_real_and_dominated(q in 1u64..60, n in 0u64..500, s in 1u32..8) {
        let t = SeriesTable::new(q, s, 2).unwrap();
        let v = t.term(n);
        prop_assert!(v.im.abs() <= 1e-9 * v.norm().max(1.0));
        prop_assert!(v.norm() <= t.abs_value() * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn local_counts_sum_to_the_whole_space() {
    for (p, h) in [(2u64, 3u32), (3, 2), (5, 1), (7, 1)] {
        for s in 1..=2u32 {
            let t = local_count_table(p, h, s, 2).unwrap();
            let m = t.modulus();
            let total: BigUint = (0..m).map(|n| t.count(n).clone()).sum();
            assert_eq!(total, BigUint::from(m).pow(3 * s), "p = {p}, h = {h}, s = {s}");
            assert!((0..m).all(|n| t.count_star(n) <= t.count(n)));
        }
    }
}
