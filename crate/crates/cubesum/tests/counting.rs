use cubesum::arith::factorize;
use cubesum::circle::phase::frac_mul;
use cubesum::circle::GeneratingSum;
use cubesum::dickman::rho;
use cubesum::reps::{representation_table, smooth_sieve, weight_table, CountMode};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_conserve_the_box(p in 1.0f64..5.0, s in 1u32..4, k in 1u32..3) {
        let t = representation_table(p, s, k, CountMode::Weighted, None).unwrap();
        prop_assert_eq!(t.total(), (p.floor() as u128).pow(3 * s));
    }

    #[test]
    fn weighted_dominates_the_other_modes(p in 2.0f64..6.0, s in 1u32..3, eta in 0.2f64..1.0) {
        let w = representation_table(p, s, 2, CountMode::Weighted, None).unwrap();
        let u = representation_table(p, s, 2, CountMode::Unweighted, None).unwrap();
        let e = representation_table(p, s, 2, CountMode::Smooth, Some(eta)).unwrap();
        for n in 0..=w.n_max() {
            prop_assert!(u.get(n) <= w.get(n));
            prop_assert!(e.get(n) <= w.get(n));
            prop_assert_eq!(u.get(n) == 0, w.get(n) == 0);
        }
    }

    #[test]
    fn sieve_matches_factorization(limit in 1u64..3000, bound in 1u64..60) {
        let sieve = smooth_sieve(limit, bound).unwrap();
        for m in 1..=limit {
            let largest = factorize(m).unwrap().factors().last().map_or(1, |f| f.0);
            prop_assert_eq!(sieve.contains(m), largest <= bound, "m = {}", m);
        }
    }

    #[test]
    fn rho_decreases(x in 1.0f64..19.0, dx in 1e-3f64..1.0) {
        let (a, b) = (rho(x), rho(x + dx));
        prop_assert!(b < a && b > 0.0 && a <= 1.0);
    }

    #[test]
    fn phase_reduction_is_exact_on_dyadics(j in 0u64..1 << 30, m in 0u64..1 << 40) {
        let alpha = j as f64 / (1u64 << 30) as f64;
        let r = (j as u128 * m as u128) % (1u128 << 30);
        let mut want = r as f64 / (1u64 << 30) as f64;
        if want >= 0.5 {
            want -= 1.0;
        }
        prop_assert_eq!(frac_mul(alpha, m as u128), want);
    }

    #[test]
    fn generating_sum_is_periodic_and_conjugate(alpha in -1.0f64..1.0, p in 2.0f64..5.0) {
        let f = GeneratingSum::from_weights(&weight_table(p, None).unwrap(), 2).unwrap();
        let v = f.eval(alpha);
        let scale = f.mass() as f64;
        prop_assert!((f.eval(alpha + 1.0) - v).norm() <= 1e-9 * scale);
        prop_assert!((f.eval(-alpha) - v.conj()).norm() <= 1e-9 * scale);
        prop_assert!(v.norm() <= scale * (1.0 + 1e-12));
    }
}
