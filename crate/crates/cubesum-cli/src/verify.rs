//! The invariant suite behind `verify-all`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use cubesum::arith::{self, gcd, is_prime, pow_mod, primes_up_to};
use cubesum::circle::{self, GeneratingSum, OscMethod, Regime};
use cubesum::expsums::{power_sum, triple_sum_direct, triple_sum_fast, triple_sum_spectrum};
use cubesum::localsolve;
use cubesum::predict;
use cubesum::reps::{self, CountMode};
use cubesum::series::{self, SeriesTable};
use cubesum::{dickman, Result};

use crate::output::{Report, Table};

struct Ctx {
    quick: bool,
    rng: ChaCha8Rng,
}

impl Ctx {
    fn pick(&self, quick: u64, full: u64) -> u64 {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

struct Outcome {
    measured: f64,
    bound: f64,
    passed: bool,
    detail: String,
}

/// `measured ≤ bound`.
fn at_most(measured: f64, bound: f64, detail: impl Into<String>) -> Outcome {
    Outcome {
        measured,
        bound,
        passed: measured <= bound,
        detail: detail.into(),
    }
}

/// Number of failing cases, which must be zero.
fn none_fail(failures: usize, cases: usize) -> Outcome {
    at_most(failures as f64, 0.0, format!("{failures} of {cases} cases fail"))
}

type Check = fn(&mut Ctx) -> Result<Outcome>;

const CHECKS: &[(&str, &str, Check)] = &[
    ("arith", "factorize_roundtrip", factorize_roundtrip),
    ("arith", "factorize_sampled", factorize_sampled),
    ("arith", "padic_context", padic_context),
    ("expsums", "fast_matches_direct", fast_matches_direct),
    ("expsums", "fast_matches_direct_sampled", fast_matches_direct_sampled),
    ("expsums", "quasi_multiplicative", quasi_multiplicative),
    ("expsums", "conjugate_symmetry", conjugate_symmetry),
    ("expsums", "weil_bound", weil_bound),
    ("expsums", "prime_decomposition", prime_decomposition),
    ("expsums", "prime_power_shape", prime_power_shape),
    ("localsolve", "three_cubes_mod_prime_powers", three_cubes_mod_prime_powers),
    ("localsolve", "hensel_growth", hensel_growth),
    ("localsolve", "solubility", solubility),
    ("localsolve", "sum_rule", sum_rule),
    ("localsolve", "orthogonality", orthogonality),
    ("localsolve", "moment_identity", moment_identity),
    ("series", "local_factor_concentration", concentration),
    ("series", "multiplicative", series_multiplicative),
    ("series", "abs_sum_growth", abs_sum_growth),
    ("series", "real_valued", real_valued),
    ("series", "euler_product_within_tail", euler_within_tail),
    ("reps", "conservation", conservation),
    ("reps", "conservation_sampled", conservation_sampled),
    ("reps", "enumeration_oracle", enumeration_oracle),
    ("reps", "domination", domination),
    ("reps", "multiplicity_tail", multiplicity_tail),
    ("reps", "lower_bound_mechanism", lower_bound_mechanism),
    ("dickman", "shape", rho_shape),
    ("dickman", "delay_equation", rho_delay_equation),
    ("dickman", "first_interval", rho_first_interval),
    ("circle", "periodic_conjugate", periodic_conjugate),
    ("circle", "dft_exact", dft_exact),
    ("circle", "arc_integral_total", arc_integral_total),
    ("circle", "v_at_zero", v_at_zero),
    ("circle", "v_methods_agree", v_methods_agree),
    ("circle", "v_decay", v_decay),
    ("circle", "arcs_disjoint", arcs_disjoint),
    ("circle", "major_arc_approximation", major_arc_approximation),
    ("predict", "table1", table1),
    ("predict", "fixed_point_residual", fixed_point_residual),
    ("predict", "main_term_positive", main_term_positive),
    ("predict", "lower_bound_chain", lower_bound_chain),
];

pub fn run(quick: bool, seed: u64) -> (Report, bool) {
    let mut rep = Report::new("verify-all", json!({"quick": quick, "seed": seed}));
    let mut t = Table::new(&["module", "check", "passed", "measured", "bound", "detail"]);
    let mut failed = Vec::new();
    for (i, &(module, name, check)) in CHECKS.iter().enumerate() {
        // one stream per check, so adding a check does not move the others
        let mut ctx = Ctx {
            quick,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)),
        };
        let out = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&mut ctx))) {
            Ok(Ok(o)) => o,
            Ok(Err(e)) => Outcome {
                measured: f64::NAN,
                bound: f64::NAN,
                passed: false,
                detail: e.to_string(),
            },
            Err(_) => Outcome {
                measured: f64::NAN,
                bound: f64::NAN,
                passed: false,
                detail: "panicked".into(),
            },
        };
        if !out.passed {
            failed.push(format!("{module}::{name}"));
        }
        t.push(vec![
            json!(module),
            json!(name),
            json!(out.passed),
            json!(out.measured),
            json!(out.bound),
            json!(out.detail),
        ]);
    }
    rep.results = json!({"checks": CHECKS.len(), "failed": failed});
    rep.table = Some(t);
    let ok = failed.is_empty();
    (rep, ok)
}

fn factorization_ok(n: u64) -> bool {
    let Ok(f) = arith::factorize(n) else {
        return false;
    };
    let ps = f.factors();
    f.recompose() == n
        && f.value() == n
        && ps.windows(2).all(|w| w[0].0 < w[1].0)
        && ps.iter().all(|&(p, e)| e > 0 && is_prime(p))
}

fn factorize_roundtrip(c: &mut Ctx) -> Result<Outcome> {
    let top = c.pick(10_000, 1_000_000);
    let bad = (1..=top).into_par_iter().filter(|&n| !factorization_ok(n)).count();
    Ok(none_fail(bad, top as usize))
}

fn factorize_sampled(c: &mut Ctx) -> Result<Outcome> {
    let ns: Vec<u64> = (0..200).map(|_| c.rng.gen_range(1..=1u64 << 62)).collect();
    let bad = ns.par_iter().filter(|&&n| !factorization_ok(n)).count();
    Ok(none_fail(bad, ns.len()))
}

fn padic_context(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut cases = 0;
    for p in primes_up_to(100) {
        for k in 2..=10u32 {
            let ctx = arith::padic_context(p, k)?;
            let three_k = 3 * k as u64;
            let pt = p.pow(ctx.tau);
            cases += 1;
            if three_k % pt != 0 || three_k % (pt * p) == 0 || ctx.gamma % 2 == 0 {
                bad += 1;
            }
        }
    }
    Ok(none_fail(bad, cases))
}

fn units(q: u64) -> impl Iterator<Item = u64> {
    (1..=q).filter(move |&a| gcd(a, q) == 1)
}

fn fast_matches_direct(c: &mut Ctx) -> Result<Outcome> {
    let top = c.pick(20, 60);
    let worst = (1..=top)
        .into_par_iter()
        .flat_map_iter(|q| [2u32, 3].into_iter().flat_map(move |k| units(q).map(move |a| (q, a, k))))
        .map(|(q, a, k)| {
            let d = triple_sum_direct(q, a as i64, k)?.value();
            let f = triple_sum_fast(q, a as i64, k).value();
            Ok((d - f).norm() / (q as f64).powi(3))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(at_most(worst, 1e-6, format!("q ≤ {top}, k = 2, 3, relative to q³")))
}

fn fast_matches_direct_sampled(c: &mut Ctx) -> Result<Outcome> {
    let cases: Vec<(u64, i64, u32)> = (0..40)
        .map(|_| {
            let q = c.rng.gen_range(2..=200u64);
            (q, c.rng.gen_range(-1000..1000i64), c.rng.gen_range(2..=4u32))
        })
        .collect();
    let worst = cases
        .par_iter()
        .map(|&(q, a, k)| {
            let d = triple_sum_direct(q, a, k)?.value();
            Ok((d - triple_sum_fast(q, a, k).value()).norm() / (q as f64).powi(3))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(at_most(worst, 1e-6, "40 random (q, a, k)"))
}

fn quasi_multiplicative(c: &mut Ctx) -> Result<Outcome> {
    let top = c.pick(12, 30);
    let mut worst = 0.0f64;
    for k in [2u32, 3] {
        let spectra: BTreeMap<u64, Vec<Complex64>> =
            (1..=top).into_par_iter().map(|q| (q, triple_sum_spectrum(q, k))).collect();
        let pairs: Vec<(u64, u64)> = (1..=top)
            .flat_map(|a| (1..=top).map(move |b| (a, b)))
            .filter(|&(a, b)| gcd(a, b) == 1)
            .collect();
        let w = pairs
            .par_iter()
            .map(|&(q1, q2)| {
                let q = q1 * q2;
                let full = triple_sum_spectrum(q, k);
                let e = 3 * k as u64 - 1;
                let (t1, t2) = (pow_mod(q2, e, q1), pow_mod(q1, e, q2));
                units(q)
                    .map(|a| {
                        let lhs = full[(a % q) as usize];
                        let rhs = spectra[&q1][(a * t1 % q1) as usize] * spectra[&q2][(a * t2 % q2) as usize];
                        (lhs - rhs).norm() / (q as f64).powi(3)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        worst = worst.max(w);
    }
    Ok(at_most(worst, 1e-6, format!("coprime q₁, q₂ ≤ {top}, k = 2, 3")))
}

fn conjugate_symmetry(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in [2u32, 3] {
        for q in 1..=60u64 {
            let s = triple_sum_spectrum(q, k);
            for a in 1..q {
                let d = (s[(q - a) as usize] - s[a as usize].conj()).norm() / (q as f64).powi(3);
                worst = worst.max(d);
            }
        }
    }
    Ok(at_most(worst, 1e-9, "q ≤ 60, relative to q³"))
}

fn weil_bound(_: &mut Ctx) -> Result<Outcome> {
    let worst = primes_up_to(200)
        .into_par_iter()
        .map(|p| {
            (1..p)
                .map(|u| power_sum(p, u as i64, 3).norm() / (2.0 * (p as f64).sqrt()))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(at_most(worst, 1.0 + 1e-9, "max |S_3(p,u)| / 2√p, p ≤ 200"))
}

fn prime_decomposition(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in [2u32, 3] {
        let w = primes_up_to(100)
            .into_par_iter()
            .map(|p| {
                let spec = triple_sum_spectrum(p, k);
                let pf = p as f64;
                (1..p)
                    .map(|a| {
                        let d = spec[a as usize] - pf * pf * power_sum(p, a as i64, k).value();
                        d.norm() / (8.0 * (k as f64 - 1.0) * pf * pf)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        worst = worst.max(w);
    }
    Ok(at_most(worst, 1.0, "max |S(p,a) − p²S_k(p,a)| / 8(k−1)p², p ≤ 100"))
}

fn prime_power_shape(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in [2u32, 3] {
        for p in primes_up_to(11) {
            let mut l = 2u32;
            while p.pow(l) <= 128 {
                let q = p.pow(l);
                let spec = triple_sum_spectrum(q, k);
                let scale = (p as f64).powi(3 * l as i32 - 1);
                for a in units(q) {
                    worst = worst.max(spec[(a % q) as usize].norm() / scale);
                }
                l += 1;
            }
        }
    }
    Ok(at_most(worst, 1.0 + 1e-6, "max |S(p^l,a)| / p^{3l−1}, p^l ≤ 128"))
}

fn three_cubes_mod_prime_powers(c: &mut Ctx) -> Result<Outcome> {
    let cap = c.pick(200, 2500);
    let mut bad = 0;
    let mut cases = 0;
    for p in [2u64, 5, 7, 11, 13] {
        let mut h = 1u32;
        while p.pow(h) <= cap {
            cases += 1;
            if !localsolve::m33_set(p, h)?.is_full() {
                bad += 1;
            }
            h += 1;
        }
    }
    for h in 2..=c.pick(4, 6) as u32 {
        cases += 1;
        let set = localsolve::m33_set(3, h)?;
        let ok = (0..set.modulus()).all(|x| set.contains(x) == !matches!(x % 9, 4 | 5));
        if !ok {
            bad += 1;
        }
    }
    Ok(none_fail(bad, cases))
}

fn hensel_growth(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut cases = 0;
    for p in [2u64, 3, 5] {
        for k in [2u32, 3] {
            let ctx = arith::padic_context(p, k)?;
            let s = localsolve::solubility_threshold(p, k)?;
            let table = localsolve::local_count_table(p, ctx.gamma + 1, s, k)?;
            let floor = num_bigint::BigUint::from(p).pow(3 * s - 1);
            for n in 0..table.modulus() {
                cases += 1;
                if table.count(n) < &floor {
                    bad += 1;
                }
            }
        }
    }
    Ok(none_fail(bad, cases))
}

fn solubility(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut cases = 0;
    for p in [2u64, 3, 5, 7] {
        for k in [2u32, 3, 4] {
            let ctx = arith::padic_context(p, k)?;
            let s = localsolve::solubility_threshold(p, k)?;
            let table = localsolve::local_count_table(p, ctx.gamma, s, k)?;
            for n in 0..table.modulus() {
                cases += 1;
                if table.count_star(n) == &num_bigint::BigUint::default() {
                    bad += 1;
                }
            }
        }
    }
    Ok(none_fail(bad, cases))
}

fn sum_rule(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut cases = 0;
    for p in [2u64, 3, 5, 7] {
        for h in 1..=2u32 {
            for s in 1..=2u32 {
                let t = localsolve::local_count_table(p, h, s, 2)?;
                let total: num_bigint::BigUint = (0..t.modulus()).map(|n| t.count(n)).sum();
                cases += 1;
                if total != num_bigint::BigUint::from(p).pow(3 * s * h) {
                    bad += 1;
                }
            }
        }
    }
    Ok(none_fail(bad, cases))
}

fn orthogonality(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in [2u64, 3, 5, 7] {
        for h in 1..=2u32 {
            for s in 1..=2u32 {
                for n in 0..p.pow(h) {
                    let o = localsolve::orthogonality_check(p, h, s, n, 2)?;
                    worst = worst.max(o.discrepancy / o.rhs.abs().max(1.0));
                }
            }
        }
    }
    Ok(at_most(worst, 1e-8, "Σ_{l≤h} S_n(p^l) against M_n(p^h) p^{h(1−3s)}, relative"))
}

fn moment_identity(_: &mut Ctx) -> Result<Outcome> {
    let (q, p, h, k) = (3u64, 3.0, 1u32, 2u32);
    let f = GeneratingSum::from_weights(&reps::weight_table_with_origin(p)?, k)?;
    let lhs: f64 = (1..=q).map(|a| f.eval_rational(a as i64, q).norm().powi(2 * h as i32)).sum();
    let rhs = q as f64 * localsolve::congruence_count(q, p, h, k)? as f64;
    Ok(at_most((lhs - rhs).abs() / rhs, 1e-6, "(q,P,h,k) = (3,3,1,2)"))
}

fn concentration(c: &mut Ctx) -> Result<Outcome> {
    let top = c.pick(30, 60);
    let primes: Vec<u64> = primes_up_to(top).into_iter().filter(|&p| p >= 7).collect();
    let worst = primes
        .par_iter()
        .map(|&p| {
            let one = SeriesTable::new(p, 6, 2)?.by_residue();
            let two = SeriesTable::new(p * p, 6, 2)?.by_residue();
            let pf = (p as f64).powf(1.5);
            Ok(two
                .iter()
                .enumerate()
                .map(|(n, &t2)| (one[n % p as usize] + t2).abs() * pf)
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(at_most(worst, 10.0, format!("max |σ_p − 1| p^(3/2), 7 ≤ p ≤ {top}, s = 6, k = 2, L = 2")))
}

fn series_multiplicative(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let tables: BTreeMap<u64, (Vec<f64>, f64)> = (1..=60u64)
        .into_par_iter()
        .map(|q| {
            let t = SeriesTable::new(q, 6, 2)?;
            Ok((q, (t.by_residue(), t.abs_value())))
        })
        .collect::<Result<_>>()?;
    for q1 in 2..=60u64 {
        for q2 in 2..=60 / q1 {
            if gcd(q1, q2) != 1 {
                continue;
            }
            let (full, fa) = &tables[&(q1 * q2)];
            let (a, aa) = &tables[&q1];
            let (b, ba) = &tables[&q2];
            for (n, &v) in full.iter().enumerate() {
                let w = a[n % q1 as usize] * b[n % q2 as usize];
                worst = worst.max((v - w).abs() / v.abs().max(1.0));
            }
            worst = worst.max((fa - aa * ba).abs() / fa.max(1.0));
        }
    }
    Ok(at_most(worst, 1e-9, "S_n and S*_s on coprime q₁q₂ ≤ 60, s = 6, k = 2"))
}

fn abs_sum_growth(_: &mut Ctx) -> Result<Outcome> {
    let tables: Vec<f64> = (1..=80u64)
        .into_par_iter()
        .map(|q| Ok(SeriesTable::new(q, 6, 2)?.abs_value()))
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = [10usize, 20, 40, 80]
        .iter()
        .map(|&q| ((q as f64).ln(), tables[..q].iter().sum::<f64>().ln()))
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(at_most(sxy / sxx, 0.2, "log-log slope of Σ_{q≤Q} S*_6(q), Q = 10..80"))
}

fn real_valued(_: &mut Ctx) -> Result<Outcome> {
    let worst = (1..=60u64)
        .into_par_iter()
        .map(|q| {
            let t = SeriesTable::new(q, 6, 2)?;
            Ok((0..q)
                .map(|n| {
                    let v = t.term(n);
                    v.im.abs() / v.norm().max(1.0)
                })
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(at_most(worst, 1e-6, "q ≤ 60, s = 6, k = 2"))
}

fn euler_within_tail(c: &mut Ctx) -> Result<Outcome> {
    let top = c.pick(5, 20);
    let worst = (1..=top)
        .into_par_iter()
        .map(|n| {
            let r = series::singular_series(n, 6, 2, 30)?;
            Ok(r.discrepancy() - r.tail_bound)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(at_most(worst, 1e-6, format!("max (|partial − product| − tail bound), n ≤ {top}, s = 6, k = 2, Q = 30")))
}

fn conserved(p: f64, s: u32, k: u32) -> Result<bool> {
    let t = reps::representation_table(p, s, k, CountMode::Weighted, None)?;
    Ok(t.total() == (p.floor() as u128).pow(3 * s))
}

fn conservation(c: &mut Ctx) -> Result<Outcome> {
    let mut cases = vec![(3.0, 3, 2), (7.5, 2, 2)];
    if !c.quick {
        cases.push((4.0, 2, 3));
    }
    let bad = cases.iter().filter(|&&(p, s, k)| !conserved(p, s, k).unwrap_or(false)).count();
    Ok(none_fail(bad, cases.len()))
}

fn conservation_sampled(c: &mut Ctx) -> Result<Outcome> {
    let cases: Vec<(f64, u32, u32)> = (0..6)
        .map(|_| (c.rng.gen_range(1.0..5.0), c.rng.gen_range(1..=2u32), c.rng.gen_range(1..=3u32)))
        .collect();
    let bad = cases.iter().filter(|&&(p, s, k)| !conserved(p, s, k).unwrap_or(false)).count();
    Ok(none_fail(bad, cases.len()))
}

/// Counts of `Σ_i T(𝐱_i)^k` over all `s`-tuples, by enumeration.
fn enumerate(top: u64, s: u32, k: u32, distinct: bool) -> BTreeMap<u128, u128> {
    let mut ts: Vec<u128> = Vec::new();
    for x in 1..=top {
        for y in 1..=top {
            for z in 1..=top {
                ts.push(((x.pow(3) + y.pow(3) + z.pow(3)) as u128).pow(k));
            }
        }
    }
    if distinct {
        ts.sort_unstable();
        ts.dedup();
    }
    let mut acc: BTreeMap<u128, u128> = BTreeMap::from([(0, 1)]);
    for _ in 0..s {
        let mut next = BTreeMap::new();
        for (&v, &c) in &acc {
            for &t in &ts {
                *next.entry(v + t).or_insert(0) += c;
            }
        }
        acc = next;
    }
    acc
}

fn enumeration_oracle(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut cases = 0;
    for top in 1..=3u64 {
        for s in 1..=3u32 {
            for k in [2u32, 3] {
                for (mode, distinct) in [(CountMode::Weighted, false), (CountMode::Unweighted, true)] {
                    cases += 1;
                    let t = reps::representation_table(top as f64, s, k, mode, None)?;
                    let oracle = enumerate(top, s, k, distinct);
                    let got: BTreeMap<u128, u128> = t.nonzero().map(|(n, c)| (n as u128, c)).collect();
                    if got != oracle {
                        bad += 1;
                    }
                }
            }
        }
    }
    Ok(none_fail(bad, cases))
}

fn domination(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut cases = 0;
    for p in [3.0, 4.0, 5.0] {
        let w = reps::representation_table(p, 2, 2, CountMode::Weighted, None)?;
        let u = reps::representation_table(p, 2, 2, CountMode::Unweighted, None)?;
        let e = reps::representation_table(p, 2, 2, CountMode::Smooth, Some(0.5))?;
        for n in 0..=w.n_max() {
            cases += 1;
            let (rw, ru, re) = (w.get(n), u.get(n), e.get(n));
            if re > rw || ru > rw || (ru >= 1) != (rw >= 1) {
                bad += 1;
            }
        }
    }
    Ok(none_fail(bad, cases))
}

fn multiplicity_tail(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut cases = 0;
    for p in [6.0, 10.0, 20.0] {
        for k in [2u32, 3] {
            for eta in [0.3, 0.5] {
                for big_k in [0.5, 1.0, 2.0] {
                    cases += 1;
                    if !reps::multiplicity_tail(p, k, eta, big_k)?.holds {
                        bad += 1;
                    }
                }
            }
        }
    }
    Ok(none_fail(bad, cases))
}

fn lower_bound_mechanism(_: &mut Ctx) -> Result<Outcome> {
    let (p, s, k, eta) = (6.0, 2u32, 2u32, 0.5);
    let top = reps::weight_table(p, Some(eta))?.max_weight() as u128;
    let r = reps::representation_table(p, s, k, CountMode::Unweighted, None)?;
    let e = reps::representation_table(p, s, k, CountMode::Smooth, Some(eta))?;
    let bad = (0..=r.n_max()).filter(|&n| r.get(n) * top.pow(s) < e.get(n)).count();
    Ok(none_fail(bad, r.n_max() as usize + 1))
}

fn rho_shape(_: &mut Ctx) -> Result<Outcome> {
    let xs: Vec<f64> = (0..=2000).map(|i| 1.0 + 19.0 * i as f64 / 2000.0).collect();
    let mut bad = 0;
    for w in xs.windows(2) {
        let (a, b) = (dickman::rho(w[0]), dickman::rho(w[1]));
        if b > a || b <= 0.0 || a > 1.0 {
            bad += 1;
        }
    }
    let exact = dickman::rho(0.5) == 1.0 && dickman::rho(-1.0) == 0.0 && dickman::rho(1.0) == 1.0;
    if !exact {
        bad += 1;
    }
    Ok(none_fail(bad, xs.len()))
}

fn rho_delay_equation(_: &mut Ctx) -> Result<Outcome> {
    let h = 1e-4;
    let worst = (0..1000)
        .map(|i| {
            let x = 1.01 + (19.99 - 1.01) * (i as f64 + 0.5) / 1000.0;
            let d = (dickman::rho(x + h) - dickman::rho(x - h)) / (2.0 * h);
            (x * d + dickman::rho(x - 1.0)).abs()
        })
        .fold(0.0, f64::max);
    Ok(at_most(worst, 1e-6, "|xρ'(x) + ρ(x−1)|, centered differences, 1000 points"))
}

fn rho_first_interval(_: &mut Ctx) -> Result<Outcome> {
    let worst = (0..=1000)
        .map(|i| {
            let x = 1.0 + i as f64 / 1000.0;
            (dickman::rho(x) - (1.0 - x.ln())).abs()
        })
        .fold(0.0, f64::max);
    Ok(at_most(worst, 1e-9, "|ρ(x) − (1 − ln x)| on [1,2]"))
}

fn periodic_conjugate(c: &mut Ctx) -> Result<Outcome> {
    let f = GeneratingSum::from_weights(&reps::weight_table(4.0, None)?, 2)?;
    let mass = f.mass() as f64;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a: f64 = c.rng.gen_range(-1.0..1.0);
        let v = f.eval(a);
        worst = worst.max((f.eval(a + 1.0) - v).norm() / mass);
        worst = worst.max((f.eval(-a) - v.conj()).norm() / mass);
    }
    Ok(at_most(worst, 1e-9, "P = 4, k = 2, 100 random α, relative to f(0)"))
}

fn dft_exact(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (p, s, k) in [(2.0, 2, 2), (3.0, 2, 2), (3.0, 3, 2), (2.0, 2, 3), (3.0, 2, 3), (2.0, 3, 3)] {
        let d = circle::dft_inversion(p, s, k, None)?;
        let t = reps::representation_table(p, s, k, CountMode::Weighted, None)?;
        for (n, &v) in d.recovered.iter().enumerate() {
            worst = worst.max((v - t.get(n as u64) as f64).abs());
        }
    }
    Ok(at_most(worst, 1e-6, "max |recovered − R(n)|, ⌊P⌋ ≤ 3"))
}

fn arc_integral_total(c: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (p, s, k) in [(2.0, 2u32, 2u32), (3.0, 2, 2)] {
        let t = reps::representation_table(p, s, k, CountMode::Weighted, None)?;
        let big_n = p.powi(3 * k as i32);
        let d = circle::dissect(Regime::Kappa { kappa: Regime::DEFAULT_KAPPA }, big_n, k)?;
        let mut ns = vec![109u64];
        ns.extend((0..4).map(|_| c.rng.gen_range(0..=t.n_max())));
        for n in ns {
            let r = circle::arc_integral(p, s, k, n, &d, 4)?;
            worst = worst.max((r.total - t.get(n) as f64).abs());
        }
    }
    Ok(at_most(worst, 0.05, "P = 2, 3 with s = k = 2"))
}

fn v_at_zero(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (p, k) in [(5.0, 2u32), (10.0, 2), (5.0, 3)] {
        for m in [OscMethod::Direct3d, OscMethod::Reduced1d] {
            let v = circle::v_beta(0.0, p, k, m)?.value();
            worst = worst.max((v - Complex64::new(p * p * p, 0.0)).norm() / (p * p * p));
        }
    }
    Ok(at_most(worst, 1e-9, "|v(0) − P³| / P³"))
}

fn v_methods_agree(c: &mut Ctx) -> Result<Outcome> {
    let p: f64 = 5.0;
    let betas: Vec<f64> = (0..10).map(|_| c.rng.gen_range(-1e-4..1e-4)).collect();
    let mut worst = 0.0f64;
    let mut over = false;
    for b in betas {
        let d = circle::v_beta(b, p, 2, OscMethod::Direct3d)?.value();
        let r = circle::v_beta(b, p, 2, OscMethod::Reduced1d)?.value();
        worst = worst.max((d - r).norm() / p.powi(3));
        over |= d.norm() > p.powi(3) * (1.0 + 1e-9);
    }
    if over {
        worst = f64::INFINITY;
    }
    Ok(at_most(worst, 1e-4, "P = 5, k = 2, 10 random β in (−1e-4, 1e-4), relative to P³"))
}

fn v_decay(c: &mut Ctx) -> Result<Outcome> {
    let j = c.pick(8, 12) as i32;
    let worst = circle::decay_constant(10.0, 2, 0..=j)?;
    Ok(at_most(worst, 10.0, format!("P = 10, k = 2, β = 2^j/P⁶, j ≤ {j}")))
}

fn arcs_disjoint(_: &mut Ctx) -> Result<Outcome> {
    let mut regimes = Vec::new();
    for xi in [0.1, 0.2, 0.3] {
        for s in [2u32, 4] {
            for n in [1e3, 1e4, 1e5] {
                regimes.push((Regime::Xi { xi, s }, n));
            }
        }
    }
    for p in [10.0f64, 30.0, 100.0] {
        regimes.push((Regime::Kappa { kappa: 0.2 }, p.powi(6)));
    }
    let mut bad = 0;
    for &(r, n) in &regimes {
        let d = circle::dissect(r, n, 2)?;
        let mut spans: Vec<(f64, f64)> = Vec::new();
        for a in &d.arcs {
            let (lo, hi) = (a.center - a.half_width, a.center + a.half_width);
            // wrap arcs around 0 into [0,1)
            if lo < 0.0 {
                spans.push((lo + 1.0, 1.0));
                spans.push((0.0, hi));
            } else if hi > 1.0 {
                spans.push((lo, 1.0));
                spans.push((0.0, hi - 1.0));
            } else {
                spans.push((lo, hi));
            }
        }
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            bad += 1;
        }
    }
    Ok(none_fail(bad, regimes.len()))
}

fn major_arc_approximation(_: &mut Ctx) -> Result<Outcome> {
    let p = 15.0;
    let d = circle::dissect(Regime::Kappa { kappa: Regime::DEFAULT_KAPPA }, p * p * p * p * p * p, 2)?;
    let samples = circle::residuals_v(&circle::sample_major_points(&d, 40), p, 2)?;
    let worst = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(at_most(worst, 50.0, "|f − V| / (P²q(1 + n|β|)), P = 15, k = 2"))
}

const TABLE1: [(u32, u64, f64); 6] = [
    (2, 24, 23.4331),
    (3, 63, 62.9722),
    (4, 134, 133.4783),
    (5, 216, 215.3978),
    (6, 316, 315.9897),
    (7, 435, 434.9924),
];

fn table1(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (k, s, t) in TABLE1 {
        let a = predict::table1_params(k)?;
        if a.s != s {
            worst = f64::INFINITY;
        }
        worst = worst.max((a.t - t).abs());
    }
    Ok(at_most(worst, 1e-3, "s exact and max |t − t_ref|, k = 2..7"))
}

fn fixed_point_residual(_: &mut Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in 2..=7 {
        worst = worst.max(predict::table1_params(k)?.residual());
    }
    Ok(at_most(worst, 1e-9, "k = 2..7"))
}

fn main_term_positive(_: &mut Ctx) -> Result<Outcome> {
    let mut bad = 0;
    for (s, k) in [(6u32, 2u32), (9, 3)] {
        let m = predict::MainTermEvaluator::new(k, s, None, 30)?;
        for n in 1..=200 {
            let v = m.eval(n);
            if v.series_value > 0.0 && !(v.value > 0.0) {
                bad += 1;
            }
        }
    }
    Ok(none_fail(bad, 400))
}

fn lower_bound_chain(_: &mut Ctx) -> Result<Outcome> {
    let r = predict::lower_bound_r(2, 2, 6.0, 0.5, 1.0)?;
    let tail = reps::multiplicity_tail(6.0, 2, 0.5, 1.0)?;
    let bad = r.rows.iter().filter(|row| (row.witness as f64) < row.bound).count() + (!tail.holds) as usize;
    Ok(none_fail(bad, r.rows.len() + 1))
}
