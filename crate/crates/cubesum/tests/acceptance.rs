//! Acceptance run: one line per criterion.
//!
//! Runs without the libtest harness. The process fails when a criterion's
//! outcome differs from what is expected, so a criterion listed in
//! `KNOWN_RED` is still printed as FAIL, and an unexpected pass of one of
//! those fails the run too.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cubesum::arith::{gcd, primes_up_to};
use cubesum::circle::{self, OscMethod, Regime};
use cubesum::dickman::rho;
use cubesum::expsums::{power_sum, triple_sum_direct, triple_sum_fast, triple_sum_spectrum};
use cubesum::localsolve::{m33_set, orthogonality_check};
use cubesum::predict::{lower_bound_r, ratio_report, table1_params, DEFAULT_MAIN_TRUNCATION};
use cubesum::reps::{multiplicity_tail, representation_table, CountMode};
use cubesum::series::{singular_series, SeriesTable};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Criteria that cannot pass as stated. See the README.
const KNOWN_RED: &[usize] = &[11];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

const CRITERIA: [(&str, Check, Duration); 13] = [
    ("table1 reproduction", c01_table1, Duration::from_secs(1)),
    ("three cubes mod prime powers", c02_m33, Duration::from_secs(60)),
    ("fast vs direct S(q,a)", c03_identity, Duration::from_secs(120)),
    ("quasi-multiplicativity", c04_quasi, Duration::MAX),
    ("orthogonality", c05_orthogonality, Duration::MAX),
    ("weil-type bounds", c06_weil, Duration::MAX),
    ("dickman", c07_dickman, Duration::MAX),
    ("exact counting", c08_counting, Duration::MAX),
    ("circle inversion", c09_inversion, Duration::MAX),
    ("v(beta)", c10_vbeta, Duration::MAX),
    ("singular series", c11_series, Duration::from_secs(600)),
    ("lower-bound chain", c12_chain, Duration::MAX),
    ("main term ratio", c13_ratio, Duration::from_secs(900)),
];

fn main() -> ExitCode {
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, check, limit)) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let out = std::panic::catch_unwind(check).unwrap_or_else(|_| outcome(false, "panicked"));
        let took = start.elapsed();
        let pass = out.pass && took < *limit;
        let mut detail = out.detail;
        if out.pass && !pass {
            detail.push_str(&format!("; over the {:?} limit", limit));
        }
        let expected = !KNOWN_RED.contains(&id);
        let tag = match (pass, expected) {
            (true, true) => "PASS",
            (false, false) => "FAIL (known)",
            (false, true) => "FAIL",
            (true, false) => "PASS (unexpected)",
        };
        passed += pass as usize;
        unexpected += (pass != expected) as usize;
        println!("criterion {id:>2} {tag:<17} {name:<30} {:>8.2}s  {detail}", took.as_secs_f64());
    }
    println!("acceptance: {passed}/{} pass, {unexpected} unexpected", CRITERIA.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// oracles

fn turn(r: u64, q: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (r % q) as f64 / q as f64)
}

fn pow_mod(x: u64, e: u32, q: u64) -> u64 {
    (0..e).fold(1 % q, |acc, _| (acc as u128 * x as u128 % q as u128) as u64)
}

fn cyclic(a: &[u128], b: &[u128]) -> Vec<u128> {
    let q = a.len();
    let mut out = vec![0u128; q];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[(i + j) % q] += x * y;
        }
    }
    out
}

/// Number of `(x, y, z) mod q` with `x³ + y³ + z³ ≡ t`.
fn cube_hist(q: u64) -> Vec<u128> {
    let mut one = vec![0u128; q as usize];
    for x in 0..q {
        one[pow_mod(x, 3, q) as usize] += 1;
    }
    cyclic(&cyclic(&one, &one), &one)
}

/// `S(q,a)` summed over the histogram of `T mod q`.
fn s_oracle(hist: &[u128], a: u64, k: u32) -> Complex64 {
    let q = hist.len() as u64;
    hist.iter()
        .enumerate()
        .map(|(t, &c)| turn(a * pow_mod(t as u64, k, q) % q, q) * c as f64)
        .sum()
}

fn units(q: u64) -> impl Iterator<Item = u64> {
    (1..=q).filter(move |&a| gcd(a, q) == 1).map(move |a| a % q)
}

/// `S_n(q) = Σ_{(a,q)=1} (q⁻³S(q,a))^s e(−an/q)`.
fn series_term_oracle(q: u64, n: u64, s: u32, k: u32) -> f64 {
    let hist = cube_hist(q);
    let q3 = (q as f64).powi(3);
    units(q)
        .map(|a| (s_oracle(&hist, a, k) / q3).powu(s) * turn(q - n % q * a % q, q))
        .sum::<Complex64>()
        .re
}

/// `M_n(p^h)` for every `n`, by convolving the distribution of `T^k`.
fn local_counts_oracle(m: u64, s: u32, k: u32) -> Vec<u128> {
    let hist = cube_hist(m);
    let mut d = vec![0u128; m as usize];
    for (t, &c) in hist.iter().enumerate() {
        d[pow_mod(t as u64, k, m) as usize] += c;
    }
    let mut acc = d.clone();
    for _ in 1..s {
        acc = cyclic(&acc, &d);
    }
    acc
}

/// Every `T(𝐮)` for `𝐮 ∈ [1, P]³`, with repetition.
fn box_sums(p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for x in 1..=p {
        for y in 1..=p {
            for z in 1..=p {
                out.push(x * x * x + y * y * y + z * z * z);
            }
        }
    }
    out
}

/// Counts of `Σ m_i^k = n` over `s`-tuples drawn from `values`.
fn enumerate(values: &[u64], s: u32, k: u32) -> Vec<u128> {
    let powers: Vec<u64> = values.iter().map(|&m| m.pow(k)).collect();
    let top = *powers.iter().max().unwrap() as usize * s as usize;
    let mut out = vec![0u128; top + 1];
    let mut idx = vec![0usize; s as usize];
    loop {
        let n: u64 = idx.iter().map(|&i| powers[i]).sum();
        out[n as usize] += 1;
        let mut j = 0;
        loop {
            if j == idx.len() {
                return out;
            }
            idx[j] += 1;
            if idx[j] < powers.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn brute_weighted(p: u64, s: u32, k: u32) -> Vec<u128> {
    enumerate(&box_sums(p), s, k)
}

fn brute_unweighted(p: u64, s: u32, k: u32) -> Vec<u128> {
    let mut m = box_sums(p);
    m.sort_unstable();
    m.dedup();
    enumerate(&m, s, k)
}

// criteria

fn c01_table1() -> Outcome {
    let expect = [
        (2, 24, 23.4331),
        (3, 63, 62.9722),
        (4, 134, 133.4783),
        (5, 216, 215.3978),
        (6, 316, 315.9897),
        (7, 435, 434.9924),
    ];
    let mut worst = 0.0f64;
    let mut s_ok = true;
    for (k, s, t) in expect {
        let row = table1_params(k).unwrap();
        s_ok &= row.s == s;
        worst = worst.max((row.t - t).abs());
    }
    outcome(s_ok && worst <= 1e-3, format!("s exact: {s_ok}, max |t − t*| = {worst:.2e}"))
}

fn c02_m33() -> Outcome {
    let mut cases = Vec::new();
    for p in [2u64, 5, 7, 11, 13] {
        let mut h = 1;
        while p.pow(h) <= 2500 {
            cases.push((p, h));
            h += 1;
        }
    }
    cases.extend((2..=6).map(|h| (3u64, h)));
    let bad: Vec<(u64, u32)> = cases
        .par_iter()
        .copied()
        .filter(|&(p, h)| {
            let m = p.pow(h);
            let set = m33_set(p, h).unwrap();
            // unit cube plus any two cubes, as a boolean convolution
            let mut units = vec![0u128; m as usize];
            let mut all = vec![0u128; m as usize];
            for x in 0..m {
                let c = pow_mod(x, 3, m) as usize;
                all[c] = 1;
                if x % p != 0 {
                    units[c] = 1;
                }
            }
            let reach = cyclic(&cyclic(&units, &all), &all);
            (0..m).any(|x| {
                let stated = p != 3 || !matches!(x % 9, 4 | 5);
                set.contains(x) != stated || (reach[x as usize] > 0) != stated
            })
        })
        .collect();
    outcome(bad.is_empty(), format!("{} moduli, mismatches {bad:?}", cases.len()))
}

fn c03_identity() -> Outcome {
    let worst = (1..=60u64)
        .into_par_iter()
        .map(|q| {
            let hist = cube_hist(q);
            let mut w = 0.0f64;
            for k in [2u32, 3] {
                for a in units(q) {
                    let fast = triple_sum_fast(q, a as i64, k).value();
                    let direct = triple_sum_direct(q, a as i64, k).unwrap().value();
                    let oracle = s_oracle(&hist, a, k);
                    let q3 = (q as f64).powi(3);
                    w = w.max((fast - direct).norm() / q3).max((fast - oracle).norm() / q3);
                }
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 1e-6, format!("max |fast − direct| / q³ = {worst:.2e}, q ≤ 60, k = 2, 3"))
}

fn c04_quasi() -> Outcome {
    // S(q₁q₂, a₁q₂^{3k} + a₂q₁^{3k}) = S(q₁,a₁) S(q₂,a₂), written through
    // a single a mod q₁q₂
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for k in [2u32, 3] {
        let spectra: Vec<Vec<Complex64>> = (0..=30u64)
            .into_par_iter()
            .map(|q| if q == 0 { Vec::new() } else { triple_sum_spectrum(q, k) })
            .collect();
        let list: Vec<(u64, u64)> = (2..=30u64)
            .flat_map(|a| (2..=30u64).map(move |b| (a, b)))
            .filter(|&(a, b)| a < b && gcd(a, b) == 1)
            .collect();
        pairs += list.len();
        let w = list
            .par_iter()
            .map(|&(q1, q2)| {
                let q = q1 * q2;
                let full = triple_sum_spectrum(q, k);
                let t1 = pow_mod(q2, 3 * k - 1, q1);
                let t2 = pow_mod(q1, 3 * k - 1, q2);
                units(q)
                    .map(|a| {
                        let rhs = spectra[q1 as usize][(a * t1 % q1) as usize]
                            * spectra[q2 as usize][(a * t2 % q2) as usize];
                        (full[a as usize] - rhs).norm() / (q as f64).powi(3)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        worst = worst.max(w);
    }
    outcome(worst <= 1e-6, format!("{pairs} coprime pairs, max defect / (q₁q₂)³ = {worst:.2e}"))
}

fn c05_orthogonality() -> Outcome {
    let mut worst = 0.0f64;
    let mut oracle_gap = 0.0f64;
    for p in [2u64, 3, 5, 7] {
        for h in 1..=2u32 {
            let m = p.pow(h);
            for s in 1..=2u32 {
                let counts = local_counts_oracle(m, s, 2);
                for n in 0..m {
                    let o = orthogonality_check(p, h, s, n, 2).unwrap();
                    let rhs = counts[n as usize] as f64 * (m as f64).powf(1.0 - 3.0 * s as f64);
                    let lhs: f64 = 1.0 + (1..=h).map(|l| series_term_oracle(p.pow(l), n, s, 2)).sum::<f64>();
                    // absolute where the count is zero
                    let scale = if rhs == 0.0 { 1.0 } else { rhs.abs() };
                    worst = worst.max(o.discrepancy / scale).max((lhs - rhs).abs() / scale);
                    oracle_gap = oracle_gap.max((o.rhs - rhs).abs() / scale);
                }
            }
        }
    }
    outcome(
        worst <= 1e-8 && oracle_gap <= 1e-12,
        format!("max relative defect {worst:.2e}; M_n against enumeration {oracle_gap:.1e}"),
    )
}

fn c06_weil() -> Outcome {
    let cubic = primes_up_to(200)
        .into_par_iter()
        .map(|p| {
            (1..p)
                .map(|u| {
                    let lib = power_sum(p, u as i64, 3).value();
                    let oracle: Complex64 = (1..=p).map(|r| turn(u * pow_mod(r, 3, p) % p, p)).sum();
                    assert!((lib - oracle).norm() < 1e-9 * p as f64);
                    lib.norm() / (2.0 * (p as f64).sqrt())
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let mut split = 0.0f64;
    for k in [2u32, 3] {
        let w = primes_up_to(100)
            .into_par_iter()
            .map(|p| {
                let hist = cube_hist(p);
                let spec = triple_sum_spectrum(p, k);
                let pf = p as f64;
                (1..p)
                    .map(|a| {
                        let oracle = s_oracle(&hist, a, k);
                        assert!((spec[a as usize] - oracle).norm() < 1e-9 * pf.powi(3));
                        let sk: Complex64 = (1..=p).map(|r| turn(a * pow_mod(r, k, p) % p, p)).sum();
                        (oracle - pf * pf * sk).norm() / (8.0 * (k as f64 - 1.0) * pf * pf)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        split = split.max(w);
    }
    outcome(
        cubic <= 1.0 + 1e-9 && split <= 1.0,
        format!("|S_3(p,u)|/2√p ≤ {cubic:.4}, |S − p²S_k|/8(k−1)p² ≤ {split:.4}"),
    )
}

fn c07_dickman() -> Outcome {
    let first = (0..1000)
        .map(|i| {
            let x = 1.0 + i as f64 / 999.0;
            (rho(x) - (1.0 - x.ln())).abs()
        })
        .fold(0.0, f64::max);
    let h = 1e-4;
    let delay = (0..1000)
        .map(|i| {
            let x = 1.0 + 19.0 * (i as f64 + 0.5) / 1000.0;
            if x - h <= 1.0 {
                return 0.0;
            }
            let d = (rho(x + h) - rho(x - h)) / (2.0 * h);
            (x * d + rho(x - 1.0)).abs()
        })
        .fold(0.0, f64::max);
    let exact = rho(0.5) == 1.0 && rho(-1.0) == 0.0;
    outcome(
        first <= 1e-9 && delay <= 1e-6 && exact,
        format!("first interval {first:.1e}, delay residual {delay:.1e}, exact values {exact}"),
    )
}

fn c08_counting() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (p, s, k) in [(3.0, 3u32, 2u32), (4.0, 2, 3), (7.5, 2, 2)] {
        let t = representation_table(p, s, k, CountMode::Weighted, None).unwrap();
        let want = (p.floor() as u128).pow(3 * s);
        ok &= t.total() == want;
    }
    notes.push(format!("conservation {ok}"));
    let mut mismatched = Vec::new();
    for top in 1..=3u64 {
        for s in 1..=3u32 {
            for k in [2u32, 3] {
                let p = top as f64;
                let w = representation_table(p, s, k, CountMode::Weighted, None).unwrap();
                let u = representation_table(p, s, k, CountMode::Unweighted, None).unwrap();
                let (bw, bu) = (brute_weighted(top, s, k), brute_unweighted(top, s, k));
                let same = |lib: &[u128], brute: &[u128]| {
                    (0..lib.len().max(brute.len())).all(|n| lib.get(n).copied().unwrap_or(0) == brute.get(n).copied().unwrap_or(0))
                };
                if !same(w.counts(), &bw) || !same(u.counts(), &bu) {
                    mismatched.push((top, s, k));
                }
            }
        }
    }
    ok &= mismatched.is_empty();
    notes.push(format!("enumeration mismatches {mismatched:?}"));
    let r = representation_table(2.0, 2, 2, CountMode::Weighted, None).unwrap().get(109);
    let u = representation_table(2.0, 2, 2, CountMode::Unweighted, None).unwrap().get(109);
    ok &= r == 6 && u == 2;
    notes.push(format!("R(109) = {r}, r(109) = {u}"));
    outcome(ok, notes.join(", "))
}

fn c09_inversion() -> Outcome {
    let instances = [(2u64, 2u32, 2u32), (3, 2, 2), (2, 3, 2), (3, 3, 2), (2, 2, 3), (3, 2, 3), (2, 3, 3)];
    let mut dft_err = 0.0f64;
    let mut rounding = true;
    let mut arc_err = 0.0f64;
    for &(top, s, k) in &instances {
        let p = top as f64;
        let exact = brute_weighted(top, s, k);
        let d = circle::dft_inversion(p, s, k, None).unwrap();
        for (n, &v) in d.recovered.iter().enumerate() {
            let want = exact.get(n).copied().unwrap_or(0);
            dft_err = dft_err.max((v - want as f64).abs());
            rounding &= v.round() as u128 == want;
        }
        let big_n = p.powi(3 * k as i32);
        let diss = circle::dissect(Regime::Kappa { kappa: Regime::DEFAULT_KAPPA }, big_n, k).unwrap();
        let last = exact.len() as u64 - 1;
        let mut ns: Vec<u64> = (0..=24).map(|i| last * i / 24).collect();
        ns.extend(exact.iter().enumerate().filter(|(_, &c)| c > 0).map(|(n, _)| n as u64).take(8));
        let w = ns
            .par_iter()
            .map(|&n| {
                let r = circle::arc_integral(p, s, k, n, &diss, 4).unwrap();
                (r.total - exact[n as usize] as f64).abs()
            })
            .reduce(|| 0.0, f64::max);
        arc_err = arc_err.max(w);
    }
    outcome(
        dft_err < 1e-6 && rounding && arc_err <= 0.05,
        format!("dft error {dft_err:.1e}, rounds exactly {rounding}, arc total error {arc_err:.1e}"),
    )
}

fn c10_vbeta() -> Outcome {
    let mut at_zero = 0.0f64;
    for (p, k) in [(5.0f64, 2u32), (10.0, 2), (5.0, 3)] {
        for m in [OscMethod::Direct3d, OscMethod::Reduced1d] {
            let v = circle::v_beta(0.0, p, k, m).unwrap().value();
            at_zero = at_zero.max((v - p.powi(3)).norm() / p.powi(3));
        }
    }
    let p = 5.0f64;
    let n = p.powi(6);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut gap = 0.0f64;
    for _ in 0..10 {
        // |β|n log-uniform in [1e-2, 4]; the 3-d panels outgrow their
        // node budget a little past 4
        let lam = 10f64.powf(rng.gen_range(-2.0..4f64.log10()));
        let beta = if rng.gen_bool(0.5) { lam } else { -lam } / n;
        let d = circle::v_beta(beta, p, 2, OscMethod::Direct3d).unwrap().value();
        let r = circle::v_beta(beta, p, 2, OscMethod::Reduced1d).unwrap().value();
        gap = gap.max((d - r).norm() / p.powi(3));
    }
    let decay = circle::decay_constant(10.0, 2, 0..=12).unwrap();
    outcome(
        at_zero <= 1e-9 && gap <= 1e-4 && decay <= 10.0,
        format!("|v(0) − P³|/P³ = {at_zero:.1e}, method gap {gap:.1e}·P³, decay constant {decay:.3}"),
    )
}

fn c11_series() -> Outcome {
    let runs: Vec<_> = (1..=20u64).into_par_iter().map(|n| singular_series(n, 6, 2, 30).unwrap()).collect();
    let far: Vec<(u64, f64)> = runs
        .iter()
        .filter(|r| r.discrepancy() > 0.05)
        .map(|r| (r.n, r.discrepancy()))
        .collect();
    let lowest = runs
        .iter()
        .map(|r| r.partial_sum.min(r.euler_product))
        .fold(f64::INFINITY, f64::min);
    // the partial sums themselves, recomputed from cube histograms
    let oracle_gap = [1u64, 9, 15, 20]
        .par_iter()
        .map(|&n| {
            let sum: f64 = (1..=30).map(|q| series_term_oracle(q, n, 6, 2)).sum();
            (sum - runs[n as usize - 1].partial_sum).abs()
        })
        .reduce(|| 0.0, f64::max);
    let concentration = primes_up_to(60)
        .into_par_iter()
        .filter(|&p| p >= 7)
        .map(|p| {
            let one = SeriesTable::new(p, 6, 2).unwrap().by_residue();
            let two = SeriesTable::new(p * p, 6, 2).unwrap().by_residue();
            two.iter()
                .enumerate()
                .map(|(n, &t)| (one[n % p as usize] + t).abs() * (p as f64).powf(1.5))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let far_text: Vec<String> = far.iter().map(|(n, d)| format!("n={n}: {d:.4}")).collect();
    outcome(
        far.is_empty() && lowest > 0.1 && concentration <= 10.0 && oracle_gap <= 1e-9,
        format!(
            "partial vs product over 0.05 at [{}], min value {lowest:.3}, concentration {concentration:.3}, partial sum vs oracle {oracle_gap:.1e}",
            far_text.join(", ")
        ),
    )
}

fn c12_chain() -> Outcome {
    let tail = multiplicity_tail(6.0, 2, 0.5, 1.0).unwrap();
    let chain = lower_bound_r(2, 2, 6.0, 0.5, 1.0).unwrap();
    let below = chain.rows.iter().filter(|r| (r.witness as f64) < r.bound).count();
    let brute = brute_unweighted(6, 2, 2);
    let witness_ok = chain
        .rows
        .iter()
        .all(|r| brute.get(r.n as usize).copied().unwrap_or(0) == r.witness);
    outcome(
        tail.holds && below == 0 && chain.all_hold && witness_ok,
        format!(
            "tail holds {}, rows below bound {below} of {}, witness = enumerated r(n) {witness_ok}",
            tail.holds,
            chain.rows.len()
        ),
    )
}

fn c13_ratio() -> Outcome {
    let r = ratio_report(2, 8, 18.0, DEFAULT_MAIN_TRUNCATION, 1).unwrap();
    outcome(
        (0.3..=3.0).contains(&r.mean_ratio),
        format!(
            "mean R(n)/main term {:.4} over n in [{}, {}], range [{:.3}, {:.3}]",
            r.mean_ratio, r.lo, r.hi, r.min_ratio, r.max_ratio
        ),
    )
}
