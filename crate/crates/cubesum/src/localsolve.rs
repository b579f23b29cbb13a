//! Residue classes of sums of three cubes and local solution counts.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{gcd, is_prime, pow_mod, padic_context};
use crate::error::{guard, invalid, Error, Result};
use crate::expsums::cube_histogram;

/// Largest modulus `p^h` for residue-set enumeration.
pub const RESIDUE_MODULUS_GUARD: u64 = 100_000;
/// Limit on `s · (p^h)²`, the cost of the convolution behind [`local_count`].
pub const LOCAL_COUNT_COST_GUARD: u128 = 400_000_000;
/// Limit on `q²` for [`congruence_count`].
pub const CONGRUENCE_COST_GUARD: u128 = 1_000_000_000;

/// A subset of `ℤ/mℤ` as a membership array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueSet {
    modulus: u64,
    members: Vec<bool>,
}

impl ResidueSet {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, x: u64) -> bool {
        self.members[(x % self.modulus) as usize]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|&b| b)
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u64)
    }

    pub fn missing(&self) -> impl Iterator<Item = u64> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| i as u64)
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.members
    }
}

fn check_prime_power(p: u64, h: u32) -> Result<u64> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    let m = (p as u128).checked_pow(h).unwrap_or(u128::MAX);
    guard("modulus p^h", m, RESIDUE_MODULUS_GUARD as u128)?;
    Ok(m as u64)
}

/// `{ T(𝐱) mod p^h : 𝐱 ∈ (ℤ/p^hℤ)³, p ∤ x₁ }`.
pub fn m33_set(p: u64, h: u32) -> Result<ResidueSet> {
    let m = check_prime_power(p, h)?;
    let mu = m as usize;
    let mut cubes = vec![false; mu];
    let mut unit_cubes = vec![false; mu];
    for x in 0..m {
        let c = pow_mod(x, 3, m) as usize;
        cubes[c] = true;
        if x % p != 0 {
            unit_cubes[c] = true;
        }
    }
    let cube_list: Vec<usize> = (0..mu).filter(|&i| cubes[i]).collect();
    // unit cube + cube
    let mut two = vec![false; mu];
    for a in (0..mu).filter(|&i| unit_cubes[i]) {
        for &b in &cube_list {
            two[(a + b) % mu] = true;
        }
    }
    let mut three = vec![false; mu];
    let mut filled = 0;
    'outer: for a in (0..mu).filter(|&i| two[i]) {
        for &b in &cube_list {
            let t = (a + b) % mu;
            if !three[t] {
                three[t] = true;
                filled += 1;
                if filled == mu {
                    break 'outer;
                }
            }
        }
    }
    Ok(ResidueSet {
        modulus: m,
        members: three,
    })
}

/// `M_n(p^h)` and `M*_n(p^h)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalCount {
    pub p: u64,
    pub h: u32,
    pub s: u32,
    pub k: u32,
    pub n: u64,
    pub count: BigUint,
    pub count_star: BigUint,
}

/// Counts for every residue `n mod p^h` at once.
#[derive(Debug, Clone)]
pub struct LocalCountTable {
    pub p: u64,
    pub h: u32,
    pub s: u32,
    pub k: u32,
    counts: Vec<BigUint>,
    counts_star: Vec<BigUint>,
}

impl LocalCountTable {
    pub fn modulus(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn count(&self, n: u64) -> &BigUint {
        &self.counts[(n % self.modulus()) as usize]
    }

    pub fn count_star(&self, n: u64) -> &BigUint {
        &self.counts_star[(n % self.modulus()) as usize]
    }

    pub fn get(&self, n: u64) -> LocalCount {
        LocalCount {
            p: self.p,
            h: self.h,
            s: self.s,
            k: self.k,
            n: n % self.modulus(),
            count: self.count(n).clone(),
            count_star: self.count_star(n).clone(),
        }
    }
}

fn big_cyclic_convolve(a: &[BigUint], b: &[u64]) -> Vec<BigUint> {
    let m = a.len();
    let nz: Vec<(usize, u64)> = b
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i, v))
        .collect();
    let mut out = vec![BigUint::zero(); m];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for &(j, y) in &nz {
            let t = (i + j) % m;
            out[t] += x * y;
        }
    }
    out
}

/// Frequencies of `T(𝐲)^k mod m` over `𝐲 ∈ (ℤ/mℤ)³`, plus the frequencies
/// restricted to `p ∤ y₁` and `p ∤ T(𝐲)`.
fn single_triple_counts(p: u64, m: u64, k: u32) -> (Vec<u64>, Vec<u64>) {
    let mu = m as usize;
    let all = cube_histogram(m);
    let mut units = vec![0u64; mu];
    for x in 1..=m {
        if x % p != 0 {
            units[pow_mod(x, 3, m) as usize] += 1;
        }
    }
    let rest = crate::expsums::cyclic_convolve(&all, &all);
    let t_all = crate::expsums::cyclic_convolve(&rest, &all);
    let t_star = crate::expsums::cyclic_convolve(&rest, &units);
    let mut full = vec![0u64; mu];
    let mut star = vec![0u64; mu];
    for t in 0..mu {
        let tk = pow_mod(t as u64, k as u64, m) as usize;
        full[tk] += t_all[t];
        if (t as u64) % p != 0 {
            star[tk] += t_star[t];
        }
    }
    (full, star)
}

/// Exact `M_n(p^h)` and `M*_n(p^h)` for all `n` by `s`-fold cyclic
/// convolution of the single-triple frequencies.
pub fn local_count_table(p: u64, h: u32, s: u32, k: u32) -> Result<LocalCountTable> {
    let m = check_prime_power(p, h)?;
    if s == 0 {
        return invalid("need at least one summand");
    }
    guard(
        "local count cost s·(p^h)²",
        s as u128 * (m as u128) * (m as u128),
        LOCAL_COUNT_COST_GUARD,
    )?;
    let mu = m as usize;
    let (full, star) = single_triple_counts(p, m, k);
    let mut counts: Vec<BigUint> = full.iter().map(|&c| BigUint::from(c)).collect();
    let mut counts_star: Vec<BigUint> = star.iter().map(|&c| BigUint::from(c)).collect();
    for _ in 1..s {
        counts = big_cyclic_convolve(&counts, &full);
        counts_star = big_cyclic_convolve(&counts_star, &full);
    }
    debug_assert_eq!(counts.len(), mu);
    Ok(LocalCountTable {
        p,
        h,
        s,
        k,
        counts,
        counts_star,
    })
}

pub fn local_count(p: u64, h: u32, s: u32, n: u64, k: u32) -> Result<LocalCount> {
    Ok(local_count_table(p, h, s, k)?.get(n))
}

/// Both sides of `Σ_{l≤h} S_n(p^l) = M_n(p^h)·p^{h(1−3s)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityCheck {
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs: f64,
    pub discrepancy: f64,
}

pub fn orthogonality_check(p: u64, h: u32, s: u32, n: u64, k: u32) -> Result<OrthogonalityCheck> {
    let table = local_count_table(p, h, s, k)?;
    let mut lhs = num_complex::Complex64::new(0.0, 0.0);
    let mut q = 1u64;
    for _ in 0..=h {
        lhs += crate::series::series_term(q, n, s, k)?.value();
        q *= p;
    }
    let m = table.modulus();
    let rhs = scaled_count(table.count(n), m, s);
    Ok(OrthogonalityCheck {
        lhs_re: lhs.re,
        lhs_im: lhs.im,
        rhs,
        discrepancy: (lhs - rhs).norm(),
    })
}

/// `count · m^{1−3s}` evaluated without overflow.
pub(crate) fn scaled_count(count: &BigUint, m: u64, s: u32) -> f64 {
    let denom = BigUint::from(m).pow(3 * s - 1);
    ratio_to_f64(count, &denom)
}

pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // Shift both into f64 range, keeping 64 significant bits of each.
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let nf = (num >> ns as usize).to_f64().unwrap();
    let df = (den >> ds as usize).to_f64().unwrap();
    nf / df * 2f64.powi((ns - ds) as i32)
}

/// Whether every residue modulo `3^k` is a sum of `u` values `t^k`, with
/// `t` ranging over `ℳ_{3,3}(3^k)`.
pub fn residue_coverage(k: u32, u: u32) -> Result<bool> {
    let m = (3u128).checked_pow(k).unwrap_or(u128::MAX);
    guard("modulus 3^k", m, RESIDUE_MODULUS_GUARD as u128)?;
    let m = m as u64;
    let mu = m as usize;
    let set = m33_set(3, k)?;
    let mut powers = vec![false; mu];
    for t in set.members() {
        powers[pow_mod(t, k as u64, m) as usize] = true;
    }
    let plist: Vec<usize> = (0..mu).filter(|&i| powers[i]).collect();
    let mut reach = vec![false; mu];
    reach[0] = true;
    for _ in 0..u {
        let mut next = vec![false; mu];
        for i in (0..mu).filter(|&i| reach[i]) {
            for &x in &plist {
                next[(i + x) % mu] = true;
            }
        }
        reach = next;
    }
    Ok(reach.iter().all(|&b| b))
}

/// Smallest `s` for which `M*_n(p^γ) > 0` is guaranteed for every `n`.
///
/// With `p^τ ‖ 3k`: for `p = 3` the threshold is `(9/4)·(k, φ(3^γ))`;
/// for `p = 2`, `τ > 0`, `k > 2` it is `2^{τ+2}`; for `p = k = 2` it is 5;
/// otherwise `p/(p−1)·(k, p^τ(p−1))`.
pub fn solubility_threshold(p: u64, k: u32) -> Result<u32> {
    let ctx = padic_context(p, k)?;
    let k64 = k as u64;
    let s = if p == 3 {
        let phi = 2 * 3u64.pow(ctx.gamma - 1);
        (9 * gcd(k64, phi)).div_ceil(4)
    } else if p == 2 && ctx.tau > 0 {
        if k == 2 {
            5
        } else {
            1u64 << (ctx.tau + 2)
        }
    } else {
        let g = gcd(k64, p.pow(ctx.tau) * (p - 1));
        (p * g).div_ceil(p - 1)
    };
    Ok(s as u32)
}

/// `N(q,P)`: the number of `2h`-tuples of triples in `{0..⌊P⌋}³` with
/// `Σ T(𝐱_i)^k ≡ Σ T(𝐲_i)^k (mod q)`.
pub fn congruence_count(q: u64, p: f64, h: u32, k: u32) -> Result<u128> {
    if q == 0 {
        return invalid("modulus must be positive");
    }
    if !(p >= 0.0) || !p.is_finite() {
        return invalid("box size must be a finite non-negative number");
    }
    guard(
        "congruence count cost h·q²",
        (h.max(1) as u128) * (q as u128) * (q as u128),
        CONGRUENCE_COST_GUARD,
    )?;
    let top = p.floor() as u64;
    guard("box size for congruence count", top as u128, 2000)?;
    let qu = q as usize;
    let mut single = vec![0u128; qu];
    let mut cubes = vec![0u128; qu];
    for x in 0..=top {
        cubes[pow_mod(x, 3, q) as usize] += 1;
    }
    let c2 = conv_u128(&cubes, &cubes)?;
    let c3 = conv_u128(&c2, &cubes)?;
    for (t, &c) in c3.iter().enumerate() {
        single[pow_mod(t as u64, k as u64, q) as usize] += c;
    }
    let mut dist = vec![0u128; qu];
    dist[0] = 1;
    for _ in 0..h {
        dist = conv_u128(&dist, &single)?;
    }
    dist.iter().try_fold(0u128, |acc, &d| {
        d.checked_mul(d)
            .and_then(|x| acc.checked_add(x))
            .ok_or(Error::Overflow("congruence_count"))
    })
}

fn conv_u128(a: &[u128], b: &[u128]) -> Result<Vec<u128>> {
    let m = a.len();
    let mut out = vec![0u128; m];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y == 0 {
                continue;
            }
            let t = (i + j) % m;
            out[t] = x
                .checked_mul(y)
                .and_then(|v| out[t].checked_add(v))
                .ok_or(Error::Overflow("congruence_count"))?;
        }
    }
    Ok(out)
}
