//! Exact integer and modular utilities.
//!
//! Everything here works on `u64` values; desk-scale moduli and box sizes
//! never come close to the limit, and intermediate products go through
//! `u128`.

use serde::Serialize;

use crate::error::{invalid, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    result
}

/// Reduce a signed integer into `0..m`.
#[inline]
pub fn reduce(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin. The first twelve primes as witnesses decide
/// primality for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes up to and including `n`, by a linear sieve.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut lpf = vec![0u32; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            primes.push(i as u64);
        }
        for &p in &primes {
            let ip = i * p as usize;
            if p as u32 > lpf[i] || ip > n {
                break;
            }
            lpf[ip] = p as u32;
        }
    }
    primes
}

/// An integer together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn recompose(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    /// `Some((p, e))` when the value is `p^e` with `e ≥ 1`.
    pub fn as_prime_power(&self) -> Option<(u64, u32)> {
        match self.factors.as_slice() {
            [single] => Some(*single),
            _ => None,
        }
    }
}

fn pollard_rho(n: u64) -> u64 {
    // Brent's variant, with batched gcds.
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let mut g = 1u64;
        let mut r = 1u64;
        let mut q = 1u64;
        const BATCH: u64 = 64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut done = 0;
            while done < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - done) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                done += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_into(d, out);
    split_into(n / d, out);
}

pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return invalid("cannot factorize 0");
    }
    let mut rest = n;
    let mut primes = Vec::new();
    let mut d = 2u64;
    while d <= 1_000_000 && d * d <= rest {
        while rest % d == 0 {
            primes.push(d);
            rest /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        split_into(rest, &mut primes);
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization { value: n, factors })
}

pub fn euler_phi(n: u64) -> u64 {
    let f = factorize(n.max(1)).expect("positive");
    f.factors()
        .iter()
        .fold(n.max(1), |acc, &(p, _)| acc / p * (p - 1))
}

/// Exponent of the largest power of `p` dividing `n` (`n > 0`).
pub fn valuation(p: u64, mut n: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// `τ` with `p^τ ‖ 3k`, and `γ = 2τ + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PAdicContext {
    pub p: u64,
    pub k: u32,
    pub tau: u32,
    pub gamma: u32,
}

pub fn padic_context(p: u64, k: u32) -> Result<PAdicContext> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if k < 2 {
        return invalid(format!("exponent k={k} must be at least 2"));
    }
    let tau = valuation(p, 3 * k as u64);
    Ok(PAdicContext {
        p,
        k,
        tau,
        gamma: 2 * tau + 1,
    })
}

/// Solve a system of congruences with pairwise coprime moduli.
/// Returns `(residue, modulus)` with `0 ≤ residue < modulus`.
pub fn crt_combine(system: &[(i64, u64)]) -> Result<(u64, u64)> {
    let mut acc = (0u64, 1u64);
    for &(r, m) in system {
        if m == 0 {
            return invalid("modulus 0 in congruence system");
        }
        if gcd(acc.1, m) != 1 {
            return invalid(format!("modulus {m} is not coprime to {}", acc.1));
        }
        let Some(big) = acc.1.checked_mul(m) else {
            return Err(crate::Error::Overflow("crt_combine"));
        };
        let r = reduce(r, m);
        // acc.0 + acc.1 * t ≡ r (mod m)
        let inv = mod_inverse(acc.1 % m, m).expect("coprime");
        let t = mul_mod(reduce(r as i64 - (acc.0 % m) as i64, m), inv, m);
        let x = (acc.0 as u128 + acc.1 as u128 * t as u128) % big as u128;
        acc = (x as u64, big);
    }
    Ok(acc)
}
