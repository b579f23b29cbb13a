//! Exact truncated convolution of non-negative integer sequences.
//!
//! Small inputs go through a sparse schoolbook loop. Large ones use number
//! theoretic transforms modulo up to four primes of the form `c·2^k + 1`
//! and recombine by Garner's algorithm into `u128`. The number of primes is
//! chosen from an a-priori bound on the output entries, so the result is
//! exact whenever it is returned.

use crate::error::{guard, Error, Result};

/// Longest transform supported; every prime below has `2^26 | p − 1`.
/// The primes stay below `2^32`, so residues fit in `u32` and products in
/// `u64`.
pub const MAX_TRANSFORM_LEN: usize = 1 << 26;

const PRIMES: [(u64, u64); 4] = [
    // (prime, primitive root)
    (469_762_049, 3),    // 7·2^26 + 1
    (1_811_939_329, 13), // 27·2^26 + 1
    (2_013_265_921, 31), // 15·2^27 + 1
    (2_281_701_377, 3),  // 34·2^26 + 1
];

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// In-place iterative radix-2 NTT over `ℤ/pℤ`; `a.len()` is a power of two.
fn ntt(a: &mut [u32], p: u64, g: u64, invert: bool) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(g, (p - 1) / len as u64, p);
        if invert {
            w = pow_mod(w, p - 2, p);
        }
        let half = len / 2;
        // Twiddles for this stage.
        let mut tw = Vec::with_capacity(half);
        let mut cur = 1u64;
        for _ in 0..half {
            tw.push(cur);
            cur = cur * w % p;
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(&tw) {
                let u = *x as u64;
                let v = *y as u64 * t % p;
                let s = u + v;
                *x = (if s >= p { s - p } else { s }) as u32;
                *y = (if u >= v { u - v } else { u + p - v }) as u32;
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = (*x as u64 * inv_n % p) as u32;
        }
    }
}

/// `Σ a · max b`, an upper bound for every entry of `a * b` (also of any
/// cyclic wrap of it).
fn entry_bound(a: &[u128], b: &[u128]) -> Option<u128> {
    let sum_a = a.iter().try_fold(0u128, |acc, &x| acc.checked_add(x))?;
    let sum_b = b.iter().try_fold(0u128, |acc, &x| acc.checked_add(x))?;
    let max_a = a.iter().copied().max().unwrap_or(0);
    let max_b = b.iter().copied().max().unwrap_or(0);
    let x = sum_a.checked_mul(max_b);
    let y = sum_b.checked_mul(max_a);
    match (x, y) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn primes_needed(bound: u128) -> Option<usize> {
    let mut prod = 1u128;
    for (i, &(p, _)) in PRIMES.iter().enumerate() {
        prod = prod.checked_mul(p as u128)?;
        if prod > bound {
            return Some(i + 1);
        }
    }
    None
}

fn sparse(a: &[u128]) -> Vec<(usize, u128)> {
    a.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i, v))
        .collect()
}

/// Schoolbook truncated convolution over the nonzero entries.
fn direct(a: &[u128], b: &[u128], n_max: usize) -> Result<Vec<u128>> {
    let sa = sparse(a);
    let sb = sparse(b);
    let mut out = vec![0u128; n_max + 1];
    for &(i, x) in &sa {
        if i > n_max {
            break;
        }
        for &(j, y) in &sb {
            let t = i + j;
            if t > n_max {
                break;
            }
            out[t] = x
                .checked_mul(y)
                .and_then(|v| out[t].checked_add(v))
                .ok_or(Error::Overflow("convolution"))?;
        }
    }
    Ok(out)
}

/// `c[n] = Σ_{i+j=n} a[i]·b[j]` for `n ≤ n_max`, exactly.
pub fn convolve_truncated(a: &[u128], b: &[u128], n_max: usize) -> Result<Vec<u128>> {
    let a = &a[..a.len().min(n_max + 1)];
    let b = &b[..b.len().min(n_max + 1)];
    let na = a.iter().filter(|&&x| x != 0).count() as u128;
    let nb = b.iter().filter(|&&x| x != 0).count() as u128;
    let len = (a.len() + b.len()).min(n_max + 1).max(1);
    let l = len.next_power_of_two() as u128;
    let ntt_cost = 12 * l * (128 - l.leading_zeros() as u128);
    if na * nb <= ntt_cost || len < 64 {
        return direct(a, b, n_max);
    }
    let bound = entry_bound(a, b).ok_or(Error::Overflow("convolution"))?;
    let primes = primes_needed(bound).ok_or(Error::Overflow("convolution"))?;
    let need = a.len() + b.len() - 1;
    if need <= n_max + 1 {
        // No truncation wrap: plain cyclic convolution of length ≥ need.
        let l = need.next_power_of_two();
        guard("transform length", l as u128, MAX_TRANSFORM_LEN as u128)?;
        let mut out = cyclic_exact(a, b, l, primes, need);
        out.resize(n_max + 1, 0);
        return Ok(out);
    }
    // Cyclic length L ≥ n_max+1; entries n ≤ need−1−L receive wrapped terms,
    // and those are recomputed by a smaller truncated convolution.
    let l = (n_max + 1).next_power_of_two();
    guard("transform length", l as u128, MAX_TRANSFORM_LEN as u128)?;
    let mut out = cyclic_exact(a, b, l, primes, n_max + 1);
    if need > l {
        let polluted = need - 1 - l;
        let fix = convolve_truncated(a, b, polluted)?;
        out[..=polluted].copy_from_slice(&fix);
    }
    Ok(out)
}

/// Cyclic convolution modulo `l` recovered exactly, first `keep` entries.
fn cyclic_exact(a: &[u128], b: &[u128], l: usize, primes: usize, keep: usize) -> Vec<u128> {
    let same = std::ptr::eq(a, b);
    let mut residues: Vec<Vec<u32>> = Vec::with_capacity(primes);
    for &(p, g) in &PRIMES[..primes] {
        let mut fa = vec![0u32; l];
        for (i, &x) in a.iter().enumerate() {
            fa[i % l] = ((fa[i % l] as u128 + x % p as u128) % p as u128) as u32;
        }
        ntt(&mut fa, p, g, false);
        if same {
            for x in fa.iter_mut() {
                *x = (*x as u64 * *x as u64 % p) as u32;
            }
        } else {
            let mut fb = vec![0u32; l];
            for (i, &x) in b.iter().enumerate() {
                fb[i % l] = ((fb[i % l] as u128 + x % p as u128) % p as u128) as u32;
            }
            ntt(&mut fb, p, g, false);
            for (x, &y) in fa.iter_mut().zip(&fb) {
                *x = (*x as u64 * y as u64 % p) as u32;
            }
        }
        ntt(&mut fa, p, g, true);
        fa.truncate(keep);
        fa.shrink_to_fit();
        residues.push(fa);
    }
    let garner = Garner::new(primes);
    (0..keep)
        .map(|i| {
            let mut r = [0u64; 4];
            for (slot, v) in r.iter_mut().zip(&residues) {
                *slot = v[i] as u64;
            }
            garner.combine(&r)
        })
        .collect()
}

/// Mixed-radix reconstruction from residues modulo the first `n` primes.
pub(crate) struct Garner {
    n: usize,
    inv: [[u64; 4]; 4],
}

impl Garner {
    pub(crate) fn new(n: usize) -> Self {
        let mut inv = [[0u64; 4]; 4];
        for i in 0..n {
            for j in 0..i {
                let (pi, _) = PRIMES[i];
                let pj = PRIMES[j].0 % pi;
                inv[i][j] = pow_mod(pj, pi - 2, pi);
            }
        }
        Garner { n, inv }
    }

    pub(crate) fn combine(&self, r: &[u64]) -> u128 {
        let mut digits = [0u64; 4];
        for i in 0..self.n {
            let p = PRIMES[i].0;
            let mut x = r[i] % p;
            for j in 0..i {
                let d = digits[j] % p;
                x = (x + p - d) % p * self.inv[i][j] % p;
            }
            digits[i] = x;
        }
        let mut val = 0u128;
        for i in (0..self.n).rev() {
            val = val * PRIMES[i].0 as u128 + digits[i] as u128;
        }
        val
    }
}

/// `w^{*s}` truncated at `n_max`, by repeated squaring.
pub fn power_truncated(w: &[u128], s: u32, n_max: usize) -> Result<Vec<u128>> {
    let mut result: Option<Vec<u128>> = None;
    let mut base = w[..w.len().min(n_max + 1)].to_vec();
    let mut e = s;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve_truncated(&r, &base, n_max)?,
            });
        }
        e >>= 1;
        if e > 0 {
            base = convolve_truncated(&base, &base, n_max)?;
        }
    }
    let mut out = result.unwrap_or_else(|| vec![1]);
    out.resize(n_max + 1, 0);
    Ok(out)
}
