//! Complete exponential sums modulo `q`.
//!
//! * `S_k(q,a)   = Σ_{r=1}^{q} e_q(a r^k)`
//! * `S_k(q,a,b) = Σ_{r=1}^{q} e_q(a r^k + b r)`
//! * `S(q,a)     = Σ_{1≤𝐫≤q} e_q(a T(𝐫)^k)` with `T(𝐫) = r₁³ + r₂³ + r₃³`
//!
//! Phases are reduced modulo `q` in exact integer arithmetic and looked up in
//! a table of roots of unity, so large arguments such as `T(𝐫)^k` never lose
//! precision.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{pow_mod, reduce};
use crate::error::{guard, Result};

/// Largest modulus accepted by [`triple_sum_direct`], whose cost is `q³`.
pub const DIRECT_TRIPLE_MAX_Q: u64 = 300;

/// Table of `e(j/q)` for `j = 0..q`.
#[derive(Debug, Clone)]
pub struct RootsOfUnity {
    q: u64,
    table: Vec<Complex64>,
}

impl RootsOfUnity {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "modulus must be positive");
        let table = (0..q)
            .map(|j| {
                // sin_cos of 2πj/q, using symmetry so that e(1/4), e(1/2)
                // come out exact.
                let (s, c) = turn_sin_cos(j, q);
                Complex64::new(c, s)
            })
            .collect();
        RootsOfUnity { q, table }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `e(j/q)`; `j` must already be reduced.
    #[inline]
    pub fn at(&self, j: u64) -> Complex64 {
        self.table[j as usize]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.table
    }
}

/// `(sin, cos)` of `2π j/q` with the argument folded into the first octant.
pub(crate) fn turn_sin_cos(j: u64, q: u64) -> (f64, f64) {
    let j = j % q;
    // 8j/q determines the octant; work with exact integers.
    let (jj, qq) = (j as u128 * 8, q as u128);
    let octant = (jj / qq) as u32;
    let rem = jj - octant as u128 * qq; // in [0, q)
    let t = |num: u128| std::f64::consts::FRAC_PI_4 * (num as f64 / qq as f64);
    // angle = octant*π/4 + rem/q * π/4
    let (s, c) = match octant {
        0 => t(rem).sin_cos(),
        1 => {
            let (s, c) = t(qq - rem).sin_cos();
            (c, s)
        }
        2 => {
            let (s, c) = t(rem).sin_cos();
            (c, -s)
        }
        3 => {
            let (s, c) = t(qq - rem).sin_cos();
            (s, -c)
        }
        4 => {
            let (s, c) = t(rem).sin_cos();
            (-s, -c)
        }
        5 => {
            let (s, c) = t(qq - rem).sin_cos();
            (-c, -s)
        }
        6 => {
            let (s, c) = t(rem).sin_cos();
            (-c, s)
        }
        _ => {
            let (s, c) = t(qq - rem).sin_cos();
            (-s, c)
        }
    };
    (s, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumKind {
    Power,
    Twisted,
    Triple,
}

/// A complete exponential sum and the `(q, a)` it was evaluated at.
/// `a` is stored reduced modulo `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpSumValue {
    pub re: f64,
    pub im: f64,
    pub q: u64,
    pub a: u64,
    pub kind: SumKind,
}

impl ExpSumValue {
    fn new(value: Complex64, q: u64, a: u64, kind: SumKind) -> Self {
        ExpSumValue {
            re: value.re,
            im: value.im,
            q,
            a,
            kind,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm(&self) -> f64 {
        self.value().norm()
    }
}

pub fn power_sum(q: u64, a: i64, k: u32) -> ExpSumValue {
    let roots = RootsOfUnity::new(q);
    let a = reduce(a, q);
    let v = power_sum_with(&roots, a, k);
    ExpSumValue::new(v, q, a, SumKind::Power)
}

pub(crate) fn power_sum_with(roots: &RootsOfUnity, a: u64, k: u32) -> Complex64 {
    let q = roots.modulus();
    (1..=q)
        .map(|r| roots.at(crate::arith::mul_mod(a, pow_mod(r, k as u64, q), q)))
        .sum()
}

pub fn twisted_sum(q: u64, a: i64, b: i64, k: u32) -> ExpSumValue {
    let roots = RootsOfUnity::new(q);
    let (a, b) = (reduce(a, q), reduce(b, q));
    let v: Complex64 = (1..=q)
        .map(|r| {
            let ph = (a as u128 * pow_mod(r, k as u64, q) as u128 + b as u128 * r as u128)
                % q as u128;
            roots.at(ph as u64)
        })
        .sum();
    ExpSumValue::new(v, q, a, SumKind::Twisted)
}

/// Frequencies of `r³ mod q` over `r = 1..q`.
pub(crate) fn cube_histogram(q: u64) -> Vec<u64> {
    let mut h = vec![0u64; q as usize];
    for r in 1..=q {
        h[pow_mod(r, 3, q) as usize] += 1;
    }
    h
}

/// Cyclic convolution of two count vectors of the same length.
pub(crate) fn cyclic_convolve(a: &[u64], b: &[u64]) -> Vec<u64> {
    let m = a.len();
    let nz: Vec<(usize, u64)> = b
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i, v))
        .collect();
    let mut out = vec![0u64; m];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for &(j, y) in &nz {
            let t = if i + j >= m { i + j - m } else { i + j };
            out[t] += x * y;
        }
    }
    out
}

/// Frequencies of `T(𝐫) mod q` over `𝐫 ∈ [1,q]³`.
pub(crate) fn t_histogram(q: u64) -> Vec<u64> {
    let c = cube_histogram(q);
    let c2 = cyclic_convolve(&c, &c);
    cyclic_convolve(&c2, &c)
}

/// Frequencies of `T(𝐫)^k mod q` over `𝐫 ∈ [1,q]³`.
pub fn triple_value_histogram(q: u64, k: u32) -> Vec<u64> {
    let t = t_histogram(q);
    let mut h = vec![0u64; q as usize];
    for (x, &c) in t.iter().enumerate() {
        if c != 0 {
            h[pow_mod(x as u64, k as u64, q) as usize] += c;
        }
    }
    h
}

/// `S(q,a)` by direct enumeration of all `q³` triples.
pub fn triple_sum_direct(q: u64, a: i64, k: u32) -> Result<ExpSumValue> {
    guard("modulus q for direct triple sum", q as u128, DIRECT_TRIPLE_MAX_Q as u128)?;
    let roots = RootsOfUnity::new(q);
    let a = reduce(a, q);
    let cubes: Vec<u64> = (1..=q).map(|r| pow_mod(r, 3, q)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for &c1 in &cubes {
        for &c2 in &cubes {
            let c12 = (c1 + c2) % q;
            for &c3 in &cubes {
                let t = (c12 + c3) % q;
                let ph = crate::arith::mul_mod(a, pow_mod(t, k as u64, q), q);
                total += roots.at(ph);
            }
        }
    }
    Ok(ExpSumValue::new(total, q, a, SumKind::Triple))
}

/// Evaluates `S(q,a)` for one modulus through
/// `S(q,a) = q⁻¹ Σ_u S_3(q,u)³ S_k(q,a,−u)`.
///
/// The cubic sums `S_3(q,u)` are cached, so each further `a` costs `O(q²)`.
#[derive(Debug, Clone)]
pub struct TripleSumEvaluator {
    q: u64,
    k: u32,
    roots: RootsOfUnity,
    cubed: Vec<Complex64>,
    powers: Vec<u64>,
}

impl TripleSumEvaluator {
    pub fn new(q: u64, k: u32) -> Self {
        let roots = RootsOfUnity::new(q);
        let cubed = (0..q)
            .map(|u| {
                let s3 = power_sum_with(&roots, u, 3);
                s3 * s3 * s3
            })
            .collect();
        let powers = (1..=q).map(|r| pow_mod(r, k as u64, q)).collect();
        TripleSumEvaluator {
            q,
            k,
            roots,
            cubed,
            powers,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn exponent(&self) -> u32 {
        self.k
    }

    pub fn eval(&self, a: i64) -> ExpSumValue {
        let q = self.q;
        let a = reduce(a, q);
        let base: Vec<u64> = self
            .powers
            .iter()
            .map(|&rk| crate::arith::mul_mod(a, rk, q))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        // u runs over 1..=q; u = q contributes like u = 0.
        for u in 0..q {
            let w = self.cubed[u as usize];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            // S_k(q, a, -u) = Σ_r e_q(a r^k − u r)
            let mut twisted = Complex64::new(0.0, 0.0);
            let mut ur = 0u64; // u·r mod q, r starting at 1
            for &ph in &base {
                ur += u;
                if ur >= q {
                    ur -= q;
                }
                let t = if ph >= ur { ph - ur } else { ph + q - ur };
                twisted += self.roots.at(t);
            }
            total += w * twisted;
        }
        ExpSumValue::new(total / q as f64, q, a, SumKind::Triple)
    }
}

/// `S(q,a)` by the twisted-sum identity; see [`TripleSumEvaluator`].
pub fn triple_sum_fast(q: u64, a: i64, k: u32) -> ExpSumValue {
    TripleSumEvaluator::new(q, k).eval(a)
}

/// `S(q,a)` for every `a = 0..q` at once, from the histogram of
/// `T(𝐫)^k mod q`.
pub fn triple_sum_spectrum(q: u64, k: u32) -> Vec<Complex64> {
    let roots = RootsOfUnity::new(q);
    let hist = triple_value_histogram(q, k);
    let support: Vec<(u64, f64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(t, &c)| (t as u64, c as f64))
        .collect();
    (0..q)
        .map(|a| {
            let mut s = Complex64::new(0.0, 0.0);
            let mut acc = 0u64;
            let mut last = 0u64;
            for &(t, c) in &support {
                // a·t mod q, advanced incrementally along the sorted support
                acc = (acc + crate::arith::mul_mod(a, t - last, q)) % q;
                last = t;
                s += roots.at(acc) * c;
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(z: Complex64, re: f64, im: f64, tol: f64) -> bool {
        (z.re - re).abs() <= tol && (z.im - im).abs() <= tol
    }

    #[test]
    fn power_sum_examples() {
        assert!(close(power_sum(1, 1, 2).value(), 1.0, 0.0, 1e-12));
        assert!(close(power_sum(4, 1, 2).value(), 2.0, 2.0, 1e-12));
        let expect = 3.0 * (1.0 + 2.0 * (std::f64::consts::TAU / 9.0).cos());
        let v = power_sum(9, 1, 3).value();
        assert!(close(v, expect, 0.0, 1e-9), "{v}");
        assert!((expect - 7.59627).abs() < 1e-5);
    }

    #[test]
    fn twisted_sum_examples() {
        let a = twisted_sum(7, 3, 0, 2).value();
        let b = power_sum(7, 3, 2).value();
        assert!((a - b).norm() < 1e-12);
        assert!(close(twisted_sum(2, 1, 1, 2).value(), 2.0, 0.0, 1e-12));
        let v = twisted_sum(3, 1, 1, 2).value();
        assert!(close(v, 1.5, -0.8660254037844386, 1e-12), "{v}");
    }

    #[test]
    fn negative_arguments_reduce() {
        let v = twisted_sum(11, -3, -5, 3);
        assert_eq!(v.a, 8);
        let w = twisted_sum(11, 8, 6, 3);
        assert!((v.value() - w.value()).norm() < 1e-12);
    }

    #[test]
    fn triple_sum_examples() {
        assert!(close(triple_sum_direct(1, 1, 2).unwrap().value(), 1.0, 0.0, 1e-12));
        assert!(close(triple_sum_direct(2, 1, 2).unwrap().value(), 0.0, 0.0, 1e-12));
        assert!(close(triple_sum_fast(1, 1, 2).value(), 1.0, 0.0, 1e-12));
        assert!(triple_sum_direct(301, 1, 2).is_err());
    }

    #[test]
    fn triple_sum_small_oracle() {
        // 27-term enumeration written out independently.
        let mut oracle = Complex64::new(0.0, 0.0);
        for x in 1..=3u64 {
            for y in 1..=3u64 {
                for z in 1..=3u64 {
                    let t = (x.pow(3) + y.pow(3) + z.pow(3)).pow(2);
                    let ang = std::f64::consts::TAU * (t % 3) as f64 / 3.0;
                    oracle += Complex64::new(ang.cos(), ang.sin());
                }
            }
        }
        let d = triple_sum_direct(3, 1, 2).unwrap();
        assert!((d.value() - oracle).norm() < 1e-9);
        assert!(d.norm() <= 27.0);
    }

    #[test]
    fn fast_matches_direct() {
        for (q, a, k) in [(6u64, 1i64, 2u32), (25, 2, 3), (12, 5, 2), (49, 3, 3)] {
            let d = triple_sum_direct(q, a, k).unwrap().value();
            let f = triple_sum_fast(q, a, k).value();
            assert!((d - f).norm() < 1e-6 * (q as f64).powi(3), "q={q}");
        }
    }

    #[test]
    fn spectrum_matches_direct() {
        for q in [1u64, 2, 7, 9, 20] {
            let spec = triple_sum_spectrum(q, 2);
            for a in 0..q {
                let d = triple_sum_direct(q, a as i64, 2).unwrap().value();
                assert!((spec[a as usize] - d).norm() < 1e-9 * (q as f64).powi(3));
            }
        }
    }

    #[test]
    fn roots_table_exact_at_quarters() {
        let r = RootsOfUnity::new(8);
        assert_eq!(r.at(2), Complex64::new(0.0, 1.0));
        assert_eq!(r.at(4), Complex64::new(-1.0, 0.0));
        assert_eq!(r.at(6), Complex64::new(0.0, -1.0));
        let r = RootsOfUnity::new(1000);
        for j in 0..1000 {
            let ang = std::f64::consts::TAU * j as f64 / 1000.0;
            assert!((r.at(j) - Complex64::new(ang.cos(), ang.sin())).norm() < 1e-14);
        }
    }
}
