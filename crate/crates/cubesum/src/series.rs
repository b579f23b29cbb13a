//! The sums `S_n(q)`, `S*_s(q)`, local factors `σ(p)` and the singular
//! series `𝔖(n)`.
//!
//! `S_n(q) = Σ_{(a,q)=1} (q⁻³ S(q,a))^s e_q(−na)` and
//! `S*_s(q) = Σ_{(a,q)=1} |q⁻³ S(q,a)|^s`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd, is_prime, primes_up_to};
use crate::error::{guard, invalid, Result};
use crate::expsums::{triple_sum_spectrum, RootsOfUnity};

/// Largest modulus whose `S_n(q)` is computed (cost `q²`).
pub const SERIES_MODULUS_GUARD: u64 = 20_000;
/// Default truncation of the singular series.
pub const DEFAULT_TRUNCATION: u64 = 50;
/// Default number of prime-power levels per local factor.
pub const DEFAULT_LEVELS: u32 = 2;
/// Local factors in the Euler product use every level with `p^l` up to this
/// cap, and never fewer than the requested minimum.
pub const DEFAULT_LEVEL_CAP: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub q: u64,
    pub re: f64,
    pub im: f64,
    pub abs_value: f64,
}

impl SeriesTerm {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// The normalized sums `(q⁻³ S(q,a))^s` over units `a`, ready to be
/// twisted by any `n`.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    q: u64,
    s: u32,
    k: u32,
    units: Vec<(u64, Complex64)>,
    abs_value: f64,
}

impl SeriesTable {
    pub fn new(q: u64, s: u32, k: u32) -> Result<Self> {
        if q == 0 {
            return invalid("modulus must be positive");
        }
        guard("series modulus q", q as u128, SERIES_MODULUS_GUARD as u128)?;
        let spec = triple_sum_spectrum(q, k);
        let scale = (q as f64).powi(-3);
        let units: Vec<(u64, Complex64)> = (0..q)
            .filter(|&a| gcd(a, q) == 1)
            .map(|a| (a, (spec[a as usize] * scale).powu(s)))
            .collect();
        let abs_value = units.iter().map(|(_, z)| z.norm()).sum();
        Ok(SeriesTable {
            q,
            s,
            k,
            units,
            abs_value,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `S*_s(q)`.
    pub fn abs_value(&self) -> f64 {
        self.abs_value
    }

    /// `S_n(q)`.
    pub fn term(&self, n: u64) -> Complex64 {
        let q = self.q;
        let roots = RootsOfUnity::new(q);
        let n = n % q;
        self.units
            .iter()
            .map(|&(a, z)| z * roots.at((q - crate::arith::mul_mod(n, a, q)) % q))
            .sum()
    }

    /// Real parts of `S_n(q)` for `n = 0..q`.
    pub fn by_residue(&self) -> Vec<f64> {
        let q = self.q;
        let roots = RootsOfUnity::new(q);
        (0..q)
            .map(|n| {
                self.units
                    .iter()
                    .map(|&(a, z)| {
                        let ph = (q - crate::arith::mul_mod(n, a, q)) % q;
                        (z * roots.at(ph)).re
                    })
                    .sum()
            })
            .collect()
    }
}

pub fn series_term(q: u64, n: u64, s: u32, k: u32) -> Result<SeriesTerm> {
    let t = SeriesTable::new(q, s, k)?;
    let v = t.term(n);
    Ok(SeriesTerm {
        q,
        re: v.re,
        im: v.im,
        abs_value: t.abs_value(),
    })
}

/// Truncated local factor `Σ_{l≤L} S_n(p^l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFactor {
    pub p: u64,
    pub levels: u32,
    pub terms: Vec<f64>,
    pub partial_sum: f64,
    /// `p^{(L+1)(1−s/k)}`, a heuristic size for the omitted levels.
    pub tail_estimate: f64,
}

pub fn sigma_p(p: u64, n: u64, s: u32, k: u32, levels: u32) -> Result<LocalFactor> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    let top = (p as u128).checked_pow(levels).unwrap_or(u128::MAX);
    guard("prime power p^L", top, SERIES_MODULUS_GUARD as u128)?;
    let mut terms = vec![1.0];
    let mut q = 1u64;
    for _ in 0..levels {
        q *= p;
        terms.push(SeriesTable::new(q, s, k)?.term(n).re);
    }
    let partial_sum = terms.iter().sum();
    let tail_estimate = (p as f64).powf((levels as f64 + 1.0) * (1.0 - s as f64 / k as f64));
    Ok(LocalFactor {
        p,
        levels,
        terms,
        partial_sum,
        tail_estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSeriesResult {
    pub n: u64,
    pub s: u32,
    pub k: u32,
    pub truncation: u64,
    pub partial_sum: f64,
    pub euler_product: f64,
    pub factors: Vec<LocalFactor>,
    /// Heuristic size of the omitted moduli: `Σ_{Q<q≤2Q} S*_s(q)` scaled by
    /// the geometric factor `1/(1 − 2^{−1/k})`.
    pub tail_bound: f64,
    pub positive: bool,
}

impl SingularSeriesResult {
    pub fn discrepancy(&self) -> f64 {
        (self.partial_sum - self.euler_product).abs()
    }
}

/// Options for [`singular_series_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesOptions {
    pub truncation: u64,
    pub min_levels: u32,
    pub level_cap: u64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            truncation: DEFAULT_TRUNCATION,
            min_levels: DEFAULT_LEVELS,
            level_cap: DEFAULT_LEVEL_CAP,
        }
    }
}

pub(crate) fn levels_for(p: u64, min_levels: u32, cap: u64) -> u32 {
    let mut l = 0;
    let mut q = 1u64;
    while q.saturating_mul(p) <= cap {
        q *= p;
        l += 1;
    }
    l.max(min_levels)
}

pub fn singular_series(n: u64, s: u32, k: u32, truncation: u64) -> Result<SingularSeriesResult> {
    singular_series_with(
        n,
        s,
        k,
        SeriesOptions {
            truncation,
            ..SeriesOptions::default()
        },
    )
}

pub fn singular_series_with(
    n: u64,
    s: u32,
    k: u32,
    opts: SeriesOptions,
) -> Result<SingularSeriesResult> {
    let q_max = opts.truncation;
    if q_max == 0 {
        return invalid("truncation must be at least 1");
    }
    guard("series truncation", 2 * q_max as u128, SERIES_MODULUS_GUARD as u128)?;
    let terms: Vec<(f64, f64)> = (1..=2 * q_max)
        .into_par_iter()
        .map(|q| {
            let t = SeriesTable::new(q, s, k)?;
            Ok((t.term(n).re, t.abs_value()))
        })
        .collect::<Result<_>>()?;
    let partial_sum: f64 = terms[..q_max as usize].iter().map(|t| t.0).sum();
    let tail_raw: f64 = terms[q_max as usize..].iter().map(|t| t.1).sum();
    let tail_bound = tail_raw / (1.0 - 2f64.powf(-1.0 / k as f64));

    let factors: Vec<LocalFactor> = primes_up_to(q_max)
        .into_par_iter()
        .map(|p| sigma_p(p, n, s, k, levels_for(p, opts.min_levels, opts.level_cap)))
        .collect::<Result<_>>()?;
    let euler_product = factors.iter().map(|f| f.partial_sum).product();
    Ok(SingularSeriesResult {
        n,
        s,
        k,
        truncation: q_max,
        partial_sum,
        euler_product,
        factors,
        tail_bound,
        positive: partial_sum > 0.0,
    })
}

/// Truncated singular series at many `n`: the real parts of `S_n(q)` for
/// every residue class are tabulated once per modulus.
#[derive(Debug, Clone)]
pub struct SingularSeriesEvaluator {
    s: u32,
    k: u32,
    truncation: u64,
    tables: Vec<Vec<f64>>,
}

impl SingularSeriesEvaluator {
    pub fn new(s: u32, k: u32, truncation: u64) -> Result<Self> {
        if truncation == 0 {
            return invalid("truncation must be at least 1");
        }
        guard("series truncation", truncation as u128, SERIES_MODULUS_GUARD as u128)?;
        let tables = (1..=truncation)
            .into_par_iter()
            .map(|q| Ok(SeriesTable::new(q, s, k)?.by_residue()))
            .collect::<Result<_>>()?;
        Ok(SingularSeriesEvaluator {
            s,
            k,
            truncation,
            tables,
        })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    /// `Σ_{q≤Q} S_n(q)`.
    pub fn eval(&self, n: u64) -> f64 {
        self.tables
            .iter()
            .map(|t| t[(n % t.len() as u64) as usize])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_examples() {
        let t = series_term(1, 17, 6, 2).unwrap();
        assert_eq!((t.re, t.im, t.abs_value), (1.0, 0.0, 1.0));
        for s in 1..5 {
            for n in 0..4 {
                let t = series_term(2, n, s, 2).unwrap();
                assert!(t.value().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn multiplicative_on_six() {
        let a = series_term(6, 1, 5, 2).unwrap().value();
        let b = series_term(2, 1, 5, 2).unwrap().value();
        let c = series_term(3, 1, 5, 2).unwrap().value();
        assert!((a - b * c).norm() < 1e-9);
    }

    #[test]
    fn sigma_examples() {
        let f = sigma_p(5, 3, 6, 2, 0).unwrap();
        assert_eq!(f.partial_sum, 1.0);
        let f = sigma_p(2, 1, 6, 2, 1).unwrap();
        assert!((f.partial_sum - 1.0).abs() < 1e-12);
        let f = sigma_p(3, 4, 6, 2, 2).unwrap();
        let table = crate::localsolve::local_count_table(3, 2, 6, 2).unwrap();
        let rhs = crate::localsolve::scaled_count(table.count(4), 9, 6);
        assert!((f.partial_sum - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn truncation_one_is_one() {
        let r = singular_series(7, 6, 2, 1).unwrap();
        assert_eq!(r.partial_sum, 1.0);
    }

    #[test]
    fn by_residue_matches_term() {
        let t = SeriesTable::new(12, 5, 2).unwrap();
        let all = t.by_residue();
        for n in 0..12 {
            assert!((all[n as usize] - t.term(n).re).abs() < 1e-12);
        }
    }

    #[test]
    fn levels_rule() {
        assert_eq!(levels_for(2, 2, 256), 8);
        assert_eq!(levels_for(17, 2, 256), 2);
        assert_eq!(levels_for(31, 2, 256), 2);
        assert_eq!(levels_for(5, 1, 256), 3);
    }
}
