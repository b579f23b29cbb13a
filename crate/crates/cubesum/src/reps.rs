//! Smooth numbers, the weights `r_3` and `s_3`, and the exact counting
//! functions `R(n)`, `r(n)` and `R_η(n)`.

use serde::Serialize;

use crate::convolution::{power_truncated, MAX_TRANSFORM_LEN};
use crate::error::{guard, invalid, Error, Result};

/// `ν` in the mean-value bound `Σ s_3(x)² ≪ X^{1+ν}`.
pub const NU: f64 = 0.08290523;
/// Largest sieve limit.
pub const SIEVE_LIMIT_GUARD: u64 = 100_000_000;
/// Largest `⌊P⌋` for a weight table, which is a dense array of length
/// `3⌊P⌋³ + 1`.
pub const WEIGHT_BOX_GUARD: u64 = 400;
/// Default smoothness exponent.
pub const DEFAULT_ETA: f64 = 0.1;

/// `⌊P^η⌋`, nudged so that exact powers such as `100^{0.5}` are not lost to
/// rounding.
pub fn smoothness_bound(p: f64, eta: f64) -> u64 {
    (p.powf(eta) * (1.0 + 1e-12)).floor() as u64
}

/// Least-prime-factor sieve and membership in `𝒜(X,R)`.
#[derive(Debug, Clone)]
pub struct SmoothSieve {
    limit: u64,
    bound: u64,
    lpf: Vec<u32>,
    smooth: Vec<bool>,
}

impl SmoothSieve {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Least prime factor of `m` (`1` for `m = 1`).
    pub fn least_prime_factor(&self, m: u64) -> u64 {
        self.lpf[m as usize] as u64
    }

    /// Whether `m ∈ 𝒜(X,R)`; false for `m = 0` and `m > X`.
    pub fn contains(&self, m: u64) -> bool {
        m >= 1 && m <= self.limit && self.smooth[m as usize]
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.limit).filter(|&m| self.smooth[m as usize])
    }

    pub fn count(&self) -> u64 {
        self.smooth.iter().filter(|&&b| b).count() as u64
    }
}

pub fn smooth_sieve(limit: u64, bound: u64) -> Result<SmoothSieve> {
    guard("sieve limit", limit as u128, SIEVE_LIMIT_GUARD as u128)?;
    let n = limit as usize;
    let mut lpf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    if n >= 1 {
        lpf[1] = 1;
    }
    for i in 2..=n {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            primes.push(i as u32);
        }
        let li = lpf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > li || ip > n {
                break;
            }
            lpf[ip] = p;
        }
    }
    let mut smooth = vec![false; n + 1];
    if n >= 1 {
        smooth[1] = true;
    }
    for m in 2..=n {
        let p = lpf[m] as usize;
        smooth[m] = p as u64 <= bound && smooth[m / p];
    }
    Ok(SmoothSieve {
        limit,
        bound,
        lpf,
        smooth,
    })
}

/// Multiplicities `r_3(x)` (or `s_3(x)`) of sums of three cubes.
#[derive(Debug, Clone, Serialize)]
pub struct WeightTable {
    pub p: f64,
    pub eta: Option<f64>,
    /// Smallest coordinate value: 1 for the triples `1 ≤ 𝐱 ≤ P`, 0 for the
    /// box `0 ≤ 𝐱 ≤ P`.
    pub lower: u64,
    #[serde(skip)]
    weights: Vec<u32>,
}

impl WeightTable {
    pub fn top(&self) -> u64 {
        self.p.floor() as u64
    }

    /// Weight at `x`; zero outside the support.
    pub fn get(&self, x: u64) -> u64 {
        self.weights.get(x as usize).copied().unwrap_or(0) as u64
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.weights
    }

    pub fn max_index(&self) -> u64 {
        self.weights.len() as u64 - 1
    }

    /// `(x, weight)` for every `x` of positive weight, increasing.
    pub fn support(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(x, &w)| (x as u64, w as u64))
    }

    pub fn mass(&self) -> u128 {
        self.weights.iter().map(|&w| w as u128).sum()
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.weights.iter().map(|&w| (w as u128) * (w as u128)).sum()
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0) as u64
    }
}

fn validate_box(p: f64) -> Result<u64> {
    if !(p >= 0.0) || !p.is_finite() {
        return invalid("box size P must be finite and non-negative");
    }
    let top = p.floor() as u64;
    guard("box size ⌊P⌋", top as u128, WEIGHT_BOX_GUARD as u128)?;
    Ok(top)
}

fn build_weights(top: u64, lower: u64, first_two: &dyn Fn(u64) -> bool) -> Vec<u32> {
    let len = (3 * top.pow(3) + 1) as usize;
    let mut w = vec![0u32; len];
    let restricted: Vec<usize> = (lower..=top)
        .filter(|&x| first_two(x))
        .map(|x| x.pow(3) as usize)
        .collect();
    let all: Vec<usize> = (lower..=top).map(|x| x.pow(3) as usize).collect();
    for &a in &restricted {
        for &b in &restricted {
            let ab = a + b;
            for &c in &all {
                w[ab + c] += 1;
            }
        }
    }
    w
}

/// `r_3(x)`, or `s_3(x)` when `eta` is given, over triples `1 ≤ 𝐱 ≤ P`.
pub fn weight_table(p: f64, eta: Option<f64>) -> Result<WeightTable> {
    let top = validate_box(p)?;
    let weights = match eta {
        None => build_weights(top, 1, &|_| true),
        Some(eta) => {
            if !(eta > 0.0) {
                return invalid("smoothness exponent η must be positive");
            }
            let sieve = smooth_sieve(top, smoothness_bound(p, eta))?;
            build_weights(top, 1, &|x| sieve.contains(x))
        }
    };
    Ok(WeightTable {
        p,
        eta,
        lower: 1,
        weights,
    })
}

/// Multiplicities over the box `0 ≤ 𝐱 ≤ P`, used with the congruence
/// count `N(q,P)`.
pub fn weight_table_with_origin(p: f64) -> Result<WeightTable> {
    let top = validate_box(p)?;
    Ok(WeightTable {
        p,
        eta: None,
        lower: 0,
        weights: build_weights(top, 0, &|_| true),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// `R(n)`: tuples weighted by `r_3`.
    Weighted,
    /// `r(n)`: each tuple of sums of three cubes counted once.
    Unweighted,
    /// `R_η(n)`: tuples weighted by `s_3`.
    Smooth,
}

/// Exact counts for `n = 0..=N`.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentationTable {
    pub p: f64,
    pub s: u32,
    pub k: u32,
    pub mode: CountMode,
    pub eta: Option<f64>,
    #[serde(skip)]
    counts: Vec<u128>,
}

impl RepresentationTable {
    pub fn n_max(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn get(&self, n: u64) -> u128 {
        self.counts.get(n as usize).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u128] {
        &self.counts
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    /// `(n, count)` for every `n` with a nonzero count.
    pub fn nonzero(&self) -> impl Iterator<Item = (u64, u128)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(n, &c)| (n as u64, c))
    }
}

/// `s·(3⌊P⌋³)^k`, the largest `n` with a nonzero count.
pub fn full_range(p: f64, s: u32, k: u32) -> Option<u128> {
    let top = p.floor() as u128;
    (3 * top.pow(3))
        .checked_pow(k)
        .and_then(|m| m.checked_mul(s as u128))
}

/// Pushforward `m = x^k ↦ Σ weight(x)`, truncated at `n_max`.
pub(crate) fn pushforward(
    weights: impl Iterator<Item = (u64, u64)>,
    k: u32,
    n_max: u64,
) -> Vec<u128> {
    let mut out = vec![0u128; n_max as usize + 1];
    for (x, w) in weights {
        if let Some(m) = (x as u128).checked_pow(k) {
            if m <= n_max as u128 {
                out[m as usize] += w as u128;
            }
        }
    }
    out
}

/// Counts over the full range `0..=s·(3⌊P⌋³)^k`.
pub fn representation_table(
    p: f64,
    s: u32,
    k: u32,
    mode: CountMode,
    eta: Option<f64>,
) -> Result<RepresentationTable> {
    let full = full_range(p, s, k).ok_or(Error::Overflow("representation range"))?;
    guard("table range N", full, MAX_TRANSFORM_LEN as u128 - 1)?;
    representation_table_upto(p, s, k, mode, eta, full as u64)
}

/// Counts for `n ≤ n_max` only.
pub fn representation_table_upto(
    p: f64,
    s: u32,
    k: u32,
    mode: CountMode,
    eta: Option<f64>,
    n_max: u64,
) -> Result<RepresentationTable> {
    if s == 0 {
        return invalid("need at least one summand");
    }
    if k == 0 {
        return invalid("exponent k must be positive");
    }
    guard("table range N", n_max as u128, MAX_TRANSFORM_LEN as u128 - 1)?;
    let table = match mode {
        CountMode::Smooth => weight_table(p, Some(eta.unwrap_or(DEFAULT_ETA)))?,
        _ => weight_table(p, None)?,
    };
    let base: Vec<(u64, u64)> = match mode {
        CountMode::Unweighted => table.support().map(|(x, _)| (x, 1)).collect(),
        _ => table.support().collect(),
    };
    let w = pushforward(base.into_iter(), k, n_max);
    let counts = power_truncated(&w, s, n_max as usize)?;
    Ok(RepresentationTable {
        p,
        s,
        k,
        mode,
        eta: if mode == CountMode::Smooth {
            Some(eta.unwrap_or(DEFAULT_ETA))
        } else {
            None
        },
        counts,
    })
}

/// Counts for an arbitrary weight function on `x`, for `n ≤ n_max`.
pub(crate) fn table_from_weights(
    weights: &[(u64, u64)],
    s: u32,
    k: u32,
    n_max: u64,
) -> Result<Vec<u128>> {
    let w = pushforward(weights.iter().copied(), k, n_max);
    power_truncated(&w, s, n_max as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Moment {
    pub p: f64,
    pub eta: Option<f64>,
    /// `X = 3⌊P⌋³`, the range of the sum.
    pub x_max: u64,
    pub sum_of_squares: u128,
}

/// `Σ_{x≤3⌊P⌋³} r_3(x)²` (or `s_3`).
pub fn l2_moment(p: f64, eta: Option<f64>) -> Result<L2Moment> {
    let t = weight_table(p, eta)?;
    Ok(L2Moment {
        p,
        eta,
        x_max: t.max_index(),
        sum_of_squares: t.sum_of_squares(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Slope {
    pub moments: Vec<L2Moment>,
    /// Least-squares slope of `log Σ` against `log X`.
    pub fitted_exponent: f64,
}

pub fn l2_moment_slope(ps: &[f64], eta: Option<f64>) -> Result<L2Slope> {
    if ps.len() < 2 {
        return invalid("need at least two box sizes for a slope");
    }
    let moments: Vec<L2Moment> = ps.iter().map(|&p| l2_moment(p, eta)).collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = moments
        .iter()
        .map(|m| ((m.x_max as f64).ln(), (m.sum_of_squares as f64).ln()))
        .collect();
    Ok(L2Slope {
        moments,
        fitted_exponent: least_squares_slope(&pts),
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `θ = ν/k`.
pub fn theta(k: u32) -> f64 {
    NU / k as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    pub n: u128,
    /// `K n^θ`.
    pub threshold: f64,
    /// `Σ_{m ∈ S_K(n)} s_3(m)`.
    pub tail_mass: u128,
    /// `Σ_{m ≤ n^{1/k}} s_3(m)²`.
    pub sum_of_squares: u128,
    /// `K⁻¹ n^{−θ} Σ s_3(m)²`.
    pub chebyshev_bound: f64,
    pub holds: bool,
}

/// The tail of large multiplicities, `S_K(n) = {m ≤ n^{1/k} : s_3(m) > K n^θ}`,
/// at `n = P^{3k}`.
pub fn multiplicity_tail(p: f64, k: u32, eta: f64, big_k: f64) -> Result<TailReport> {
    if !(big_k > 0.0) {
        return invalid("K must be positive");
    }
    let t = weight_table(p, Some(eta))?;
    let top = t.top() as u128;
    let root = top.pow(3); // n^{1/k} = P³ on the lattice
    let n = root.checked_pow(k).ok_or(Error::Overflow("n = P^{3k}"))?;
    let threshold = big_k * (n as f64).powf(theta(k));
    let mut tail_mass = 0u128;
    let mut sum_of_squares = 0u128;
    for (m, w) in t.support() {
        if m as u128 > root {
            break;
        }
        sum_of_squares += (w as u128) * (w as u128);
        if w as f64 > threshold {
            tail_mass += w as u128;
        }
    }
    let chebyshev_bound = sum_of_squares as f64 / threshold;
    Ok(TailReport {
        n,
        threshold,
        tail_mass,
        sum_of_squares,
        chebyshev_bound,
        holds: tail_mass as f64 <= chebyshev_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_examples() {
        let s = smooth_sieve(10, 2).unwrap();
        assert_eq!(s.members().collect::<Vec<_>>(), vec![1, 2, 4, 8]);
        let s = smooth_sieve(10, 10).unwrap();
        assert_eq!(s.count(), 10);
        let s = smooth_sieve(10, 1).unwrap();
        assert_eq!(s.members().collect::<Vec<_>>(), vec![1]);
        assert!(smooth_sieve(SIEVE_LIMIT_GUARD + 1, 2).is_err());
    }

    #[test]
    fn sieve_against_trial_division() {
        let s = smooth_sieve(5000, 13).unwrap();
        for m in 1..=5000u64 {
            let f = crate::arith::factorize(m).unwrap();
            let brute = f.factors().iter().all(|&(p, _)| p <= 13);
            assert_eq!(s.contains(m), brute, "m={m}");
        }
    }

    #[test]
    fn weight_examples() {
        let t = weight_table(1.0, None).unwrap();
        assert_eq!(t.get(3), 1);
        let t = weight_table(3.0, None).unwrap();
        assert_eq!(t.get(10), 3);
        let t = weight_table(7.5, None).unwrap();
        assert_eq!(t.mass(), 343);
        let s = weight_table(7.5, Some(0.5)).unwrap();
        for x in 0..=t.max_index() {
            assert!(s.get(x) <= t.get(x));
        }
        assert!(weight_table(401.0, None).is_err());
    }

    #[test]
    fn representation_examples() {
        let r = representation_table(2.0, 2, 2, CountMode::Weighted, None).unwrap();
        assert_eq!(r.get(18), 1);
        assert_eq!(r.get(109), 6);
        let u = representation_table(2.0, 2, 2, CountMode::Unweighted, None).unwrap();
        assert_eq!(u.get(109), 2);
        let r = representation_table(3.0, 3, 2, CountMode::Weighted, None).unwrap();
        assert_eq!(r.total(), 19683);
    }

    #[test]
    fn l2_examples() {
        assert_eq!(l2_moment(1.0, None).unwrap().sum_of_squares, 1);
        assert_eq!(l2_moment(2.0, None).unwrap().sum_of_squares, 20);
    }

    #[test]
    fn tail_examples() {
        let r = multiplicity_tail(6.0, 2, 0.5, 1e12).unwrap();
        assert_eq!(r.tail_mass, 0);
        assert!(r.holds);
        assert!(multiplicity_tail(5.0, 2, 0.5, 1e-4).unwrap().holds);
        assert!(multiplicity_tail(10.0, 2, 0.1, 1.0).unwrap().holds);
    }

    #[test]
    fn origin_box_mass() {
        let t = weight_table_with_origin(3.0).unwrap();
        assert_eq!(t.mass(), 64);
        assert_eq!(t.get(0), 1);
    }
}
