//! Major-arc dissections of `[0,1)` and arc-split integration of `f(α)^s`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::GeneratingSum;
use crate::arith::gcd;
use crate::error::{guard, invalid, Error, Result};
use crate::reps::{full_range, weight_table};

/// Largest denominator bound `q ≤ Q₀` of a dissection.
pub const ARC_COUNT_GUARD: u64 = 2000;
/// Largest grid size of a sampled integral.
pub const GRID_GUARD: usize = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum Regime {
    /// `q ≤ P^ξ`, `|α − a/q| ≤ P^ξ/(qn)`; needs `0 < ξ < s/(s+2)`.
    Xi { xi: f64, s: u32 },
    /// `q ≤ (log P)^κ`, `|α − a/q| ≤ q⁻¹(log P)^κ P^{-3k}`; needs `0 < κ < 1`.
    Kappa { kappa: f64 },
}

impl Regime {
    pub const DEFAULT_KAPPA: f64 = 0.2;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub a: u64,
    pub q: u64,
    pub center: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcDissection {
    pub regime: Regime,
    pub n: f64,
    pub k: u32,
    pub p: f64,
    pub q_max: u64,
    /// Total length of the major arcs.
    pub measure: f64,
    /// Sorted by centre; the `q = 1` arc is first.
    pub arcs: Vec<Arc>,
}

fn circle_distance(x: f64, c: f64) -> f64 {
    let d = (x - c).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl ArcDissection {
    /// The arc containing `α` (taken mod 1), if any.
    pub fn locate(&self, alpha: f64) -> Option<&Arc> {
        if self.arcs.is_empty() {
            return None;
        }
        let x = alpha.rem_euclid(1.0);
        let i = self.arcs.partition_point(|arc| arc.center <= x);
        let mut candidates = [i.checked_sub(1), Some(i), Some(0)];
        if i >= self.arcs.len() {
            candidates[1] = None;
        }
        candidates
            .into_iter()
            .flatten()
            .map(|j| &self.arcs[j])
            .find(|arc| circle_distance(x, arc.center) <= arc.half_width)
    }

    /// Neighbouring closed arcs share no point, including across `0 ≡ 1`.
    pub fn is_disjoint(&self) -> bool {
        let n = self.arcs.len();
        if n < 2 {
            return self.arcs.iter().all(|a| a.half_width < 0.5);
        }
        for i in 0..n {
            let a = &self.arcs[i];
            let b = &self.arcs[(i + 1) % n];
            let gap = if i + 1 == n {
                b.center + 1.0 - a.center
            } else {
                b.center - a.center
            };
            if gap <= a.half_width + b.half_width {
                return false;
            }
        }
        true
    }
}

pub fn dissect(regime: Regime, n: f64, k: u32) -> Result<ArcDissection> {
    if !(n > 1.0) || !n.is_finite() {
        return invalid("n must be finite and greater than 1");
    }
    if k == 0 {
        return invalid("k must be positive");
    }
    let p = n.powf(1.0 / (3.0 * k as f64));
    let (bound, width) = match regime {
        Regime::Xi { xi, s } => {
            let limit = s as f64 / (s as f64 + 2.0);
            if !(xi > 0.0 && xi < limit) {
                return invalid(format!("ξ = {xi} outside (0, s/(s+2)) = (0, {limit:.6})"));
            }
            let px = p.powf(xi);
            (px, px / n)
        }
        Regime::Kappa { kappa } => {
            if !(kappa > 0.0 && kappa < 1.0) {
                return invalid(format!("κ = {kappa} outside (0, 1)"));
            }
            let lk = if p > 1.0 { p.ln().powf(kappa) } else { 0.0 };
            (lk, lk / n)
        }
    };
    let q_max = (bound * (1.0 + 1e-12)).floor().max(0.0) as u64;
    guard("largest arc denominator", q_max as u128, ARC_COUNT_GUARD as u128)?;
    let mut arcs = Vec::new();
    for q in 1..=q_max {
        let hw = width / q as f64;
        if q == 1 {
            arcs.push(Arc {
                a: 0,
                q: 1,
                center: 0.0,
                half_width: hw,
            });
            continue;
        }
        for a in 1..q {
            if gcd(a, q) == 1 {
                arcs.push(Arc {
                    a,
                    q,
                    center: a as f64 / q as f64,
                    half_width: hw,
                });
            }
        }
    }
    arcs.sort_by(|x, y| x.center.partial_cmp(&y.center).unwrap());
    let measure = arcs.iter().map(|a| 2.0 * a.half_width).sum();
    let d = ArcDissection {
        regime,
        n,
        k,
        p,
        q_max,
        measure,
        arcs,
    };
    if !d.is_disjoint() {
        return invalid("major arcs overlap for these parameters");
    }
    Ok(d)
}

/// Deterministic points `(α, q, a)` spread over the arcs, with offsets from
/// the golden-ratio sequence.
pub fn sample_major_points(d: &ArcDissection, count: usize) -> Vec<(f64, u64, u64)> {
    if d.arcs.is_empty() {
        return Vec::new();
    }
    let len = d.arcs.len();
    (0..count)
        .map(|i| {
            let idx = if count >= len { i % len } else { i * len / count };
            let arc = &d.arcs[idx];
            let t = ((i + 1) as f64 * 0.618_033_988_749_895).fract() * 2.0 - 1.0;
            (arc.center + t * arc.half_width, arc.q, arc.a)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcIntegral {
    pub p: f64,
    pub s: u32,
    pub k: u32,
    pub n: u64,
    /// Grid size of the finer of the two samplings.
    pub grid: usize,
    pub major: f64,
    pub minor: f64,
    pub total: f64,
    /// Imaginary part of the total; zero up to rounding.
    pub total_imag: f64,
    /// `|major(M) − major(2M)|`.
    pub richardson_delta: f64,
    pub major_share: f64,
}

fn grid_values(gen: &GeneratingSum, m: usize, s: u32) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for &(x, w) in gen.terms() {
        buf[(x % m as u128) as usize] += w as f64;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf.par_iter_mut().for_each(|v| *v = v.powu(s));
    buf
}

fn split_sum(vals: &[Complex64], n: u64, d: &ArcDissection) -> (Complex64, Complex64) {
    let m = vals.len();
    let nm = (n % m as u64) as u128;
    // fixed chunks summed in order, so the result does not depend on the
    // number of worker threads
    let parts: Vec<(Complex64, Complex64)> = vals
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let zero = Complex64::new(0.0, 0.0);
            let mut acc = (zero, zero);
            for (i, v) in chunk.iter().enumerate() {
                let j = c * CHUNK + i;
                let r = (nm * j as u128 % m as u128) as u64;
                let (s, co) = crate::expsums::turn_sin_cos(r, m as u64);
                let x = v * Complex64::new(co, -s) / m as f64;
                if d.locate(j as f64 / m as f64).is_some() {
                    acc.0 += x;
                }
                acc.1 += x;
            }
            acc
        })
        .collect();
    parts
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |a, b| (a.0 + b.0, a.1 + b.1))
}

const CHUNK: usize = 1 << 14;

/// `∫₀¹ f(α)^s e(−αn) dα` split into major and minor arcs by sampling on a
/// uniform grid of size `M > s(3⌊P⌋³)^k` (so the total is exact up to
/// rounding), and again on `2M` for the Richardson check.
pub fn arc_integral(p: f64, s: u32, k: u32, n: u64, d: &ArcDissection, samples_per_arc: usize) -> Result<ArcIntegral> {
    if s == 0 {
        return invalid("need at least one summand");
    }
    let top = full_range(p, s, k).ok_or(Error::Overflow("representation range"))?;
    let need = top.max(n as u128) + 1;
    let min_hw = d.arcs.iter().map(|a| a.half_width).fold(f64::INFINITY, f64::min);
    let dense = if min_hw.is_finite() && min_hw > 0.0 {
        (samples_per_arc as f64 / (2.0 * min_hw)).ceil()
    } else {
        0.0
    };
    let m = need.max(dense.min(u128::MAX as f64) as u128).next_power_of_two();
    guard("sampling grid size", m, GRID_GUARD as u128)?;
    let gen = GeneratingSum::from_weights(&weight_table(p, None)?, k)?;
    let m = m as usize;
    let (coarse, _) = split_sum(&grid_values(&gen, m, s), n, d);
    let (major, total) = split_sum(&grid_values(&gen, 2 * m, s), n, d);
    Ok(ArcIntegral {
        p,
        s,
        k,
        n,
        grid: 2 * m,
        major: major.re,
        minor: total.re - major.re,
        total: total.re,
        total_imag: total.im,
        richardson_delta: (coarse - major).norm(),
        major_share: if total.re.abs() >= 0.5 { major.re / total.re } else { f64::NAN },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DftInversion {
    pub m: usize,
    /// `(1/M) Σ_j f(j/M)^s e(−jn/M)` for `n < M`.
    pub recovered: Vec<f64>,
    /// Largest distance from a recovered value to the nearest integer.
    pub max_rounding_error: f64,
}

/// Discrete inversion of `f^s` on `M` points, `M` defaulting to
/// `s(3⌊P⌋³)^k + 1`. Requires `M` above that bound.
pub fn dft_inversion(p: f64, s: u32, k: u32, grid: Option<usize>) -> Result<DftInversion> {
    if s == 0 {
        return invalid("need at least one summand");
    }
    let top = full_range(p, s, k).ok_or(Error::Overflow("representation range"))?;
    let m = match grid {
        Some(m) if (m as u128) <= top => {
            return invalid(format!("grid size {m} does not exceed s(3⌊P⌋³)^k = {top}"));
        }
        Some(m) => m as u128,
        None => top + 1,
    };
    guard("sampling grid size", m, GRID_GUARD as u128)?;
    let m = m as usize;
    let gen = GeneratingSum::from_weights(&weight_table(p, None)?, k)?;
    let mut vals = grid_values(&gen, m, s);
    FftPlanner::new().plan_fft_forward(m).process(&mut vals);
    let recovered: Vec<f64> = vals.iter().map(|v| v.re / m as f64).collect();
    let max_rounding_error = recovered.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
    Ok(DftInversion {
        m,
        recovered,
        max_rounding_error,
    })
}
