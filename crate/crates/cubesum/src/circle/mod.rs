//! Generating sums, the oscillatory integral, major-arc approximants and arc
//! dissections.
//!
//! Phases `e(α m)` with `m` up to 128 bits are reduced exactly (see
//! [`phase`]), so `f(α+1) = f(α)` holds to rounding even when `αm` is huge.

mod arcs;
mod oscillatory;
pub mod phase;

pub use arcs::{
    arc_integral, dft_inversion, dissect, sample_major_points, Arc, ArcDissection, ArcIntegral,
    DftInversion, Regime, ARC_COUNT_GUARD, GRID_GUARD,
};
pub use oscillatory::{
    box_oscillatory, cube_sum_density, cube_sum_density_exact, decay_constant, v_beta, OscIntegral,
    OscMethod, DIRECT_NODE_BUDGET, REDUCED_NODE_BUDGET,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::gcd;
use crate::dickman::rho;
use crate::error::{guard, invalid, Result};
use crate::expsums::triple_sum_fast;
use crate::reps::{smooth_sieve, smoothness_bound, weight_table, WeightTable};
use phase::{e, frac_mul, frac_mul_pow};

/// Largest `X` accepted by [`weyl_sum`].
pub const WEYL_MAX_X: u64 = 1_000_000;
/// Largest `⌊C₂Q⌋` and `⌊C₃Q⌋` accepted by [`g_qm_eval`].
pub const GQM_BOX_GUARD: u64 = 400;

/// `Σ_m w(m) e(αm)` where `w` is the pushforward of `r_3` (or `s_3`) under
/// `x ↦ x^k`.
#[derive(Debug, Clone)]
pub struct GeneratingSum {
    k: u32,
    terms: Vec<(u128, u64)>,
}

impl GeneratingSum {
    pub fn from_weights(table: &WeightTable, k: u32) -> Result<Self> {
        if k == 0 {
            return invalid("k must be positive");
        }
        let terms = table
            .support()
            .map(|(x, w)| (x as u128).checked_pow(k).map(|m| (m, w)))
            .collect::<Option<Vec<_>>>();
        match terms {
            Some(terms) => Ok(GeneratingSum { k, terms }),
            None => Err(crate::Error::Overflow("T(𝐱)^k exceeds 128 bits")),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `(m, weight)` pairs, increasing in `m`.
    pub fn terms(&self) -> &[(u128, u64)] {
        &self.terms
    }

    /// Value at α = 0, the total weight.
    pub fn mass(&self) -> u128 {
        self.terms.iter().map(|&(_, w)| w as u128).sum()
    }

    pub fn eval(&self, alpha: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(m, w)| w as f64 * e(frac_mul(alpha, m)))
            .sum()
    }

    /// Value at the rational `a/q`, with exact residues.
    pub fn eval_rational(&self, a: i64, q: u64) -> Complex64 {
        let q128 = q as u128;
        let a = a.rem_euclid(q as i64) as u128;
        self.terms
            .iter()
            .map(|&(m, w)| {
                let r = (m % q128) * a % q128;
                let (s, c) = crate::expsums::turn_sin_cos(r as u64, q);
                w as f64 * Complex64::new(c, s)
            })
            .sum()
    }
}

/// `f(α) = Σ_{1≤𝐱≤P} e(α T(𝐱)^k)`.
pub fn f_eval(alpha: f64, p: f64, k: u32) -> Result<Complex64> {
    Ok(GeneratingSum::from_weights(&weight_table(p, None)?, k)?.eval(alpha))
}

/// `g(α)`, the same sum restricted to `x₁, x₂` that are `P^η`-smooth.
pub fn g_eval(alpha: f64, p: f64, k: u32, eta: f64) -> Result<Complex64> {
    Ok(GeneratingSum::from_weights(&weight_table(p, Some(eta))?, k)?.eval(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeylKind {
    /// `Σ e(α₁x + … + α_k x^k)`
    Powers,
    /// `Σ e(α₁x³ + … + α_k x^{3k})`
    Cubes,
}

pub fn weyl_sum(alphas: &[f64], x_max: f64, kind: WeylKind) -> Result<Complex64> {
    if !(x_max >= 0.0) || !x_max.is_finite() {
        return invalid("X must be finite and non-negative");
    }
    let top = x_max.floor() as u64;
    guard("Weyl sum length X", top as u128, WEYL_MAX_X as u128)?;
    let step = match kind {
        WeylKind::Powers => 1,
        WeylKind::Cubes => 3,
    };
    Ok((1..=top)
        .map(|x| {
            let theta: f64 = alphas
                .iter()
                .enumerate()
                .map(|(j, &a)| frac_mul_pow(a, x, step * (j as u32 + 1)))
                .sum();
            e(theta)
        })
        .sum())
}

/// `V(α,q,a) = q⁻³ S(q,a) v(α − a/q)`.
pub fn major_approx_v(alpha: f64, q: u64, a: i64, p: f64, k: u32, method: OscMethod) -> Result<Complex64> {
    let s = local_factor(q, a, k)?;
    let beta = alpha - a as f64 / q as f64;
    Ok(s * v_beta(beta, p, k, method)?.value())
}

/// `W(α,q,a) = ρ(1/η)² V(α,q,a)`.
pub fn major_approx_w(
    alpha: f64,
    q: u64,
    a: i64,
    p: f64,
    k: u32,
    eta: f64,
    method: OscMethod,
) -> Result<Complex64> {
    if !(eta > 0.0) {
        return invalid("smoothness exponent η must be positive");
    }
    let r = rho(1.0 / eta);
    Ok(r * r * major_approx_v(alpha, q, a, p, k, method)?)
}

/// `q⁻³ S(q,a)`, requiring `(a,q) = 1`.
fn local_factor(q: u64, a: i64, k: u32) -> Result<Complex64> {
    if q == 0 {
        return invalid("q must be positive");
    }
    if gcd(a.unsigned_abs(), q) != 1 {
        return invalid(format!("a = {a} and q = {q} are not coprime"));
    }
    Ok(triple_sum_fast(q, a, k).value() / (q as f64).powi(3))
}

/// The box `ℬ` of the rescaled sum: `C₁Q < x₁ ≤ C₂Q` and `x₂, x₃`
/// `Q^η`-smooth in `[1, C₃Q]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledBox {
    pub q_scale: f64,
    pub m: u64,
    pub k: u32,
    pub eta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// `g_{Q,m}(α)` together with the box size `|ℬ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledSum {
    pub re: f64,
    pub im: f64,
    pub size: u64,
}

impl ScaledSum {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl ScaledBox {
    fn validate(&self) -> Result<(u64, u64, u64)> {
        let b = self;
        if !(b.q_scale > 0.0) || !(b.eta > 0.0) || b.m == 0 || b.k == 0 {
            return invalid("need Q > 0, η > 0, m ≥ 1, k ≥ 1");
        }
        if !(b.c1 >= 0.0 && b.c2 >= b.c1 && b.c3 >= 0.0) {
            return invalid("need 0 ≤ C₁ ≤ C₂ and C₃ ≥ 0");
        }
        let lo = (b.c1 * b.q_scale).floor() as u64;
        let hi = (b.c2 * b.q_scale).floor() as u64;
        let side = (b.c3 * b.q_scale).floor() as u64;
        guard("box size ⌊C₂Q⌋", hi as u128, GQM_BOX_GUARD as u128)?;
        guard("box size ⌊C₃Q⌋", side as u128, GQM_BOX_GUARD as u128)?;
        Ok((lo, hi, side))
    }

    /// Histogram of `x₂³ + x₃³` over the smooth pairs, and the range of `x₁`.
    fn pieces(&self) -> Result<(Vec<(u64, u64)>, u64, u64)> {
        let (lo, hi, side) = self.validate()?;
        let sieve = smooth_sieve(side.max(1), smoothness_bound(self.q_scale, self.eta))?;
        let smooth: Vec<u64> = (1..=side).filter(|&x| sieve.contains(x)).map(|x| x.pow(3)).collect();
        let mut pairs: Vec<u64> = Vec::with_capacity(smooth.len() * smooth.len());
        for &a in &smooth {
            for &b in &smooth {
                pairs.push(a + b);
            }
        }
        pairs.sort_unstable();
        let mut hist: Vec<(u64, u64)> = Vec::new();
        for v in pairs {
            match hist.last_mut() {
                Some((last, c)) if *last == v => *c += 1,
                _ => hist.push((v, 1)),
            }
        }
        Ok((hist, lo, hi))
    }

    pub fn eval(&self, alpha: f64) -> Result<ScaledSum> {
        let (hist, lo, hi) = self.pieces()?;
        let m3 = (self.m as u128).pow(3);
        let mut total = Complex64::new(0.0, 0.0);
        let mut size = 0u64;
        for x1 in lo + 1..=hi {
            let c = x1.pow(3);
            for &(v, cnt) in &hist {
                let t = m3 * (c + v) as u128;
                let theta = if let Some(tk) = t.checked_pow(self.k) {
                    frac_mul(alpha, tk)
                } else {
                    phase::frac_mul_big(alpha, &num_bigint::BigUint::from(t).pow(self.k))
                };
                total += cnt as f64 * e(theta);
                size += cnt;
            }
        }
        Ok(ScaledSum {
            re: total.re,
            im: total.im,
            size,
        })
    }

    /// `V_{Q,m}(α,q,a) = q⁻³ S(q,a) ρ(1/η)² ∫_{𝒮_Q} e(β(m³T(𝐱))^k) d𝐱` with
    /// `𝒮_Q = [C₁Q, C₂Q] × [0, C₃Q]²`. Needs `(m,q) = 1`.
    pub fn approx(&self, alpha: f64, q: u64, a: i64) -> Result<Complex64> {
        self.validate()?;
        if gcd(self.m, q) != 1 {
            return invalid(format!("m = {} and q = {q} are not coprime", self.m));
        }
        let s = local_factor(q, a, self.k)?;
        let beta = alpha - a as f64 / q as f64;
        let scale = (self.m as f64).powi(3 * self.k as i32);
        let qq = self.q_scale;
        let (integral, _) = box_oscillatory(
            beta * scale,
            [self.c1 * qq, 0.0, 0.0],
            [self.c2 * qq, self.c3 * qq, self.c3 * qq],
            self.k,
        )?;
        let r = rho(1.0 / self.eta);
        Ok(s * r * r * integral)
    }
}

/// `g_{Q,m}(α) = Σ_{𝐱∈ℬ} e(α T(m𝐱)^k)`.
#[allow(clippy::too_many_arguments)]
pub fn g_qm_eval(alpha: f64, q_scale: f64, m: u64, k: u32, eta: f64, c1: f64, c2: f64, c3: f64) -> Result<ScaledSum> {
    ScaledBox {
        q_scale,
        m,
        k,
        eta,
        c1,
        c2,
        c3,
    }
    .eval(alpha)
}

/// One sampled comparison of an exponential sum with its approximant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSample {
    pub alpha: f64,
    pub q: u64,
    pub a: u64,
    pub beta: f64,
    pub residual: f64,
    /// The error scale the residual is divided by.
    pub scale: f64,
    pub ratio: f64,
}

/// `|f(α) − V(α,q,a)|` against `P² q (1 + n|β|)` at the given points.
pub fn residuals_v(points: &[(f64, u64, u64)], p: f64, k: u32) -> Result<Vec<ResidualSample>> {
    let f = GeneratingSum::from_weights(&weight_table(p, None)?, k)?;
    let n = p.powi(3 * k as i32);
    points
        .iter()
        .map(|&(alpha, q, a)| {
            let v = major_approx_v(alpha, q, a as i64, p, k, OscMethod::Reduced1d)?;
            let beta = alpha - a as f64 / q as f64;
            let residual = (f.eval(alpha) - v).norm();
            let scale = p * p * q as f64 * (1.0 + n * beta.abs());
            Ok(ResidualSample {
                alpha,
                q,
                a,
                beta,
                residual,
                scale,
                ratio: residual / scale,
            })
        })
        .collect()
}

/// `E(Q) = Q³ (log Q)^{κ−1} log log Q`.
pub fn error_scale(q_scale: f64, kappa: f64) -> f64 {
    let l = q_scale.ln();
    q_scale.powi(3) * l.powf(kappa - 1.0) * l.ln()
}

/// `|g(α) − W(α,q,a)|` against `E(P)`.
pub fn residuals_w(points: &[(f64, u64, u64)], p: f64, k: u32, eta: f64, kappa: f64) -> Result<Vec<ResidualSample>> {
    let g = GeneratingSum::from_weights(&weight_table(p, Some(eta))?, k)?;
    let scale = error_scale(p, kappa);
    points
        .iter()
        .map(|&(alpha, q, a)| {
            let w = major_approx_w(alpha, q, a as i64, p, k, eta, OscMethod::Reduced1d)?;
            let residual = (g.eval(alpha) - w).norm();
            Ok(ResidualSample {
                alpha,
                q,
                a,
                beta: alpha - a as f64 / q as f64,
                residual,
                scale,
                ratio: residual / scale,
            })
        })
        .collect()
}

/// `|g_{Q,m}(α) − V_{Q,m}(α,q,a)|` against `E(Q)`.
pub fn residuals_qm(points: &[(f64, u64, u64)], b: &ScaledBox, kappa: f64) -> Result<Vec<ResidualSample>> {
    let scale = error_scale(b.q_scale, kappa);
    points
        .iter()
        .map(|&(alpha, q, a)| {
            let approx = b.approx(alpha, q, a as i64)?;
            let residual = (b.eval(alpha)?.value() - approx).norm();
            Ok(ResidualSample {
                alpha,
                q,
                a,
                beta: alpha - a as f64 / q as f64,
                residual,
                scale,
                ratio: residual / scale,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{weight_table, CountMode, representation_table};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn f_at_integers() {
        for p in [2.0f64, 3.5, 7.0] {
            let top = p.floor().powi(3);
            for alpha in [0.0, 1.0, -3.0] {
                let v = f_eval(alpha, p, 2).unwrap();
                assert!(close(v, Complex64::new(top, 0.0), 1e-9));
            }
        }
    }

    #[test]
    fn periodic_and_conjugate() {
        let f = GeneratingSum::from_weights(&weight_table(6.0, None).unwrap(), 3).unwrap();
        let mut a = 0.1234567;
        for _ in 0..100 {
            a = (a * 7.31 + 0.377) % 1.0;
            let x = f.eval(a);
            assert!(close(x, f.eval(a + 1.0), 1e-7 * 216.0));
            assert!(close(x.conj(), f.eval(-a), 1e-9 * 216.0));
        }
    }

    #[test]
    fn rational_matches_float() {
        let f = GeneratingSum::from_weights(&weight_table(5.0, None).unwrap(), 2).unwrap();
        for (a, q) in [(1i64, 3u64), (2, 5), (3, 7), (5, 64)] {
            let x = f.eval_rational(a, q);
            let y = f.eval(a as f64 / q as f64);
            assert!(close(x, y, 1e-8), "{a}/{q}");
        }
    }

    #[test]
    fn dft_example() {
        let d = dft_inversion(2.0, 2, 2, Some(1201)).unwrap();
        assert!((d.recovered[109] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn g_examples() {
        let t = weight_table(8.0, Some(0.5)).unwrap();
        let g0 = g_eval(0.0, 8.0, 2, 0.5).unwrap();
        assert!((g0.re - t.mass() as f64).abs() < 1e-9);
        // P^η ≥ P: no constraint binds
        for alpha in [0.1, 0.37, 0.8] {
            let a = g_eval(alpha, 8.0, 2, 1.0).unwrap();
            let b = f_eval(alpha, 8.0, 2).unwrap();
            assert!(close(a, b, 1e-9));
        }
        let mut a = 0.3;
        for _ in 0..100 {
            a = (a * 3.77 + 0.13) % 1.0;
            assert!(g_eval(a, 8.0, 2, 0.5).unwrap().norm() <= g0.re + 1e-9);
        }
    }

    #[test]
    fn weyl_examples() {
        assert!(close(weyl_sum(&[0.0, 0.0], 10.7, WeylKind::Powers).unwrap(), Complex64::new(10.0, 0.0), 1e-12));
        assert!(weyl_sum(&[0.5], 4.0, WeylKind::Powers).unwrap().norm() < 1e-12);
        let mut a = 0.2;
        for _ in 0..100 {
            a = (a * 5.13 + 0.71) % 1.0;
            let s = weyl_sum(&[a, 1.0 - a, a * a], 50.0, WeylKind::Cubes).unwrap();
            assert!(s.norm() <= 50.0 + 1e-9);
        }
    }

    #[test]
    fn weyl_cubes_is_the_cube_sum() {
        // F(α) with α₂ = 0 is the Weyl sum of cubes
        let a = 0.0123;
        let s = weyl_sum(&[a, 0.0], 30.0, WeylKind::Cubes).unwrap();
        let d: Complex64 = (1..=30u64).map(|x| e(a * (x * x * x) as f64)).sum();
        assert!(close(s, d, 1e-9));
    }

    #[test]
    fn v_approximant_examples() {
        let v = major_approx_v(0.0, 1, 0, 4.0, 2, OscMethod::Reduced1d).unwrap();
        assert!(close(v, Complex64::new(64.0, 0.0), 1e-9));
        let v1 = major_approx_v(1.0, 1, 1, 4.0, 2, OscMethod::Reduced1d).unwrap();
        assert!(close(v1, Complex64::new(64.0, 0.0), 1e-9));
        assert!(major_approx_v(0.5, 4, 2, 4.0, 2, OscMethod::Reduced1d).is_err());
        // conjugacy
        let (q, a, b) = (7u64, 3i64, 2e-5);
        let x = major_approx_v(a as f64 / 7.0 + b, q, a, 5.0, 2, OscMethod::Reduced1d).unwrap();
        let y = major_approx_v((7 - a) as f64 / 7.0 - b, q, 7 - a, 5.0, 2, OscMethod::Reduced1d).unwrap();
        assert!(close(x, y.conj(), 1e-9));
    }

    #[test]
    fn w_scales_v() {
        let v = major_approx_v(0.2 + 1e-6, 5, 1, 6.0, 2, OscMethod::Reduced1d).unwrap();
        let w = major_approx_w(0.2 + 1e-6, 5, 1, 6.0, 2, 1.5, OscMethod::Reduced1d).unwrap();
        assert!(close(v, w, 1e-12));
        let w = major_approx_w(0.2 + 1e-6, 5, 1, 6.0, 2, 0.5, OscMethod::Reduced1d).unwrap();
        let f = (1.0 - 2f64.ln()).powi(2);
        assert!(close(v * f, w, 1e-9));
    }

    #[test]
    fn lemma_residual_constant() {
        let p: f64 = 15.0;
        let d = dissect(Regime::Xi { xi: 0.5, s: 8 }, p.powi(6), 2).unwrap();
        let pts = sample_major_points(&d, 20);
        let res = residuals_v(&pts, p, 2).unwrap();
        for r in &res {
            assert!(r.ratio <= 50.0, "{r:?}");
        }
    }

    #[test]
    fn scaled_sum_examples() {
        // m = 1, C₁ = 0, C₂ = C₃ = 1, Q = P gives g
        let p = 9.0;
        let eta = 0.5;
        for alpha in [0.0, 0.11, 0.523] {
            let a = g_qm_eval(alpha, p, 1, 2, eta, 0.0, 1.0, 1.0).unwrap();
            let b = g_eval(alpha, p, 2, eta).unwrap();
            assert!(close(a.value(), b, 1e-8), "{alpha}");
        }
        let z = g_qm_eval(0.0, 10.0, 2, 2, 0.5, 0.5, 1.0, 0.8).unwrap();
        assert!((z.re - z.size as f64).abs() < 1e-9);
        // brute force size: 5 < x₁ ≤ 10, x₂,x₃ ≤ 8 smooth w.r.t. ⌊10^0.5⌋ = 3
        let smooth = (1..=8u64).filter(|&x| [1, 2, 3, 4, 6, 8].contains(&x)).count() as u64;
        assert_eq!(z.size, 5 * smooth * smooth);
    }

    #[test]
    fn scaled_approximant_needs_coprime() {
        let b = ScaledBox {
            q_scale: 10.0,
            m: 2,
            k: 2,
            eta: 0.5,
            c1: 0.5,
            c2: 1.0,
            c3: 1.0,
        };
        assert!(b.approx(0.25, 4, 1).is_err());
        assert!(b.approx(1.0 / 3.0, 3, 1).is_ok());
    }

    #[test]
    fn exact_inversion_small_boxes() {
        for (p, s, k) in [(2.0, 2, 2), (3.0, 2, 2), (2.0, 3, 3)] {
            let d = dft_inversion(p, s, k, None).unwrap();
            let t = representation_table(p, s, k, CountMode::Weighted, None).unwrap();
            for (n, &c) in t.counts().iter().enumerate() {
                assert!((d.recovered[n] - c as f64).abs() < 1e-6);
            }
        }
    }
}
