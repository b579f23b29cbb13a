//! The oscillatory integral `v(β) = ∫_{[0,P]³} e(β T(𝐱)^k) d𝐱`.
//!
//! Two independent routes. `Direct3d` runs nested Gauss-Legendre panels whose
//! break points are found by inverting the phase exactly, a quarter cycle
//! per panel. `Reduced1d` writes `v(β) = P³ ∫₀³ h(τ) e(λτ^k) dτ` with
//! `λ = βP^{3k}` and `h` the density of `u₁³+u₂³+u₃³` for `𝐮` uniform in the
//! unit cube; `h` is tabulated once.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;

use super::phase::e;
use crate::error::{guard, invalid, Result};
use crate::quad::{tanh_sinh, GaussLegendre};

/// Node budget of the nested three-dimensional quadrature.
pub const DIRECT_NODE_BUDGET: u128 = 400_000_000;
/// Node budget of the one-dimensional quadrature.
pub const REDUCED_NODE_BUDGET: u128 = 50_000_000;

const GL_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OscMethod {
    #[serde(rename = "direct-3d")]
    Direct3d,
    #[serde(rename = "reduced-1d")]
    Reduced1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscIntegral {
    pub beta: f64,
    pub p: f64,
    pub k: u32,
    pub re: f64,
    pub im: f64,
    pub method: OscMethod,
    /// Quadrature nodes used.
    pub nodes: u64,
}

impl OscIntegral {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn gl() -> &'static GaussLegendre {
    static G: OnceLock<GaussLegendre> = OnceLock::new();
    G.get_or_init(|| GaussLegendre::new(GL_NODES))
}

pub fn v_beta(beta: f64, p: f64, k: u32, method: OscMethod) -> Result<OscIntegral> {
    if !beta.is_finite() || !(p > 0.0) || !p.is_finite() {
        return invalid("need finite β and P > 0");
    }
    if k == 0 {
        return invalid("k must be positive");
    }
    let (value, nodes) = match method {
        OscMethod::Direct3d => box_oscillatory(beta, [0.0; 3], [p; 3], k)?,
        OscMethod::Reduced1d => {
            let lambda = beta * p.powi(3 * k as i32);
            let (unit, nodes) = unit_cube_reduced(lambda, k)?;
            (unit * p.powi(3), nodes)
        }
    };
    Ok(OscIntegral {
        beta,
        p,
        k,
        re: value.re,
        im: value.im,
        method,
        nodes,
    })
}

/// Break points of a quarter cycle of `β(c + u³)^k` on `[lo, hi]`, at least
/// two panels.
fn panel_breaks(beta: f64, c: f64, lo: f64, hi: f64, k: u32) -> Vec<f64> {
    let mut pts = vec![lo];
    if beta != 0.0 && hi > lo {
        let kf = k as f64;
        let step = 0.25 / beta.abs();
        let base = (c + lo.powi(3)).powf(kf);
        let top = (c + hi.powi(3)).powf(kf);
        let count = ((top - base) / step).floor() as u64;
        for j in 1..=count {
            let t = base + j as f64 * step;
            let u = (t.powf(1.0 / kf) - c).max(0.0).cbrt();
            if u > *pts.last().unwrap() && u < hi {
                pts.push(u);
            }
        }
    }
    pts.push(hi);
    if pts.len() == 2 {
        pts.insert(1, 0.5 * (lo + hi));
    }
    pts
}

fn panel_count(beta: f64, c: f64, lo: f64, hi: f64, k: u32) -> u128 {
    let kf = k as f64;
    let span = (c + hi.powi(3)).powf(kf) - (c + lo.powi(3)).powf(kf);
    (4.0 * beta.abs() * span).ceil() as u128 + 2
}

/// `∫ e(β T(𝐱)^k) d𝐱` over the box `∏ [lower_i, upper_i]`, all bounds
/// non-negative. Returns the value and the number of nodes.
pub fn box_oscillatory(beta: f64, lower: [f64; 3], upper: [f64; 3], k: u32) -> Result<(Complex64, u64)> {
    for i in 0..3 {
        if !(lower[i] >= 0.0) || !(upper[i] >= lower[i]) || !upper[i].is_finite() {
            return invalid("box bounds must satisfy 0 ≤ lower ≤ upper < ∞");
        }
    }
    if beta < 0.0 {
        let (v, n) = box_oscillatory(-beta, lower, upper, k)?;
        return Ok((v.conj(), n));
    }
    let cube = |x: f64| x * x * x;
    let rest = [cube(upper[1]) + cube(upper[2]), cube(upper[2]), 0.0];
    let mut estimate: u128 = 1;
    let mut c_base = 0.0;
    for i in 0..3 {
        let c = c_base + rest[i];
        estimate = estimate.saturating_mul(panel_count(beta, c, lower[i], upper[i], k) * GL_NODES as u128);
        c_base += cube(upper[i]);
    }
    guard("quadrature nodes for the three-dimensional integral", estimate, DIRECT_NODE_BUDGET)?;

    let g = gl();
    let mut nodes = 0u64;
    let mut total = Complex64::new(0.0, 0.0);
    let outer = panel_breaks(beta, rest[0], lower[0], upper[0], k);
    for w1 in outer.windows(2) {
        for (x1, a1) in g.mapped(w1[0], w1[1]) {
            let c1 = cube(x1);
            let mut mid_sum = Complex64::new(0.0, 0.0);
            let middle = panel_breaks(beta, c1 + rest[1], lower[1], upper[1], k);
            for w2 in middle.windows(2) {
                for (x2, a2) in g.mapped(w2[0], w2[1]) {
                    let c2 = c1 + cube(x2);
                    let mut inner_sum = Complex64::new(0.0, 0.0);
                    let inner = panel_breaks(beta, c2, lower[2], upper[2], k);
                    for w3 in inner.windows(2) {
                        for (x3, a3) in g.mapped(w3[0], w3[1]) {
                            let t = c2 + cube(x3);
                            inner_sum += a3 * e(beta * t.powi(k as i32));
                            nodes += 1;
                        }
                    }
                    mid_sum += a2 * inner_sum;
                }
            }
            total += a1 * mid_sum;
        }
    }
    Ok((total, nodes))
}

/// Density of the sum of two cubes of independent uniform `[0,1]` variables,
/// given `x` and `x − 1` (the latter exactly).
fn two_cube_density(x: f64, x_minus_1: f64) -> f64 {
    let b = beta(1.0 / 3.0, 1.0 / 3.0);
    if x <= 0.0 || x >= 2.0 {
        return 0.0;
    }
    if x <= 1.0 {
        return b / 9.0 * x.powf(-1.0 / 3.0);
    }
    let z = (x_minus_1 / x).min(0.5);
    b / 9.0 * x.powf(-1.0 / 3.0) * (1.0 - 2.0 * beta_reg(1.0 / 3.0, 1.0 / 3.0, z))
}

/// Density `h(τ)` of `u₁³+u₂³+u₃³`, by direct quadrature.
pub fn cube_sum_density_exact(tau: f64) -> f64 {
    if !(tau > 0.0) || tau >= 3.0 {
        return 0.0;
    }
    if tau <= 1.0 {
        return gamma(4.0 / 3.0).powi(3);
    }
    let u = |dl: f64| dl.powf(-2.0 / 3.0) / 3.0;
    let tol = 1e-14;
    if tau < 2.0 {
        let t1 = tau - 1.0;
        // y ∈ [0, τ−1]: x = τ − y ∈ [1, τ], x − 1 = (τ−1) − y
        let a = tanh_sinh(|_, dl, dr| u(dl) * two_cube_density(1.0 + dr, dr), 0.0, t1, tol);
        // y ∈ [τ−1, 1]: x ∈ [τ−1, 1]
        let b = tanh_sinh(
            |y, dl, _| {
                let x = 1.0 - dl;
                u(y) * two_cube_density(x, x - 1.0)
            },
            t1,
            1.0,
            tol,
        );
        a + b
    } else {
        let t2 = tau - 2.0;
        // y ∈ [τ−2, 1]: x = τ − y ∈ [τ−1, 2]
        tanh_sinh(
            |y, dl, _| {
                let x = 2.0 - dl;
                u(y) * two_cube_density(x, 1.0 - dl)
            },
            t2,
            1.0,
            tol,
        )
    }
}

const CHEB_NODES: usize = 48;

/// Chebyshev fits of `h` on the four quarters of `[1, 3]`, each in the
/// variable `σ ∈ [0,1]` with `τ = end ± σ³/2`, which absorbs the algebraic
/// singularities of `h` at the integers.
struct DensityTable {
    gamma_cube: f64,
    coeffs: [Vec<f64>; 4],
}

/// `(anchor, orientation)` for each quarter.
const QUARTERS: [(f64, f64); 4] = [(1.0, 1.0), (2.0, -1.0), (2.0, 1.0), (3.0, -1.0)];

fn quarter_tau(i: usize, sigma: f64) -> f64 {
    let (anchor, dir) = QUARTERS[i];
    anchor + dir * 0.5 * sigma * sigma * sigma
}

fn density_table() -> &'static DensityTable {
    static T: OnceLock<DensityTable> = OnceLock::new();
    T.get_or_init(|| {
        let n = CHEB_NODES;
        let coeffs = std::array::from_fn(|i| {
            // Chebyshev points of the first kind on [0,1].
            let vals: Vec<f64> = (0..n)
                .map(|j| {
                    let th = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                    let sigma = 0.5 * (1.0 + th.cos());
                    cube_sum_density_exact(quarter_tau(i, sigma))
                })
                .collect();
            (0..n)
                .map(|m| {
                    let s: f64 = (0..n)
                        .map(|j| {
                            let th = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                            vals[j] * (m as f64 * th).cos()
                        })
                        .sum();
                    s * 2.0 / n as f64 * if m == 0 { 0.5 } else { 1.0 }
                })
                .collect()
        });
        DensityTable {
            gamma_cube: gamma(4.0 / 3.0).powi(3),
            coeffs,
        }
    })
}

impl DensityTable {
    fn quarter(&self, i: usize, sigma: f64) -> f64 {
        let x = 2.0 * sigma - 1.0;
        let c = &self.coeffs[i];
        let (mut b1, mut b2) = (0.0, 0.0);
        for &cm in c.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + cm;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + c[0]
    }
}

/// Density `h(τ)` of `u₁³+u₂³+u₃³`, interpolated.
pub fn cube_sum_density(tau: f64) -> f64 {
    if !(tau > 0.0) || tau >= 3.0 {
        return 0.0;
    }
    let t = density_table();
    if tau <= 1.0 {
        return t.gamma_cube;
    }
    let (i, d) = if tau < 1.5 {
        (0, tau - 1.0)
    } else if tau < 2.0 {
        (1, 2.0 - tau)
    } else if tau < 2.5 {
        (2, tau - 2.0)
    } else {
        (3, 3.0 - tau)
    };
    t.quarter(i, (2.0 * d).cbrt())
}

/// `∫_{[0,1]³} e(λ T(𝐮)^k) d𝐮` through the density `h`.
fn unit_cube_reduced(lambda: f64, k: u32) -> Result<(Complex64, u64)> {
    if lambda < 0.0 {
        let (v, n) = unit_cube_reduced(-lambda, k)?;
        return Ok((v.conj(), n));
    }
    let kf = k as f64;
    let cycles = 4.0 * lambda * 3f64.powf(kf);
    let estimate = (cycles.ceil() as u128 + 5 * 16 + 2) * GL_NODES as u128;
    guard("quadrature nodes for the reduced integral", estimate, REDUCED_NODE_BUDGET)?;
    let table = density_table();
    let g = gl();
    let mut nodes = 0u64;
    let phase = |tau: f64| e(lambda * tau.powi(k as i32));

    // [0,1]: h is constant, integrate in τ.
    let mut total = Complex64::new(0.0, 0.0);
    let mut breaks = quarter_breaks_tau(lambda, k, 0.0, 1.0);
    if breaks.len() == 2 {
        breaks.insert(1, 0.5);
    }
    for w in breaks.windows(2) {
        for (tau, wt) in g.mapped(w[0], w[1]) {
            total += wt * table.gamma_cube * phase(tau);
            nodes += 1;
        }
    }
    // Quarters of [1,3] in σ, with τ′(σ) = ±3σ²/2.
    for i in 0..4 {
        let (anchor, dir) = QUARTERS[i];
        let (lo, hi) = if dir > 0.0 { (anchor, anchor + 0.5) } else { (anchor - 0.5, anchor) };
        let mut sig: Vec<f64> = quarter_breaks_tau(lambda, k, lo, hi)
            .into_iter()
            .map(|tau| (2.0 * (tau - anchor).abs()).cbrt().min(1.0))
            .collect();
        // at most 1/16 in σ per panel
        for j in 1..16 {
            sig.push(j as f64 / 16.0);
        }
        sig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sig.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        for w in sig.windows(2) {
            for (s, wt) in g.mapped(w[0], w[1]) {
                let tau = quarter_tau(i, s);
                let jac = 1.5 * s * s;
                total += wt * jac * table.quarter(i, s) * phase(tau);
                nodes += 1;
            }
        }
    }
    Ok((total, nodes))
}

/// Quarter-cycle break points of `λτ^k` on `[lo, hi]`, endpoints included.
fn quarter_breaks_tau(lambda: f64, k: u32, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    if lambda > 0.0 {
        let kf = k as f64;
        let step = 0.25 / lambda;
        let j0 = (lo.powf(kf) / step).floor() as u64 + 1;
        let j1 = (hi.powf(kf) / step).ceil() as u64;
        for j in j0..j1 {
            let tau = (j as f64 * step).powf(1.0 / kf);
            if tau > *pts.last().unwrap() && tau < hi {
                pts.push(tau);
            }
        }
    }
    pts.push(hi);
    pts
}

/// `max |v(β)|·(1 + n|β|)^{1/k}/P³` over `β = 2^j/n`, `j ∈ js`, with
/// `n = P^{3k}`.
pub fn decay_constant(p: f64, k: u32, js: impl IntoIterator<Item = i32>) -> Result<f64> {
    let n = p.powi(3 * k as i32);
    let p3 = p.powi(3);
    let mut worst = 0.0f64;
    for j in js {
        let b = 2f64.powi(j) / n;
        let v = v_beta(b, p, k, OscMethod::Reduced1d)?;
        worst = worst.max(v.value().norm() * (1.0 + n * b).powf(1.0 / k as f64) / p3);
    }
    Ok(worst)
}
