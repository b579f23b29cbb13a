//! Dickman's function and smooth numbers in arithmetic progressions.
//!
//! `ρ = 1` on `[0,1]`, `ρ = 0` below 0, and `xρ'(x) = −ρ(x−1)` for `x > 1`.
//! Node values on a mesh of step `1/1024` come from
//! `ρ(x) = ρ(x₀) − ∫_{x₀}^{x} ρ(t−1)/t dt`, one cell at a time. Between
//! nodes, ρ is a cubic Hermite interpolant built from the node values and the
//! exact derivatives `−ρ(x−1)/x`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::reps::{smooth_sieve, smoothness_bound};

/// Mesh cells per unit interval.
const CELLS_PER_UNIT: usize = 1024;
/// Range of the shared evaluator behind [`rho`]; `ρ(64) < 1e-100`.
const SHARED_MAX_X: f64 = 64.0;
/// Default range of a fresh evaluator.
pub const DEFAULT_MAX_X: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct DickmanEvaluator {
    max_x: f64,
    values: Vec<f64>,
}

impl DickmanEvaluator {
    pub fn new(max_x: f64) -> Result<Self> {
        if !(max_x >= 1.0) || !max_x.is_finite() {
            return invalid("range of the Dickman evaluator must be finite and at least 1");
        }
        let units = max_x.ceil() as usize;
        let n = units * CELLS_PER_UNIT;
        let h = 1.0 / CELLS_PER_UNIT as f64;
        let mut values = vec![1.0; n + 1];
        for j in CELLS_PER_UNIT + 1..=n {
            // ρ(t−1) on the cell [x_{j−1}, x_j] is the Hermite cubic on cell
            // j − 1 − CELLS_PER_UNIT, already final.
            let a = (j - 1) as f64 * h;
            let b = j as f64 * h;
            let cell = j - 1 - CELLS_PER_UNIT;
            let f = |t: f64| hermite_in_cell(&values, cell, t - 1.0) / t;
            let integral = adaptive_simpson(&f, a, b, 1e-16, 20);
            values[j] = values[j - 1] - integral;
        }
        Ok(DickmanEvaluator { max_x, values })
    }

    pub fn max_x(&self) -> f64 {
        self.max_x
    }

    /// `ρ(x)`; errors when `x` exceeds the evaluator's range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x > self.max_x {
            return invalid(format!("x = {x} exceeds the evaluator range {}", self.max_x));
        }
        Ok(self.value(x))
    }

    fn value(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x < 0.0 {
            return 0.0;
        }
        if x <= 1.0 {
            return 1.0;
        }
        let pos = x * CELLS_PER_UNIT as f64;
        let cell = (pos.floor() as usize).min(self.values.len() - 2);
        hermite_in_cell(&self.values, cell, x)
    }

    /// `ρ'(x) = −ρ(x−1)/x` for `x > 1`, zero on `[0,1)`.
    pub fn derivative(&self, x: f64) -> f64 {
        if x <= 1.0 {
            0.0
        } else {
            -self.value(x - 1.0) / x
        }
    }
}

/// Node derivative seen from inside `cell`. The only kink of ρ′ on the
/// mesh is at `x = 1`, where the right limit is −1.
fn node_slope(values: &[f64], node: usize, from_right: bool) -> f64 {
    let x = node as f64 / CELLS_PER_UNIT as f64;
    if node < CELLS_PER_UNIT || (node == CELLS_PER_UNIT && !from_right) {
        return 0.0;
    }
    -values[node - CELLS_PER_UNIT] / x
}

fn hermite_in_cell(values: &[f64], cell: usize, x: f64) -> f64 {
    let h = 1.0 / CELLS_PER_UNIT as f64;
    let x0 = cell as f64 * h;
    let t = ((x - x0) / h).clamp(0.0, 1.0);
    let (y0, y1) = (values[cell], values[cell + 1]);
    let m0 = node_slope(values, cell, true) * h;
    let m1 = node_slope(values, cell + 1, false) * h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * m1
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn shared() -> &'static DickmanEvaluator {
    static EVAL: OnceLock<DickmanEvaluator> = OnceLock::new();
    EVAL.get_or_init(|| DickmanEvaluator::new(SHARED_MAX_X).expect("valid range"))
}

/// Dickman's `ρ(x)`. Beyond `x = 64` the value is below `1e-100` and is
/// returned as 0.
pub fn rho(x: f64) -> f64 {
    if x > SHARED_MAX_X {
        return 0.0;
    }
    shared().value(x)
}

/// `ρ'(x)`, exact in terms of ρ itself.
pub fn rho_derivative(x: f64) -> f64 {
    if x > SHARED_MAX_X + 1.0 {
        return 0.0;
    }
    if x <= 1.0 {
        0.0
    } else {
        -rho(x - 1.0) / x
    }
}

/// Comparison of `A_r(m)`, the number of `P^η`-smooth `x ≤ m` with
/// `x ≡ r (mod q)`, against `q⁻¹ m ρ(log m / (η log P))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothProgressionCount {
    pub m: u64,
    pub q: u64,
    pub r: u64,
    pub smooth_bound: u64,
    pub actual: u64,
    pub predicted: f64,
    /// `|actual − predicted| · log m / m`.
    pub residual_ratio: f64,
    pub hypotheses_hold: bool,
    pub violations: Vec<String>,
}

pub fn smooth_progression_count(m: u64, q: u64, r: u64, eta: f64, p: f64) -> Result<SmoothProgressionCount> {
    if q == 0 || m == 0 {
        return invalid("m and q must be positive");
    }
    if !(eta > 0.0) || !(p > 1.0) {
        return invalid("need η > 0 and P > 1");
    }
    let bound = smoothness_bound(p, eta);
    let sieve = smooth_sieve(m, bound)?;
    let r = r % q;
    let actual = sieve.members().filter(|x| x % q == r).count() as u64;
    let u = (m as f64).ln() / (eta * p.ln());
    let predicted = m as f64 * rho(u) / q as f64;
    let mf = m as f64;
    let residual_ratio = (actual as f64 - predicted).abs() * mf.ln().max(f64::MIN_POSITIVE) / mf;
    let y = p.powf(eta);
    let mut violations = Vec::new();
    if q as f64 > y * (1.0 + 1e-12) {
        violations.push(format!("q = {q} exceeds P^η = {y:.6}"));
    }
    if mf <= y {
        violations.push(format!("m = {m} does not exceed P^η = {y:.6}"));
    }
    if mf > p * (1.0 + 1e-12) {
        violations.push(format!("m = {m} exceeds P = {p}"));
    }
    Ok(SmoothProgressionCount {
        m,
        q,
        r,
        smooth_bound: bound,
        actual,
        predicted,
        residual_ratio,
        hypotheses_hold: violations.is_empty(),
        violations,
    })
}
