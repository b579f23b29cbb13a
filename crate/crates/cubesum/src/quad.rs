//! Quadrature rules: Gauss-Legendre on panels and double-exponential
//! (tanh-sinh) for integrands with algebraic endpoint singularities.

use std::f64::consts::{FRAC_PI_2, PI};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton iteration from the Tricomi initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let d = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + d * x, d * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh-sinh quadrature of `f` over `[a, b]`.
///
/// The integrand receives `(x, x − a, b − x)`, with both distances computed
/// without cancellation, so that endpoint singularities can be evaluated
/// accurately. Levels are refined until two successive estimates agree to
/// `tol` (relative), up to 12 halvings of the step.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let t_max = 6.0;
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        // 1 ± tanh(u) without cancellation
        let dl = half * 2.0 / (1.0 + (-2.0 * u).exp());
        let dr = half * 2.0 / (1.0 + (2.0 * u).exp());
        if dl <= 0.0 || dr <= 0.0 || !w.is_finite() || w == 0.0 {
            return 0.0;
        }
        let x = if dl < dr { a + dl } else { b - dr };
        half * w * f(x, dl, dr)
    };
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h;
        let done = (next - estimate).abs() <= tol * next.abs().max(1e-300);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        for n in [1usize, 2, 5, 8, 12] {
            let g = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 0 { 2.0 / (deg + 1) as f64 } else { 0.0 };
                let got = g.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // ∫₀¹ x^{-2/3} dx = 3
        let v = tanh_sinh(|_, dl, _| dl.powf(-2.0 / 3.0), 0.0, 1.0, 1e-14);
        assert!((v - 3.0).abs() < 1e-12, "{v}");
        // ∫₀¹ x^{-2/3}(1-x)^{-2/3} dx = B(1/3,1/3)
        let b = statrs::function::beta::beta(1.0 / 3.0, 1.0 / 3.0);
        let v = tanh_sinh(
            |_, dl, dr| dl.powf(-2.0 / 3.0) * dr.powf(-2.0 / 3.0),
            0.0,
            1.0,
            1e-14,
        );
        assert!((v - b).abs() < 1e-11 * b, "{v} vs {b}");
    }
}
