//! Quadrature rules: Gauss–Legendre for smooth integrands, tanh–sinh for
//! integrable endpoint singularities.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`, started from the Tricomi
    /// approximation; accurate to a few ulps for `n` up to several thousand.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared, lazily built Gauss–Legendre rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

/// Smallest power of two `≥ n`, at least `min`.
pub(crate) fn pow2_nodes(n: f64, min: usize) -> usize {
    let n = if n.is_finite() { n.max(1.0).ceil() as usize } else { usize::MAX };
    n.max(min).checked_next_power_of_two().unwrap_or(usize::MAX)
}

/// One tanh–sinh node on `(-1, 1)`; the distances to both endpoints are
/// kept separately so integrands singular at an endpoint can be evaluated
/// without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct TanhSinhNode {
    pub x: f64,
    pub weight: f64,
    /// `1 + x`
    pub from_lower: f64,
    /// `1 − x`
    pub from_upper: f64,
}

/// Tanh–sinh (double exponential) rule with step `h` and `2m + 1` nodes.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    pub nodes: Vec<TanhSinhNode>,
}

impl TanhSinh {
    pub fn new(h: f64, m: usize) -> Self {
        let mut nodes = Vec::with_capacity(2 * m + 1);
        for k in -(m as i64)..=(m as i64) {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            let cu = u.cosh();
            let weight = h * 0.5 * PI * t.cosh() / (cu * cu);
            // 1 - tanh(u) = 2 / (1 + e^{2u})
            let from_upper = 2.0 / (1.0 + (2.0 * u).exp());
            let from_lower = 2.0 / (1.0 + (-2.0 * u).exp());
            if from_upper <= 0.0 || from_lower <= 0.0 || weight == 0.0 {
                continue;
            }
            nodes.push(TanhSinhNode {
                x: u.tanh(),
                weight,
                from_lower,
                from_upper,
            });
        }
        Self { nodes }
    }

    /// A rule whose nodes stay at least ~1e-300 away from the endpoints.
    pub fn with_level(level: u32) -> Self {
        let h = 2f64.powi(-(level as i32));
        let m = (6.0 / h).ceil() as usize;
        Self::new(h, m)
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .map(|n| n.weight * half * f(a + half * n.from_lower))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 33, 64] {
            let rule = GaussLegendre::new(n);
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n) {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn gauss_legendre_large_rule() {
        let rule = gauss_legendre(2048);
        let got = rule.integrate(0.0, 1.0, |x| (300.0 * x).cos());
        assert!((got - (300.0f64).sin() / 300.0).abs() < 1e-13);
        assert!(rule.nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let rule = TanhSinh::with_level(5);
        // ∫_0^1 x^{-0.8} dx = 5
        let got = rule.integrate(0.0, 1.0, |x| x.powf(-0.8));
        assert!((got - 5.0).abs() < 1e-6, "{got}");
        let got = rule.integrate(0.0, 2.0, |x| x.sqrt());
        assert!((got - 2.0 / 3.0 * 2f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn pow2() {
        assert_eq!(pow2_nodes(3.0, 64), 64);
        assert_eq!(pow2_nodes(100.0, 64), 128);
    }
}
