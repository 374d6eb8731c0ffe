#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use stablewave::quadrature::gauss_legendre;

/// Standard symmetric α-stable draws (characteristic function
/// `exp(−|λ|^α)`) by the Chambers–Mallows–Stuck method.
pub fn cms_samples(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: f64 = std::f64::consts::PI * (rng.random::<f64>() - 0.5);
            let w: f64 = rng.sample(Exp1);
            (alpha * v).sin() / v.cos().powf(1.0 / alpha) * ((v - alpha * v).cos() / w).powf((1.0 - alpha) / alpha)
        })
        .collect()
}

/// `A^H f_{x,t}(y)` for `f_{x,t}(z) = 1_{|x−z| < at} / (4πa|x−z|)`, with the
/// Fourier transform computed by Gauss–Legendre quadrature in spherical
/// coordinates about `x`, `nodes` points per axis.
pub fn kirchhoff_ah_by_quadrature(x: [f64; 3], t: f64, a: f64, y: [f64; 3], weight_exponent: f64, nodes: usize) -> f64 {
    let rule = gauss_legendre(nodes);
    let radius = a * t;
    let mut transform = Complex64::new(0.0, 0.0);
    for (r, wr) in rule.mapped(0.0, radius) {
        for (th, wth) in rule.mapped(0.0, std::f64::consts::PI) {
            for (ph, wph) in rule.mapped(0.0, 2.0 * std::f64::consts::PI) {
                let u = [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()];
                let phase = (0..3).map(|l| (x[l] + u[l]) * y[l]).sum::<f64>();
                let jacobian = r * r * th.sin();
                let f = 1.0 / (4.0 * std::f64::consts::PI * a * r);
                transform += Complex64::from_polar(wr * wth * wph * jacobian * f, phase);
            }
        }
    }
    let weight: f64 = y.iter().map(|v| v.signum() / v.abs().powf(weight_exponent)).product();
    transform.im * weight
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
