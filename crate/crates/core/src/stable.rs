//! Constants, the auxiliary density and its sampler.
//!
//! The LePage series needs three ingredients besides the Poisson arrivals:
//! the normalizing constant of the series, the scale of the Gaussian
//! multipliers (chosen so that `E|g|^α = 1`), and a positive density `φ` on
//! `R³` from which the spatial points are drawn. Here `φ` is the product of
//! the one-dimensional marginal
//!
//! ```text
//! K / (|x| (|log|x|| + 1)^(1+η)),      K = η / 4,
//! ```
//!
//! which has logarithmically heavy tails at both `0` and `∞`. Under
//! `u = log|x|` the marginal becomes the two-sided density
//! `(η/2)(|u| + 1)^(-1-η)`, whose CDF inverts in closed form.

use std::f64::consts::PI;

use rand::Rng;
use statrs::function::gamma::gamma;

use crate::error::{check_domain, Error, Result};

/// Largest `|log|x||` the sampler produces. Coordinates beyond it would
/// overflow or underflow `f64`; they are redrawn and the density used by the
/// series is renormalized accordingly.
pub const MAX_LOG_MAGNITUDE: f64 = 700.0;

/// `C_α = (Γ(2−α) cos(πα/2) / (1−α))^{1/α}` for `α ∈ (1, 2)`.
///
/// Both numerator and denominator are negative on `(1, 2)`, so `C_α > 0`.
/// `C_α^α` is the scale of the bare series `Σ ε_k Γ_k^{-1/α}`; the series
/// itself is therefore multiplied by [`lepage_series_factor`] `= 1/C_α`.
pub fn lepage_constant(alpha: f64) -> Result<f64> {
    check_domain("alpha", alpha, "(1, 2)", alpha > 1.0 && alpha < 2.0)?;
    let ratio = gamma(2.0 - alpha) * (PI * alpha / 2.0).cos() / (1.0 - alpha);
    Ok(ratio.powf(1.0 / alpha))
}

/// Multiplier applied to every LePage series so that `‖I(f)‖_α^α = ∫|f|^α`.
pub fn lepage_series_factor(alpha: f64) -> Result<f64> {
    Ok(1.0 / lepage_constant(alpha)?)
}

/// Standard deviation `σ` with `E|σ N(0,1)|^α = 1`.
pub fn gaussian_alpha_norm(alpha: f64) -> Result<f64> {
    check_domain("alpha", alpha, "(0, 2]", alpha > 0.0 && alpha <= 2.0)?;
    let abs_moment = 2f64.powf(alpha / 2.0) * gamma((alpha + 1.0) / 2.0) / PI.sqrt();
    Ok(abs_moment.powf(-1.0 / alpha))
}

/// Normalizing constant `K` of the one-dimensional marginal of `φ`.
pub fn phi_norm_constant(eta: f64) -> Result<f64> {
    check_domain("eta", eta, "(0, inf)", eta > 0.0)?;
    Ok(eta / 4.0)
}

/// The product density `φ(x) = ∏ K / (|x_l| (|log|x_l|| + 1)^{1+η})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiDensity {
    pub eta: f64,
    pub k_norm: f64,
}

impl PhiDensity {
    pub fn new(eta: f64) -> Result<Self> {
        Ok(Self {
            eta,
            k_norm: phi_norm_constant(eta)?,
        })
    }

    /// One-dimensional marginal at `x`; `x = 0` is singular.
    pub fn marginal(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.k_norm / (ax * (ax.ln().abs() + 1.0).powf(1.0 + self.eta))
    }

    /// `log` of the marginal given `log|x|`.
    pub fn ln_marginal(&self, ln_abs: f64) -> f64 {
        self.k_norm.ln() - ln_abs - (1.0 + self.eta) * (ln_abs.abs() + 1.0).ln()
    }

    pub fn density_at(&self, x: &[f64; 3]) -> Result<f64> {
        for (axis, &c) in x.iter().enumerate() {
            if c == 0.0 {
                return Err(Error::SingularPoint { axis, point: *x });
            }
        }
        Ok(x.iter().map(|&c| self.marginal(c)).product())
    }

    /// Probability that one coordinate has `|log|x|| > MAX_LOG_MAGNITUDE`.
    pub fn clipped_mass(&self) -> f64 {
        (1.0 + MAX_LOG_MAGNITUDE).powf(-self.eta)
    }

    /// `log` of the density the sampler actually draws from: `φ` conditioned
    /// on every `|log|x_l|| ≤ MAX_LOG_MAGNITUDE`.
    pub fn ln_sampling_density(&self, ln_abs: &[f64; 3]) -> f64 {
        let renorm = 3.0 * (-self.clipped_mass()).ln_1p();
        ln_abs.iter().map(|&l| self.ln_marginal(l)).sum::<f64>() - renorm
    }

    /// Quantile function of `|log|x||`: `(1 − p)^{-1/η} − 1`.
    pub fn log_magnitude_quantile(&self, p: f64) -> f64 {
        (1.0 - p).powf(-1.0 / self.eta) - 1.0
    }
}

/// Inverse-CDF sampler for one coordinate of `φ`.
///
/// One 64-bit draw supplies everything: the top 53 bits give the uniform `V`
/// in `|log|x|| = (1 − V)^{-1/η} − 1`, bit 0 the sign of `log|x|`, bit 1 the
/// sign of `x`. Draws with `V = 0` (which would give `|x| = 1` through a
/// degenerate branch) or `|log|x||` beyond [`MAX_LOG_MAGNITUDE`] are rejected.
#[derive(Debug, Clone, Copy)]
pub struct PhiSampler {
    inv_eta: f64,
    v_max: f64,
}

/// Raw accepted draw for one coordinate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CoordDraw {
    pub v: f64,
    pub small: bool,
    pub negative: bool,
}

impl PhiSampler {
    pub fn new(eta: f64) -> Result<Self> {
        let phi = PhiDensity::new(eta)?;
        Ok(Self {
            inv_eta: 1.0 / eta,
            v_max: 1.0 - phi.clipped_mass(),
        })
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CoordDraw {
        loop {
            let bits: u64 = rng.random();
            let v = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if v > 0.0 && v <= self.v_max {
                return CoordDraw {
                    v,
                    small: bits & 1 == 1,
                    negative: bits & 2 == 2,
                };
            }
        }
    }

    pub(crate) fn coordinate(&self, d: CoordDraw) -> f64 {
        let u = (1.0 - d.v).powf(-self.inv_eta) - 1.0;
        let magnitude = if d.small { (-u).exp() } else { u.exp() };
        if d.negative {
            -magnitude
        } else {
            magnitude
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.draw(rng);
        self.coordinate(d)
    }
}

/// Draw one coordinate from the marginal of `φ`.
pub fn sample_phi_marginal<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> Result<f64> {
    Ok(PhiSampler::new(eta)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Reference values computed with mpmath at 30 digits.
    const C_1_2: f64 = 1.631_144_889_317_430_8;
    const C_1_5: f64 = 1.845_270_148_644_028_4;
    const C_1_8: f64 = 2.567_138_850_536_383_2;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn lepage_constant_reference_values() {
        assert!(rel(lepage_constant(1.2).unwrap(), C_1_2) < 1e-12);
        assert!(rel(lepage_constant(1.5).unwrap(), C_1_5) < 1e-12);
        assert!(rel(lepage_constant(1.8).unwrap(), C_1_8) < 1e-12);
        assert!(lepage_constant(1.0).is_err());
        assert!(lepage_constant(2.0).is_err());
        assert!(lepage_constant(0.5).is_err());
    }

    #[test]
    fn lepage_constant_positive_on_domain() {
        for i in 1..100 {
            let alpha = 1.0 + i as f64 / 100.0;
            let c = lepage_constant(alpha).unwrap();
            assert!(c > 0.0 && c.is_finite(), "alpha={alpha}");
        }
    }

    #[test]
    fn gaussian_norm_reference_values() {
        assert!(rel(gaussian_alpha_norm(2.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gaussian_alpha_norm(1.5).unwrap(), 1.105_743_098_134_313_1) < 1e-12);
        assert!(rel(gaussian_alpha_norm(1.0).unwrap(), (PI / 2.0).sqrt()) < 1e-12);
        assert!(rel(gaussian_alpha_norm(1.2).unwrap(), 1.187_627_433_045_136_3) < 1e-12);
        assert!(gaussian_alpha_norm(0.0).is_err());
        assert!(gaussian_alpha_norm(2.1).is_err());
    }

    #[test]
    fn gaussian_norm_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma = gaussian_alpha_norm(1.5).unwrap();
        let n = 200_000;
        let mean = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                (sigma * z).abs().powf(1.5)
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean={mean}");
    }

    /// Quadrature of `|x|^{-1}(|log|x||+1)^{-1-η}` over the real line after
    /// `x = e^u` and the tail map `|u| = s/(1−s)`.
    fn normalizing_integral(eta: f64) -> f64 {
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * h;
            let u = s / (1.0 - s);
            let du = 1.0 / ((1.0 - s) * (1.0 - s));
            acc += (u + 1.0).powf(-1.0 - eta) * du * h;
        }
        // two signs of u, two signs of x
        4.0 * acc
    }

    #[test]
    fn phi_norm_matches_quadrature() {
        for &eta in &[1.0, 2.0, 3.0] {
            let k = phi_norm_constant(eta).unwrap();
            let oracle = 1.0 / normalizing_integral(eta);
            assert!(rel(k, oracle) < 1e-6, "eta={eta} k={k} oracle={oracle}");
        }
        assert_eq!(phi_norm_constant(1.0).unwrap(), 0.25);
        assert_eq!(phi_norm_constant(2.0).unwrap(), 0.5);
        assert!(phi_norm_constant(1e-9).unwrap() < 1e-9);
        assert!(phi_norm_constant(0.0).is_err());
    }

    #[test]
    fn density_values() {
        let phi = PhiDensity::new(1.0).unwrap();
        assert!(rel(phi.density_at(&[1.0, 1.0, 1.0]).unwrap(), 0.015625) < 1e-15);
        let v = phi.density_at(&[std::f64::consts::E, 1.0, 1.0]).unwrap();
        assert!(rel(v, 1.437_029_067_075_946_6e-3) < 1e-12, "{v}");
        assert!(matches!(
            phi.density_at(&[1.0, 0.0, 2.0]),
            Err(Error::SingularPoint { axis: 1, .. })
        ));
        assert!(phi.density_at(&[-3.0, 1e-30, 1e30]).unwrap() > 0.0);
    }

    #[test]
    fn ln_marginal_agrees_with_marginal() {
        let phi = PhiDensity::new(1.3).unwrap();
        for &x in &[1e-8, 0.3, 1.0, 2.5, 1e9] {
            let direct = phi.marginal(x).ln();
            assert!((phi.ln_marginal(f64::ln(x)) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_is_symmetric_and_matches_median() {
        let sampler = PhiSampler::new(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let mut positive = 0usize;
        let mut logs: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            assert!(x != 0.0 && x.is_finite());
            if x > 0.0 {
                positive += 1;
            }
            logs.push(x.abs().ln().abs());
        }
        let frac = positive as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.003, "P(x>0)={frac}");
        logs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = logs[n / 2];
        assert!((median - 1.0).abs() < 0.01, "median={median}");
    }
}
