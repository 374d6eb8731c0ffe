use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Result};

/// Model parameters shared by every stage of the construction.
///
/// * `alpha` — stability index, in `(1, 2)`;
/// * `hurst` — Hurst parameter of the driving field, in `(1/2, 1)`;
/// * `eta` — tail exponent of the auxiliary density used by the LePage series;
/// * `wave_speed` — propagation speed `a` of the wave operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub hurst: f64,
    pub eta: f64,
    pub wave_speed: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, hurst: f64, eta: f64, wave_speed: f64) -> Result<Self> {
        let params = Self {
            alpha,
            hurst,
            eta,
            wave_speed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_domain("alpha", self.alpha, "(1, 2)", self.alpha > 1.0 && self.alpha < 2.0)?;
        check_domain("hurst", self.hurst, "(1/2, 1)", self.hurst > 0.5 && self.hurst < 1.0)?;
        check_domain("eta", self.eta, "(0, inf)", self.eta > 0.0)?;
        check_domain("wave_speed", self.wave_speed, "(0, inf)", self.wave_speed > 0.0)?;
        Ok(())
    }

    /// Exponent `H + 1/α − 1` of the signed spectral weight; lies in `(0, 1)`.
    pub fn weight_exponent(&self) -> f64 {
        self.hurst + 1.0 / self.alpha - 1.0
    }

    /// Hölder exponent `(3H − 1) ∧ 1` of the wave solution.
    pub fn holder_target(&self) -> f64 {
        (3.0 * self.hurst - 1.0).min(1.0)
    }

    /// Power of `|log h|` in the modulus of continuity, with `δ = 0`.
    pub fn log_correction_exponent(&self) -> f64 {
        3.0 / self.alpha - 0.5
    }

    /// The constant `d = (1 + η)(2/α − 1)` that governs the logarithmic
    /// factors in the increment bounds. Reported, never fitted.
    pub fn increment_log_constant(&self) -> f64 {
        (1.0 + self.eta) * (2.0 / self.alpha - 1.0)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            hurst: 0.7,
            eta: 1.0,
            wave_speed: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(1.0, 0.7, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2.0, 0.7, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.5, 0.5, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.5, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.5, 0.7, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.5, 0.7, 1.0, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.7, 1.0, 1.0).is_err());
    }

    #[test]
    fn weight_exponent_in_unit_interval() {
        for &alpha in &[1.01, 1.2, 1.5, 1.8, 1.99] {
            for &hurst in &[0.51, 0.6, 0.75, 0.99] {
                let p = ModelParams::new(alpha, hurst, 1.0, 1.0).unwrap();
                let e = p.weight_exponent();
                assert!(e > 0.0 && e < 1.0, "alpha={alpha} hurst={hurst} e={e}");
            }
        }
    }

    #[test]
    fn holder_target_saturates() {
        let p = ModelParams::new(1.5, 0.6, 1.0, 1.0).unwrap();
        assert!((p.holder_target() - 0.8).abs() < 1e-12);
        let p = ModelParams::new(1.5, 0.85, 1.0, 1.0).unwrap();
        assert_eq!(p.holder_target(), 1.0);
    }
}
