//! The harmonizable fractional stable field `Z^H`, its smoothed versions
//! and the stochastic measure `Z^H(A)`, all evaluated as LePage series on a
//! shared ensemble.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ah::{ln_abs, ln_norm, sign, AhIntegrand, FourierIntegrand, WeightedKernel};
use crate::ensemble::LePageEnsemble;
use crate::error::{Error, Result};
use crate::measure::{lepage_integral, Integrand, LogValue};
use crate::params::ModelParams;
use crate::region::{dot, RegionSpec};

/// `Re ∏ (e^{i x_l y_l} − 1) / |y_l|^{H+1/α}`.
#[derive(Debug, Clone, Copy)]
pub struct ZhKernel {
    pub x: [f64; 3],
    exponent: f64,
}

impl ZhKernel {
    pub fn new(x: [f64; 3], params: &ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            x,
            exponent: params.hurst + 1.0 / params.alpha,
        })
    }
}

/// `e^{iθ} − 1` without cancellation for small `θ`.
fn expi_minus_one(theta: f64) -> Complex64 {
    let s = (0.5 * theta).sin();
    Complex64::new(-2.0 * s * s, theta.sin())
}

impl Integrand for ZhKernel {
    fn eval(&self, y: &[f64; 3]) -> f64 {
        self.eval_log(y, &ln_abs(y)).value()
    }

    fn eval_log(&self, y: &[f64; 3], ln_abs: &[f64; 3]) -> LogValue {
        let p: Complex64 = (0..3).map(|l| expi_minus_one(self.x[l] * y[l])).product();
        LogValue {
            mantissa: p.re,
            ln_scale: -self.exponent * (ln_abs[0] + ln_abs[1] + ln_abs[2]),
        }
    }
}

/// `sin((x,y)) e^{−ε²|y|²/2} ∏ sign y_l/|y_l|^{H+1/α−1}`, the integrand of
/// the smoothed field `Z^{H,ε}(x)`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothZhKernel {
    pub x: [f64; 3],
    pub eps: f64,
    kernel: WeightedKernel,
}

impl SmoothZhKernel {
    pub fn new(x: [f64; 3], eps: f64, params: &ModelParams) -> Result<Self> {
        crate::error::check_domain("eps", eps, "(0, inf)", eps > 0.0)?;
        Ok(Self {
            x,
            eps,
            kernel: WeightedKernel::new(params)?,
        })
    }
}

impl Integrand for SmoothZhKernel {
    fn eval(&self, y: &[f64; 3]) -> f64 {
        self.eval_log(y, &ln_abs(y)).value()
    }

    fn eval_log(&self, y: &[f64; 3], ln_abs: &[f64; 3]) -> LogValue {
        LogValue {
            mantissa: sign(y) * dot(&self.x, y).sin() * gaussian_damping(self.eps, y, ln_abs),
            ln_scale: self.kernel.ln_weight(ln_abs),
        }
    }
}

/// `e^{−ε²|y|²/2}`, zero once `ε|y|` overflows.
fn gaussian_damping(eps: f64, y: &[f64; 3], ln_abs: &[f64; 3]) -> f64 {
    if eps == 0.0 {
        return 1.0;
    }
    let r = (eps.ln() + ln_norm(y, ln_abs)).exp();
    (-0.5 * r * r).exp()
}

/// Multiplies another integrand by `e^{−ε²|y|²/2} − 1`.
struct DampingDefect<'a, I: ?Sized> {
    inner: &'a I,
    eps: f64,
}

impl<I: Integrand + ?Sized> Integrand for DampingDefect<'_, I> {
    fn eval(&self, y: &[f64; 3]) -> f64 {
        self.try_eval_log(y, &ln_abs(y)).map_or(f64::NAN, |v| v.value())
    }

    fn try_eval_log(&self, y: &[f64; 3], ln_abs: &[f64; 3]) -> Result<LogValue> {
        let v = self.inner.try_eval_log(y, ln_abs)?;
        let defect = if self.eps == 0.0 {
            0.0
        } else {
            let r = (self.eps.ln() + ln_norm(y, ln_abs)).exp();
            (-0.5 * r * r).exp_m1()
        };
        Ok(LogValue {
            mantissa: v.mantissa * defect,
            ln_scale: v.ln_scale,
        })
    }
}

/// `Z^H(x)`.
pub fn zh_point(ens: &LePageEnsemble, x: &[f64; 3], params: &ModelParams) -> Result<f64> {
    ens.check_alpha(params)?;
    lepage_integral(ens, &ZhKernel::new(*x, params)?)
}

/// `Z^{H,ε}(x)`.
pub fn zh_smooth_point(ens: &LePageEnsemble, x: &[f64; 3], params: &ModelParams, eps: f64) -> Result<f64> {
    ens.check_alpha(params)?;
    lepage_integral(ens, &SmoothZhKernel::new(*x, eps, params)?)
}

/// `Z^H(A) = ∫ f_A(y) M(dy)`.
pub fn zh_measure(ens: &LePageEnsemble, region: &RegionSpec, params: &ModelParams) -> Result<f64> {
    ens.check_alpha(params)?;
    region.check_finite()?;
    lepage_integral(ens, &AhIntegrand::new(region, params)?)
}

/// `I^H(g) = ∫ A^H g(y) M(dy)`.
pub fn ih_integral(
    ens: &LePageEnsemble,
    g: &(impl FourierIntegrand + ?Sized),
    params: &ModelParams,
) -> Result<f64> {
    ens.check_alpha(params)?;
    lepage_integral(ens, &AhIntegrand::new(g, params)?)
}

/// One row of [`smoothing_convergence_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingRow {
    pub eps: f64,
    /// `Z^{H,ε}(A)`, with `f_{A,ε} = e^{−ε²|y|²/2} f_A`.
    pub smoothed: f64,
    /// `|Z^{H,ε}(A) − Z^H(A)|`, summed term by term.
    pub error: f64,
}

/// `|Z^{H,ε}(A) − Z^H(A)|` for each `ε` on one ensemble. The difference is
/// summed directly from the terms `f_A(ξ_k)(e^{−ε²|ξ_k|²/2} − 1)`, so small
/// errors are not lost to cancellation.
pub fn smoothing_convergence_report(
    ens: &LePageEnsemble,
    region: &RegionSpec,
    params: &ModelParams,
    eps_list: &[f64],
) -> Result<Vec<SmoothingRow>> {
    ens.check_alpha(params)?;
    region.check_finite()?;
    for (i, &e) in eps_list.iter().enumerate() {
        crate::error::check_domain("eps", e, "[0, inf)", e >= 0.0)?;
        if i > 0 && e >= eps_list[i - 1] {
            return Err(Error::Invalid("eps_list must be strictly decreasing".into()));
        }
    }
    let f_a = AhIntegrand::new(region, params)?;
    let exact = lepage_integral(ens, &f_a)?;
    eps_list
        .iter()
        .map(|&eps| {
            let diff = lepage_integral(ens, &DampingDefect { inner: &f_a, eps })?;
            Ok(SmoothingRow {
                eps,
                smoothed: exact + diff,
                error: diff.abs(),
            })
        })
        .collect()
}

/// `A^H g` for `g` given only through point values on a box, with `ĝ` by
/// tensor Gauss–Legendre quadrature.
pub struct SupportedFunction<F> {
    pub f: F,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub min_nodes: usize,
}

impl<F: Fn(&[f64; 3]) -> f64 + Sync> FourierIntegrand for SupportedFunction<F> {
    fn value(&self, x: &[f64; 3]) -> f64 {
        if (0..3).all(|l| x[l] >= self.lower[l] && x[l] <= self.upper[l]) {
            (self.f)(x)
        } else {
            0.0
        }
    }

    fn fourier(&self, y: &[f64; 3]) -> Result<Complex64> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite frequency {y:?}")));
        }
        let rules: Vec<_> = (0..3)
            .map(|l| {
                let osc = y[l].abs() * (self.upper[l] - self.lower[l]);
                if osc > 1e5 {
                    return Err(Error::Quadrature(format!(
                        "frequency {} too high for tensor quadrature",
                        y[l]
                    )));
                }
                Ok(crate::quadrature::gauss_legendre(crate::quadrature::pow2_nodes(
                    osc + self.min_nodes as f64,
                    self.min_nodes,
                )))
            })
            .collect::<Result<_>>()?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x0, w0) in rules[0].mapped(self.lower[0], self.upper[0]) {
            for (x1, w1) in rules[1].mapped(self.lower[1], self.upper[1]) {
                for (x2, w2) in rules[2].mapped(self.lower[2], self.upper[2]) {
                    let x = [x0, x1, x2];
                    acc += Complex64::from_polar(w0 * w1 * w2 * (self.f)(&x), dot(&x, y));
                }
            }
        }
        Ok(acc)
    }

    fn extent(&self) -> f64 {
        crate::region::norm(&[
            self.upper[0] - self.lower[0],
            self.upper[1] - self.lower[1],
            self.upper[2] - self.lower[2],
        ])
    }
}
