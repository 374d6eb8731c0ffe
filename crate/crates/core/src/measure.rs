//! LePage realizations of the stable measure `M` and of integrals `I(f)`.
//!
//! On a fixed ensemble,
//!
//! ```text
//! I(f) = C Σ_{k ≤ K} Γ_k^{-1/α} φ(ξ_k)^{-1/α} f(ξ_k) g_k,
//! ```
//!
//! so every quantity built from the same ensemble is coupled: linear
//! identities hold term by term, and differences such as `I(f_n) − I(f)`
//! are deterministic functions of the ensemble.

use crate::ensemble::{CoefficientLog, LePageEnsemble, TermSource};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::region::RegionSpec;

/// A real value stored as `mantissa · exp(ln_scale)`.
///
/// Spectral kernels combine singular powers of `|y_l|` with decaying
/// factors; at the extremes of the ensemble (coordinates as large as
/// `e^{700}`) the pieces overflow separately although the product is tiny.
/// Kernels therefore report the power-law part as a logarithm, and the
/// series folds it into the log-coefficient before exponentiating.
/// Mantissas are expected to stay bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl LogValue {
    pub fn plain(value: f64) -> Self {
        Self {
            mantissa: value,
            ln_scale: 0.0,
        }
    }

    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }
}

/// A deterministic function on `R³` integrated against `M`.
pub trait Integrand: Sync {
    fn eval(&self, y: &[f64; 3]) -> f64;

    /// Value at `y` given `ln_abs = log|y_l|`. Override when the magnitude
    /// can leave the `f64` range.
    fn eval_log(&self, y: &[f64; 3], ln_abs: &[f64; 3]) -> LogValue {
        let _ = ln_abs;
        LogValue::plain(self.eval(y))
    }

    /// Fallible form of [`Integrand::eval_log`], for integrands that need
    /// numerical work (quadrature) at each point.
    fn try_eval_log(&self, y: &[f64; 3], ln_abs: &[f64; 3]) -> Result<LogValue> {
        Ok(self.eval_log(y, ln_abs))
    }

    /// `∫|f|^α dy`, when known in closed form.
    fn lalpha_norm_hint(&self, alpha: f64) -> Option<f64> {
        let _ = alpha;
        None
    }
}

impl<F> Integrand for F
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    fn eval(&self, y: &[f64; 3]) -> f64 {
        self(y)
    }
}

/// The indicator `1_A`.
impl Integrand for RegionSpec {
    fn eval(&self, y: &[f64; 3]) -> f64 {
        if self.contains(y) {
            1.0
        } else {
            0.0
        }
    }

    fn lalpha_norm_hint(&self, _alpha: f64) -> Option<f64> {
        Some(self.volume())
    }
}

/// Terms whose log-magnitude falls below this are exactly zero in `f64`.
const LN_NEGLIGIBLE: f64 = -800.0;

/// `C Γ^{-1/α} φ(ξ)^{-1/α} f(ξ)` from its log-coefficient; `None` if not finite.
#[inline]
pub(crate) fn coefficient(ln_base: f64, v: LogValue) -> Option<f64> {
    if v.mantissa == 0.0 {
        return Some(0.0);
    }
    let ln_total = ln_base + v.ln_scale;
    if ln_total < LN_NEGLIGIBLE {
        return Some(0.0);
    }
    let scale = ln_total.exp();
    let c = if scale.is_finite() {
        v.mantissa * scale
    } else {
        v.mantissa.signum() * (ln_total + v.mantissa.abs().ln()).exp()
    };
    c.is_finite().then_some(c)
}

/// Per-term contributions `C Γ_k^{-1/α} φ(ξ_k)^{-1/α} f(ξ_k) g_k`.
pub fn lepage_terms(ens: &LePageEnsemble, f: &(impl Integrand + ?Sized)) -> Result<Vec<f64>> {
    let xis = ens.xis();
    let ln_abs = ens.ln_abs_xi();
    let ln_base = ens.ln_coefficients();
    let gs = ens.gs();
    (0..ens.truncation())
        .map(|k| {
            let v = f.try_eval_log(&xis[k], &ln_abs[k])?;
            coefficient(ln_base[k], v)
                .map(|c| c * gs[k])
                .ok_or(Error::NonFinite { k: k + 1 })
        })
        .collect()
}

/// Truncated LePage series for `I(f)`. Terms are summed in order of `k`,
/// so the value is a deterministic function of `(ens, f)`.
pub fn lepage_integral(ens: &LePageEnsemble, f: &(impl Integrand + ?Sized)) -> Result<f64> {
    let xis = ens.xis();
    let ln_abs = ens.ln_abs_xi();
    let ln_base = ens.ln_coefficients();
    let gs = ens.gs();
    let mut sum = 0.0;
    for k in 0..ens.truncation() {
        let v = f.try_eval_log(&xis[k], &ln_abs[k])?;
        let c = coefficient(ln_base[k], v).ok_or(Error::NonFinite { k: k + 1 })?;
        sum += c * gs[k];
    }
    Ok(sum)
}

/// `M(A)`: the series with the indicator of `A`.
pub fn measure_of_set(ens: &LePageEnsemble, region: &RegionSpec) -> Result<f64> {
    region.check_finite()?;
    lepage_integral(ens, region)
}

/// Conditional Gaussian variance of the terms after `k0`:
/// `Σ_{k0 < k ≤ K} (C Γ_k^{-1/α} φ(ξ_k)^{-1/α} f(ξ_k))²`.
pub fn conditional_tail_variance(
    ens: &LePageEnsemble,
    f: &(impl Integrand + ?Sized),
    k0: usize,
) -> Result<f64> {
    if k0 >= ens.truncation() {
        return Err(Error::Invalid(format!(
            "tail start {k0} must be below the truncation {}",
            ens.truncation()
        )));
    }
    let xis = ens.xis();
    let ln_abs = ens.ln_abs_xi();
    let ln_base = ens.ln_coefficients();
    let mut acc = 0.0;
    for k in k0..ens.truncation() {
        let v = f.try_eval_log(&xis[k], &ln_abs[k])?;
        let c = coefficient(ln_base[k], v).ok_or(Error::NonFinite { k: k + 1 })?;
        acc += c * c;
    }
    Ok(acc)
}

/// Measures of several boxes on the ensemble `generate_ensemble(K, params,
/// seed)`, without materializing it.
///
/// Consumes the random stream exactly as ensemble generation does and only
/// builds the coordinates needed to decide membership, so results are
/// bit-identical to [`measure_of_set`] on the materialized ensemble.
#[derive(Debug, Clone)]
pub struct BoxMeasureSampler {
    boxes: Vec<([f64; 3], [f64; 3])>,
    params: ModelParams,
    truncation: usize,
}

impl BoxMeasureSampler {
    pub fn new(regions: &[RegionSpec], params: &ModelParams, truncation: usize) -> Result<Self> {
        params.validate()?;
        if truncation == 0 {
            return Err(Error::Invalid("truncation must be at least 1".into()));
        }
        let boxes = regions
            .iter()
            .map(|r| match r {
                RegionSpec::Box { lower, upper } => {
                    r.check_finite()?;
                    Ok((*lower, *upper))
                }
                other => Err(Error::Invalid(format!("box sampler cannot handle {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            boxes,
            params: *params,
            truncation,
        })
    }

    pub fn sample(&self, seed: u64) -> Result<Vec<f64>> {
        let mut source = TermSource::new(seed, self.params.alpha, self.params.eta)?;
        let coef = CoefficientLog::new(self.params.alpha, self.params.eta)?;
        let mut sums = vec![0.0; self.boxes.len()];
        let mut hit = vec![false; self.boxes.len()];
        for _ in 0..self.truncation {
            let raw = source.next_raw();
            let sampler = source.sampler;
            let mut coords: [Option<f64>; 3] = [None; 3];
            let mut any = false;
            for (b, (lower, upper)) in self.boxes.iter().enumerate() {
                hit[b] = (0..3).all(|l| {
                    let d = raw.draws[l];
                    if (d.negative && lower[l] >= 0.0) || (!d.negative && upper[l] <= 0.0) {
                        return false;
                    }
                    let x = *coords[l].get_or_insert_with(|| sampler.coordinate(d));
                    x >= lower[l] && x <= upper[l]
                });
                any |= hit[b];
            }
            if !any {
                continue;
            }
            let xi = [0, 1, 2].map(|l| coords[l].unwrap_or_else(|| sampler.coordinate(raw.draws[l])));
            let ln_base = coef.eval(raw.gamma, &CoefficientLog::ln_abs(&xi));
            let c = coefficient(ln_base, LogValue::plain(1.0)).ok_or(Error::NonFinite { k: 0 })?;
            for (b, s) in sums.iter_mut().enumerate() {
                if hit[b] {
                    *s += c * raw.g;
                }
            }
        }
        Ok(sums)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::generate_ensemble;

    fn ensemble(k: usize, seed: u64) -> LePageEnsemble {
        let p = ModelParams::new(1.5, 0.7, 1.0, 1.0).unwrap();
        generate_ensemble(k, &p, seed).unwrap()
    }

    #[test]
    fn zero_integrand_and_empty_set() {
        let ens = ensemble(2000, 1);
        assert_eq!(lepage_integral(&ens, &|_: &[f64; 3]| 0.0).unwrap(), 0.0);
        assert_eq!(measure_of_set(&ens, &RegionSpec::Empty).unwrap(), 0.0);
        assert_eq!(conditional_tail_variance(&ens, &|_: &[f64; 3]| 0.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn linearity_on_shared_ensemble() {
        let ens = ensemble(3000, 2);
        let f = |y: &[f64; 3]| (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])).exp();
        let g = |y: &[f64; 3]| if y[0].abs() < 2.0 { y[1].sin() } else { 0.0 };
        let h = |y: &[f64; 3]| 2.0 * f(y) + 3.0 * g(y);
        let lhs = lepage_integral(&ens, &h).unwrap();
        let rhs = 2.0 * lepage_integral(&ens, &f).unwrap() + 3.0 * lepage_integral(&ens, &g).unwrap();
        let mass: f64 = lepage_terms(&ens, &h).unwrap().iter().map(|t| t.abs()).sum();
        assert!((lhs - rhs).abs() <= 1e-13 * mass.max(1.0));
    }

    #[test]
    fn finite_additivity() {
        let ens = ensemble(5000, 3);
        let a = RegionSpec::cuboid([0.0; 3], [0.5, 1.0, 1.0]).unwrap();
        let b = RegionSpec::cuboid([0.5 + f64::EPSILON, 0.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
        let union = |y: &[f64; 3]| a.eval(y) + b.eval(y);
        let whole = lepage_integral(&ens, &union).unwrap();
        let parts = measure_of_set(&ens, &a).unwrap() + measure_of_set(&ens, &b).unwrap();
        let mass: f64 = lepage_terms(&ens, &union).unwrap().iter().map(|t| t.abs()).sum();
        assert!((whole - parts).abs() <= 1e-14 * mass.max(1.0));
    }

    #[test]
    fn tail_variance_single_term() {
        let ens = ensemble(500, 4);
        let f = |y: &[f64; 3]| 1.0 / (1.0 + y[0] * y[0]);
        let k = ens.truncation();
        let last = conditional_tail_variance(&ens, &f, k - 1).unwrap();
        let c = coefficient(ens.ln_coefficients()[k - 1], LogValue::plain(f(&ens.xis()[k - 1]))).unwrap();
        assert_eq!(last, c * c);
        assert!(conditional_tail_variance(&ens, &f, k).is_err());
    }

    #[test]
    fn nonfinite_integrand_names_term() {
        let ens = ensemble(50, 5);
        let target = ens.xis()[6];
        let f = move |y: &[f64; 3]| if *y == target { f64::NAN } else { 1.0 };
        match lepage_integral(&ens, &f) {
            Err(Error::NonFinite { k }) => assert_eq!(k, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn box_sampler_is_bit_identical() {
        let p = ModelParams::new(1.5, 0.7, 1.0, 1.0).unwrap();
        let boxes = [
            RegionSpec::cube_of_volume(1.0).unwrap(),
            RegionSpec::cube_of_volume(0.5).unwrap(),
            RegionSpec::cuboid([-2.0, -0.5, 0.1], [-0.1, 3.0, 7.0]).unwrap(),
        ];
        let sampler = BoxMeasureSampler::new(&boxes, &p, 4000).unwrap();
        for seed in 0..5 {
            let fast = sampler.sample(seed).unwrap();
            let ens = generate_ensemble(4000, &p, seed).unwrap();
            for (b, r) in boxes.iter().enumerate() {
                assert_eq!(fast[b], measure_of_set(&ens, r).unwrap());
            }
        }
    }

    #[test]
    fn infinite_region_rejected() {
        let ens = ensemble(10, 6);
        let r = RegionSpec::Box {
            lower: [0.0; 3],
            upper: [1.0, 1.0, f64::INFINITY],
        };
        assert!(matches!(measure_of_set(&ens, &r), Err(Error::InfiniteVolume)));
    }
}
