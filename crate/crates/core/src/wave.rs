//! The Kirchhoff solution `U(x,t)` of the wave equation driven by the
//! derivative of `Z^H`, its time derivative `V`, and the weak-solution check.
//!
//! On an ensemble, with `ω_k = a|ξ_k|`,
//!
//! ```text
//! U(x,t) = Σ_k A_k sin((x,ξ_k)) (1 − cos(ω_k t)),   A_k = c_k g_k ∏ sign ξ_{k,l}/|ξ_{k,l}|^{H+1/α−1} / (a|ξ_k|²)
//! V(x,t) = Σ_k a|ξ_k| A_k sin((x,ξ_k)) sin(ω_k t)
//! ```
//!
//! where `c_k = C Γ_k^{-1/α} φ(ξ_k)^{-1/α}`. [`WaveSeries`] precomputes the
//! amplitudes once per ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ah::{bump, bump_d2, ln_norm, one_minus_cos, sign, ProductBump, WeightedKernel};
use crate::ensemble::LePageEnsemble;
use crate::error::{check_domain, Error, Result, SupportEscape};
use crate::field::ih_integral;
use crate::measure::coefficient;
use crate::measure::LogValue;
use crate::params::ModelParams;
use crate::quadrature::gauss_legendre;
use crate::region::{dot, norm};

/// Log-amplitudes above this are kept in log form and combined with the
/// oscillating factor only at evaluation time.
const LN_AMPLITUDE_LIMIT: f64 = 700.0;
const LN_NEGLIGIBLE: f64 = -800.0;

#[derive(Debug, Clone, Copy)]
struct ExtremeTerm {
    xi: [f64; 3],
    omega: f64,
    sign: f64,
    ln_u: f64,
    ln_v: f64,
}

/// Precomputed series for `U` and `V` on one ensemble.
#[derive(Debug, Clone)]
pub struct WaveSeries {
    params: ModelParams,
    seed: u64,
    truncation: usize,
    xis: Vec<[f64; 3]>,
    omega: Vec<f64>,
    amp_u: Vec<f64>,
    amp_v: Vec<f64>,
    extreme: Vec<ExtremeTerm>,
}

impl WaveSeries {
    pub fn new(ens: &LePageEnsemble, params: &ModelParams) -> Result<Self> {
        ens.check_alpha(params)?;
        let kernel = WeightedKernel::new(params)?;
        let a = params.wave_speed;
        let mut out = Self {
            params: *params,
            seed: ens.seed(),
            truncation: ens.truncation(),
            xis: Vec::new(),
            omega: Vec::new(),
            amp_u: Vec::new(),
            amp_v: Vec::new(),
            extreme: Vec::new(),
        };
        for k in 0..ens.truncation() {
            let xi = ens.xis()[k];
            let la = &ens.ln_abs_xi()[k];
            let g = ens.gs()[k];
            if g == 0.0 {
                continue;
            }
            let ln_r = ln_norm(&xi, la);
            let base = ens.ln_coefficients()[k] + kernel.ln_weight(la) + g.abs().ln();
            let ln_v = base - ln_r;
            let ln_u = ln_v - ln_r - a.ln();
            if ln_u.max(ln_v) < LN_NEGLIGIBLE {
                continue;
            }
            let s = sign(&xi) * g.signum();
            let omega = a * norm(&xi);
            if ln_u.max(ln_v) > LN_AMPLITUDE_LIMIT {
                out.extreme.push(ExtremeTerm { xi, omega, sign: s, ln_u, ln_v });
                continue;
            }
            out.xis.push(xi);
            out.omega.push(omega);
            out.amp_u.push(s * ln_u.exp());
            out.amp_v.push(s * ln_v.exp());
        }
        Ok(out)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn extreme_sum(&self, f: impl Fn(&ExtremeTerm) -> (f64, f64)) -> f64 {
        self.extreme
            .iter()
            .map(|e| {
                let (m, ln_amp) = f(e);
                coefficient(ln_amp, LogValue::plain(e.sign * m)).unwrap_or(0.0)
            })
            .sum()
    }

    pub fn u(&self, x: &[f64; 3], t: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.xis.len() {
            acc += self.amp_u[k] * dot(x, &self.xis[k]).sin() * one_minus_cos(self.omega[k] * t);
        }
        if !self.extreme.is_empty() {
            acc += self.extreme_sum(|e| (dot(x, &e.xi).sin() * one_minus_cos(e.omega * t), e.ln_u));
        }
        acc
    }

    pub fn v(&self, x: &[f64; 3], t: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.xis.len() {
            acc += self.amp_v[k] * dot(x, &self.xis[k]).sin() * (self.omega[k] * t).sin();
        }
        if !self.extreme.is_empty() {
            acc += self.extreme_sum(|e| (dot(x, &e.xi).sin() * (e.omega * t).sin(), e.ln_v));
        }
        acc
    }

    /// `U(x, t)` for every `t` in `ts`; the spatial factors are computed once.
    pub fn u_time_series(&self, x: &[f64; 3], ts: &[f64]) -> Vec<f64> {
        let spatial: Vec<f64> = (0..self.xis.len())
            .map(|k| self.amp_u[k] * dot(x, &self.xis[k]).sin())
            .collect();
        ts.par_iter()
            .map(|&t| {
                let mut acc = 0.0;
                for k in 0..spatial.len() {
                    acc += spatial[k] * one_minus_cos(self.omega[k] * t);
                }
                if !self.extreme.is_empty() {
                    acc += self.extreme_sum(|e| (dot(x, &e.xi).sin() * one_minus_cos(e.omega * t), e.ln_u));
                }
                acc
            })
            .collect()
    }

    /// `U(x + s e_axis, t)` for every `s` in `offsets`.
    pub fn u_space_series(&self, x: &[f64; 3], axis: usize, offsets: &[f64], t: f64) -> Vec<f64> {
        let temporal: Vec<f64> = (0..self.xis.len())
            .map(|k| self.amp_u[k] * one_minus_cos(self.omega[k] * t))
            .collect();
        offsets
            .par_iter()
            .map(|&s| {
                let mut p = *x;
                p[axis] += s;
                let mut acc = 0.0;
                for k in 0..temporal.len() {
                    acc += temporal[k] * dot(&p, &self.xis[k]).sin();
                }
                if !self.extreme.is_empty() {
                    acc += self.extreme_sum(|e| (dot(&p, &e.xi).sin() * one_minus_cos(e.omega * t), e.ln_u));
                }
                acc
            })
            .collect()
    }
}

/// `U(x, t)`.
pub fn solve_u(ens: &LePageEnsemble, x: &[f64; 3], t: f64, params: &ModelParams) -> Result<f64> {
    check_domain("t", t, "[0, inf)", t >= 0.0)?;
    Ok(WaveSeries::new(ens, params)?.u(x, t))
}

/// A value together with a flag raised when the model lies outside the
/// range where the limiting object is guaranteed to exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlaggedValue {
    pub value: f64,
    pub beyond_guarantee: bool,
}

/// `V(x, t) = ∂U/∂t`. The limiting integrand is in `L^α` only for `H > 2/3`;
/// below that the truncated series is still computed but flagged.
pub fn solve_v(ens: &LePageEnsemble, x: &[f64; 3], t: f64, params: &ModelParams) -> Result<FlaggedValue> {
    check_domain("t", t, "[0, inf)", t >= 0.0)?;
    Ok(FlaggedValue {
        value: WaveSeries::new(ens, params)?.v(x, t),
        beyond_guarantee: params.hurst <= 2.0 / 3.0,
    })
}

/// Result of [`time_integral_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeIntegralCheck {
    /// `∫_0^t V(x,s) ds` by Gauss–Legendre quadrature.
    pub integral: f64,
    pub u: f64,
    pub difference: f64,
}

/// Compares `∫_0^t V(x,s) ds` with `U(x,t)`.
pub fn time_integral_check(
    ens: &LePageEnsemble,
    x: &[f64; 3],
    t: f64,
    params: &ModelParams,
    n_quad: usize,
) -> Result<TimeIntegralCheck> {
    check_domain("hurst", params.hurst, "(2/3, 1)", params.hurst > 2.0 / 3.0)?;
    check_domain("t", t, "[0, inf)", t >= 0.0)?;
    if n_quad < 16 {
        return Err(Error::Invalid(format!("n_quad must be at least 16, got {n_quad}")));
    }
    let series = WaveSeries::new(ens, params)?;
    Ok(series.time_integral_check(x, t, n_quad))
}

impl WaveSeries {
    pub fn time_integral_check(&self, x: &[f64; 3], t: f64, n_quad: usize) -> TimeIntegralCheck {
        let integral = gauss_legendre(n_quad).integrate(0.0, t, |s| self.v(x, s));
        let u = self.u(x, t);
        TimeIntegralCheck {
            integral,
            u,
            difference: (integral - u).abs(),
        }
    }
}

/// `θ(x,t) = amplitude · ∏_l b((x_l − c_l)/r_l) · b((t − c_t)/r_t)` with the
/// bump `b` of [`crate::ah::bump`]. Coordinates are ordered `(x₁, x₂, x₃, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: [f64; 4],
    pub radii: [f64; 4],
    pub amplitude: f64,
}

impl TestFunction {
    /// The support must lie in `t ≥ 0`.
    pub fn new(center: [f64; 4], radii: [f64; 4], amplitude: f64) -> Result<Self> {
        for (i, &r) in radii.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Invalid(format!("radius {i} must be positive, got {r}")));
            }
        }
        if center.iter().any(|c| !c.is_finite()) || !amplitude.is_finite() {
            return Err(Error::Invalid("test function parameters must be finite".into()));
        }
        if center[3] - radii[3] < 0.0 {
            return Err(Error::Invalid(format!(
                "time support starts at {} < 0",
                center[3] - radii[3]
            )));
        }
        Ok(Self { center, radii, amplitude })
    }

    fn factor(&self, i: usize, s: f64) -> f64 {
        bump((s - self.center[i]) / self.radii[i])
    }

    fn factor_d2(&self, i: usize, s: f64) -> f64 {
        bump_d2((s - self.center[i]) / self.radii[i]) / (self.radii[i] * self.radii[i])
    }

    pub fn value(&self, x: &[f64; 3], t: f64) -> f64 {
        self.amplitude * self.factor(0, x[0]) * self.factor(1, x[1]) * self.factor(2, x[2]) * self.factor(3, t)
    }

    pub fn d2_dt2(&self, x: &[f64; 3], t: f64) -> f64 {
        self.amplitude * self.factor(0, x[0]) * self.factor(1, x[1]) * self.factor(2, x[2]) * self.factor_d2(3, t)
    }

    pub fn laplacian(&self, x: &[f64; 3], t: f64) -> f64 {
        let f = [self.factor(0, x[0]), self.factor(1, x[1]), self.factor(2, x[2])];
        let d = [self.factor_d2(0, x[0]), self.factor_d2(1, x[1]), self.factor_d2(2, x[2])];
        self.amplitude * self.factor(3, t) * (d[0] * f[1] * f[2] + f[0] * d[1] * f[2] + f[0] * f[1] * d[2])
    }

    /// Closed support box `(lower, upper)` in `(x₁, x₂, x₃, t)`.
    pub fn support(&self) -> ([f64; 4], [f64; 4]) {
        let lower = [0, 1, 2, 3].map(|i| self.center[i] - self.radii[i]);
        let upper = [0, 1, 2, 3].map(|i| self.center[i] + self.radii[i]);
        (lower, upper)
    }

    /// The spatial factor `∏ b((x_l − c_l)/r_l)`.
    pub fn spatial(&self) -> ProductBump {
        ProductBump {
            center: [self.center[0], self.center[1], self.center[2]],
            radii: [self.radii[0], self.radii[1], self.radii[2]],
        }
    }

    pub fn temporal(&self, t: f64) -> f64 {
        self.factor(3, t)
    }
}

/// Quadrature for [`weak_solution_residual`]: Gauss–Legendre nodes per
/// axis on the support box of `θ`, optionally confined to a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakQuadrature {
    pub space_nodes: usize,
    pub time_nodes: usize,
    pub domain: Option<([f64; 4], [f64; 4])>,
}

impl Default for WeakQuadrature {
    fn default() -> Self {
        Self {
            space_nodes: 16,
            time_nodes: 16,
            domain: None,
        }
    }
}

impl WeakQuadrature {
    pub fn uniform(nodes: usize) -> Self {
        Self {
            space_nodes: nodes,
            time_nodes: nodes,
            domain: None,
        }
    }
}

/// The two sides of the weak formulation and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    /// `∫_0^∞ ∫ U (∂²θ/∂t² − a²Δθ) dx dt`.
    pub lhs: f64,
    /// `a ∫_0^∞ ∫ θ(x,t) Z^H(dx) dt = a ∫ I^H(θ(·,t)) dt`.
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates both sides of the weak formulation for the test function `θ`.
/// With the `1/a` normalization of `U`, the equation satisfied is
/// `U_tt − a²ΔU = a·∂Z^H`, so the right side carries the factor `a`.
///
/// The left side is a tensor Gauss–Legendre sum over the support of `θ`.
/// Because `θ` is a product and `sin((x,ξ)) = Im ∏ e^{i x_l ξ_l}`, the
/// four-dimensional sum factorizes into one-dimensional sums per term.
pub fn weak_solution_residual(
    ens: &LePageEnsemble,
    theta: &TestFunction,
    params: &ModelParams,
    quad: &WeakQuadrature,
) -> Result<WeakResidual> {
    let (lower, upper) = theta.support();
    if let Some((dl, du)) = quad.domain {
        if (0..4).any(|i| lower[i] < dl[i] || upper[i] > du[i]) {
            return Err(Error::SupportEscape(Box::new(SupportEscape {
                support: (lower, upper),
                domain: (dl, du),
            })));
        }
    }
    if quad.space_nodes == 0 || quad.time_nodes == 0 {
        return Err(Error::Invalid("quadrature needs at least one node per axis".into()));
    }
    if theta.amplitude == 0.0 {
        return Ok(WeakResidual { lhs: 0.0, rhs: 0.0, residual: 0.0 });
    }
    let series = WaveSeries::new(ens, params)?;
    let lhs = series.weak_lhs(theta, quad.space_nodes, quad.time_nodes);

    let time_rule = gauss_legendre(quad.time_nodes);
    let t_mass = time_rule.integrate(lower[3], upper[3], |t| theta.temporal(t));
    let rhs = params.wave_speed * theta.amplitude * t_mass * ih_integral(ens, &theta.spatial(), params)?;
    Ok(WeakResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

impl WaveSeries {
    fn weak_lhs(&self, theta: &TestFunction, space_nodes: usize, time_nodes: usize) -> f64 {
        let (lower, upper) = theta.support();
        let a2 = self.params.wave_speed * self.params.wave_speed;
        let space = gauss_legendre(space_nodes);
        let time = gauss_legendre(time_nodes);
        // Per axis: nodes, w·b and w·b''.
        let axes: Vec<Vec<(f64, f64, f64)>> = (0..3)
            .map(|l| {
                space
                    .mapped(lower[l], upper[l])
                    .map(|(x, w)| (x, w * theta.factor(l, x), w * theta.factor_d2(l, x)))
                    .collect()
            })
            .collect();
        let times: Vec<(f64, f64, f64)> = time
            .mapped(lower[3], upper[3])
            .map(|(t, w)| (t, w * theta.factor(3, t), w * theta.factor_d2(3, t)))
            .collect();

        let term = |xi: &[f64; 3], omega: f64| -> f64 {
            let mut p = [num_complex::Complex64::new(0.0, 0.0); 3];
            let mut q = p;
            for l in 0..3 {
                for &(x, wb, wb2) in &axes[l] {
                    let e = num_complex::Complex64::from_polar(1.0, x * xi[l]);
                    p[l] += wb * e;
                    q[l] += wb2 * e;
                }
            }
            let s_b = (p[0] * p[1] * p[2]).im;
            let s_lap = (q[0] * p[1] * p[2] + p[0] * q[1] * p[2] + p[0] * p[1] * q[2]).im;
            let (mut c_t, mut c_tt) = (0.0, 0.0);
            for &(t, wt, wt2) in &times {
                let m = one_minus_cos(omega * t);
                c_t += wt * m;
                c_tt += wt2 * m;
            }
            s_b * c_tt - a2 * s_lap * c_t
        };

        let regular: f64 = (0..self.xis.len())
            .into_par_iter()
            .map(|k| self.amp_u[k] * term(&self.xis[k], self.omega[k]))
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let extreme: f64 = self
            .extreme
            .iter()
            .map(|e| coefficient(e.ln_u, LogValue::plain(e.sign * term(&e.xi, e.omega))).unwrap_or(0.0))
            .sum();
        theta.amplitude * (regular + extreme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ah::KirchhoffAh;
    use crate::ensemble::generate_ensemble;
    use crate::measure::lepage_integral;

    fn setup(k: usize, seed: u64, hurst: f64) -> (LePageEnsemble, ModelParams) {
        let p = ModelParams::new(1.5, hurst, 1.0, 1.0).unwrap();
        (generate_ensemble(k, &p, seed).unwrap(), p)
    }

    #[test]
    fn initial_and_boundary_identities() {
        let (ens, p) = setup(5000, 1, 0.7);
        let s = WaveSeries::new(&ens, &p).unwrap();
        for x in [[0.3, -1.0, 0.2], [5.0, 5.0, 5.0]] {
            assert_eq!(s.u(&x, 0.0), 0.0);
            assert_eq!(s.v(&x, 0.0), 0.0);
        }
        for t in [0.1, 1.0, 7.5] {
            assert_eq!(s.u(&[0.0; 3], t), 0.0);
            assert_eq!(s.v(&[0.0; 3], t), 0.0);
        }
    }

    #[test]
    fn series_matches_kernel_integral() {
        let (ens, p) = setup(4000, 2, 0.7);
        let s = WaveSeries::new(&ens, &p).unwrap();
        let kernel = WeightedKernel::new(&p).unwrap();
        for (x, t) in [([0.2, 0.5, -0.3], 0.7), ([1.0, 1.0, 1.0], 2.0)] {
            let a = s.u(&x, t);
            let b = lepage_integral(&ens, &KirchhoffAh::new(x, t, kernel, 1.0)).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} {b}");
        }
    }

    #[test]
    fn time_series_agrees_with_pointwise() {
        let (ens, p) = setup(2000, 3, 0.7);
        let s = WaveSeries::new(&ens, &p).unwrap();
        let x = [0.4, 0.1, -0.6];
        let ts = [0.0, 0.25, 0.5, 1.0];
        let fast = s.u_time_series(&x, &ts);
        for (i, &t) in ts.iter().enumerate() {
            assert!((fast[i] - s.u(&x, t)).abs() <= 1e-12 * (1.0 + fast[i].abs()));
        }
        let sp = s.u_space_series(&x, 1, &[0.0, 0.125], 0.5);
        assert!((sp[1] - s.u(&[0.4, 0.225, -0.6], 0.5)).abs() <= 1e-12 * (1.0 + sp[1].abs()));
    }

    #[test]
    fn v_flag_below_two_thirds() {
        let (ens, p) = setup(100, 4, 0.6);
        assert!(solve_v(&ens, &[1.0; 3], 1.0, &p).unwrap().beyond_guarantee);
        let (ens, p) = setup(100, 4, 0.75);
        assert!(!solve_v(&ens, &[1.0; 3], 1.0, &p).unwrap().beyond_guarantee);
    }

    #[test]
    fn time_integral_zero_time() {
        let (ens, p) = setup(500, 5, 0.75);
        let c = time_integral_check(&ens, &[1.0; 3], 0.0, &p, 16).unwrap();
        assert_eq!((c.integral, c.u, c.difference), (0.0, 0.0, 0.0));
        assert!(time_integral_check(&ens, &[1.0; 3], 1.0, &p, 8).is_err());
        let (ens, p) = setup(500, 5, 0.6);
        assert!(time_integral_check(&ens, &[1.0; 3], 1.0, &p, 16).is_err());
    }

    #[test]
    fn test_function_derivatives_match_finite_differences() {
        let th = TestFunction::new([0.1, 0.2, -0.1, 1.0], [0.8, 0.6, 0.9, 0.5], 1.3).unwrap();
        let h = 1e-4;
        for (x, t) in [([0.2, 0.3, 0.0], 1.1), ([-0.3, 0.1, 0.4], 0.8)] {
            let d2t = (th.value(&x, t + h) - 2.0 * th.value(&x, t) + th.value(&x, t - h)) / (h * h);
            assert!((d2t - th.d2_dt2(&x, t)).abs() < 1e-4 * (1.0 + d2t.abs()));
            let mut lap = 0.0;
            for l in 0..3 {
                let (mut a, mut b) = (x, x);
                a[l] += h;
                b[l] -= h;
                lap += (th.value(&a, t) - 2.0 * th.value(&x, t) + th.value(&b, t)) / (h * h);
            }
            assert!((lap - th.laplacian(&x, t)).abs() < 1e-4 * (1.0 + lap.abs()));
        }
        assert!(TestFunction::new([0.0, 0.0, 0.0, 0.2], [1.0, 1.0, 1.0, 0.5], 1.0).is_err());
    }

    #[test]
    fn factorized_lhs_matches_tensor_sum() {
        let (ens, p) = setup(300, 6, 0.7);
        let s = WaveSeries::new(&ens, &p).unwrap();
        let th = TestFunction::new([0.1, -0.2, 0.3, 1.0], [0.7, 0.8, 0.6, 0.6], 1.0).unwrap();
        let n = 6;
        let fast = s.weak_lhs(&th, n, n);
        let (lo, hi) = th.support();
        let rule = gauss_legendre(n);
        let mut slow = 0.0;
        for (x0, w0) in rule.mapped(lo[0], hi[0]) {
            for (x1, w1) in rule.mapped(lo[1], hi[1]) {
                for (x2, w2) in rule.mapped(lo[2], hi[2]) {
                    for (t, wt) in rule.mapped(lo[3], hi[3]) {
                        let x = [x0, x1, x2];
                        let op = th.d2_dt2(&x, t) - th.laplacian(&x, t);
                        slow += w0 * w1 * w2 * wt * s.u(&x, t) * op;
                    }
                }
            }
        }
        assert!((fast - slow).abs() <= 1e-10 * (1.0 + slow.abs()), "{fast} {slow}");
    }

    #[test]
    fn zero_test_function_and_support_escape() {
        let (ens, p) = setup(300, 7, 0.7);
        let zero = TestFunction::new([0.0, 0.0, 0.0, 1.0], [0.5; 4], 0.0).unwrap();
        let r = weak_solution_residual(&ens, &zero, &p, &WeakQuadrature::default()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.residual), (0.0, 0.0, 0.0));
        let th = TestFunction::new([0.0, 0.0, 0.0, 1.0], [0.5; 4], 1.0).unwrap();
        let quad = WeakQuadrature {
            domain: Some(([-0.4, -1.0, -1.0, 0.0], [1.0, 1.0, 1.0, 2.0])),
            ..WeakQuadrature::default()
        };
        assert!(matches!(
            weak_solution_residual(&ens, &th, &p, &quad),
            Err(Error::SupportEscape(_))
        ));
    }

    #[test]
    fn weak_identity_holds_for_other_wave_speeds() {
        let p = ModelParams::new(1.5, 0.7, 1.0, 2.0).unwrap();
        let ens = generate_ensemble(40, &p, 8).unwrap();
        let th = TestFunction::new([0.2, -0.1, 0.3, 1.0], [0.9, 0.8, 0.7, 0.6], 1.0).unwrap();
        let r = weak_solution_residual(&ens, &th, &p, &WeakQuadrature::uniform(48)).unwrap();
        assert!(r.residual < 1e-3 * r.rhs.abs(), "{r:?}");
    }
}
