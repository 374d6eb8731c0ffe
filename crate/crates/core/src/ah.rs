//! The operator `A^H`, which turns a deterministic integrand against `Z^H`
//! into an integrand against the stable measure `M`:
//!
//! ```text
//! A^H g(y) = Im ĝ(y) · ∏_l sign(y_l) / |y_l|^{H + 1/α − 1},    ĝ(y) = ∫ e^{i(x,y)} g(x) dx.
//! ```
//!
//! For `g = 1_A` this is the kernel `f_A(y) = ∫_A sin((x,y)) dx · ∏ sign y_l/|y_l|^{H+1/α−1}`
//! defining `Z^H(A)`, and for the Kirchhoff kernel of the wave equation it
//! has the closed form implemented in [`kirchhoff_ah_kernel`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::measure::{Integrand, LogValue};
use crate::params::ModelParams;
use crate::quadrature::{gauss_legendre, pow2_nodes};
use crate::region::{dot, norm, RegionSpec};

/// The signed singular weight `∏ sign y_l / |y_l|^{H+1/α−1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedKernel {
    pub hurst: f64,
    pub alpha: f64,
    pub weight_exponent: f64,
}

impl WeightedKernel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let w = params.weight_exponent();
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::Domain {
                name: "H + 1/alpha - 1",
                value: w,
                domain: "(0, 1)",
            });
        }
        Ok(Self {
            hurst: params.hurst,
            alpha: params.alpha,
            weight_exponent: w,
        })
    }

    pub fn signed_weight(&self, y: &[f64; 3]) -> Result<f64> {
        check_off_planes(y)?;
        let ln_abs = ln_abs(y);
        Ok(sign(y) * self.ln_weight(&ln_abs).exp())
    }

    /// `−(H+1/α−1) Σ log|y_l|`.
    pub fn ln_weight(&self, ln_abs: &[f64; 3]) -> f64 {
        -self.weight_exponent * (ln_abs[0] + ln_abs[1] + ln_abs[2])
    }
}

pub(crate) fn check_off_planes(y: &[f64; 3]) -> Result<()> {
    match y.iter().position(|&v| v == 0.0) {
        Some(axis) => Err(Error::SingularPoint { axis, point: *y }),
        None if y.iter().all(|v| v.is_finite()) => Ok(()),
        None => Err(Error::Invalid(format!("non-finite point {y:?}"))),
    }
}

pub(crate) fn sign(y: &[f64; 3]) -> f64 {
    y[0].signum() * y[1].signum() * y[2].signum()
}

pub(crate) fn ln_abs(y: &[f64; 3]) -> [f64; 3] {
    [y[0].abs().ln(), y[1].abs().ln(), y[2].abs().ln()]
}

/// `log|y|` from the coordinates and their logs, without overflow.
pub(crate) fn ln_norm(y: &[f64; 3], ln_abs: &[f64; 3]) -> f64 {
    let (l, lm) = (0..3)
        .map(|l| (l, ln_abs[l]))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let m = y[l].abs();
    let s = [y[0] / m, y[1] / m, y[2] / m];
    lm + 0.5 * dot(&s, &s).ln()
}

/// A function on `R³` whose Fourier transform `ĝ(y) = ∫ e^{i(x,y)} g(x) dx`
/// can be evaluated.
pub trait FourierIntegrand: Sync {
    fn value(&self, x: &[f64; 3]) -> f64;

    fn fourier(&self, y: &[f64; 3]) -> Result<Complex64>;

    /// A length over which `g` varies; sets angular resolution in
    /// [`lalpha_norm_ah`].
    fn extent(&self) -> f64 {
        1.0
    }
}

impl FourierIntegrand for RegionSpec {
    fn value(&self, x: &[f64; 3]) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }

    fn fourier(&self, y: &[f64; 3]) -> Result<Complex64> {
        self.check_finite()?;
        Ok(RegionSpec::fourier(self, y))
    }

    fn extent(&self) -> f64 {
        self.diameter()
    }
}

/// `g ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl FourierIntegrand for ZeroFunction {
    fn value(&self, _x: &[f64; 3]) -> f64 {
        0.0
    }

    fn fourier(&self, _y: &[f64; 3]) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
}

/// A finite linear combination `Σ c_j g_j`.
#[derive(Clone, Default)]
pub struct Combination {
    pub terms: Vec<(f64, Arc<dyn FourierIntegrand + Send>)>,
}

impl Combination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, c: f64, g: impl FourierIntegrand + Send + 'static) -> Self {
        self.terms.push((c, Arc::new(g)));
        self
    }
}

impl FourierIntegrand for Combination {
    fn value(&self, x: &[f64; 3]) -> f64 {
        self.terms.iter().map(|(c, g)| c * g.value(x)).sum()
    }

    fn fourier(&self, y: &[f64; 3]) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, g) in &self.terms {
            acc += *c * g.fourier(y)?;
        }
        Ok(acc)
    }

    fn extent(&self) -> f64 {
        self.terms.iter().map(|(_, g)| g.extent()).fold(0.0, f64::max)
    }
}

/// `f_{x,t}(z) = 1/(4πa|x−z|) · 1_{|x−z| < at}`, the Kirchhoff kernel; its
/// transform is `e^{i(x,y)} (1 − cos(at|y|)) / (a|y|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirchhoffFunction {
    pub x: [f64; 3],
    pub t: f64,
    pub wave_speed: f64,
}

impl FourierIntegrand for KirchhoffFunction {
    fn value(&self, z: &[f64; 3]) -> f64 {
        let r = norm(&[z[0] - self.x[0], z[1] - self.x[1], z[2] - self.x[2]]);
        if r > 0.0 && r < self.wave_speed * self.t {
            1.0 / (4.0 * PI * self.wave_speed * r)
        } else {
            0.0
        }
    }

    fn fourier(&self, y: &[f64; 3]) -> Result<Complex64> {
        let r = norm(y);
        let radial = if r == 0.0 {
            self.wave_speed * self.t * self.t / 2.0
        } else {
            one_minus_cos(self.wave_speed * self.t * r) / (self.wave_speed * r * r)
        };
        Ok(Complex64::from_polar(radial, dot(&self.x, y)))
    }

    fn extent(&self) -> f64 {
        2.0 * self.wave_speed * self.t
    }
}

/// `1 − cos z`, accurate for small `z`.
pub(crate) fn one_minus_cos(z: f64) -> f64 {
    let s = (0.5 * z).sin();
    2.0 * s * s
}

/// The indicator of a box convolved with a centred Gaussian of standard
/// deviation `width`; tends to the indicator in `L¹ ∩ L²` as `width → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifiedBox {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub width: f64,
}

impl FourierIntegrand for MollifiedBox {
    fn value(&self, x: &[f64; 3]) -> f64 {
        if self.width == 0.0 {
            return RegionSpec::Box { lower: self.lower, upper: self.upper }.value(x);
        }
        let s = self.width * std::f64::consts::SQRT_2;
        (0..3)
            .map(|l| 0.5 * (erf((self.upper[l] - x[l]) / s) - erf((self.lower[l] - x[l]) / s)))
            .product()
    }

    fn fourier(&self, y: &[f64; 3]) -> Result<Complex64> {
        let boxed = RegionSpec::cuboid(self.lower, self.upper)?;
        let r = norm(y) * self.width;
        Ok(boxed.fourier(y) * (-0.5 * r * r).exp())
    }

    fn extent(&self) -> f64 {
        norm(&[
            self.upper[0] - self.lower[0],
            self.upper[1] - self.lower[1],
            self.upper[2] - self.lower[2],
        ])
    }
}

/// The smooth bump `b(s) = exp(−s²/(1−s²))` on `|s| < 1` (so `b(0) = 1`).
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        (-s * s / q).exp()
    }
}

pub fn bump_d1(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        -2.0 * s * bump(s) / (q * q)
    }
}

pub fn bump_d2(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        bump(s) * (6.0 * s.powi(4) - 2.0) / (q * q * q * q)
    }
}

/// Beyond this frequency `∫ b(s) cos(ks) ds` is below `1e-25` and is
/// returned as zero.
const BUMP_FOURIER_CUTOFF: f64 = 2000.0;

/// `∫_{−1}^{1} b(s) e^{iks} ds`, real because `b` is even.
pub fn bump_fourier(k: f64) -> f64 {
    let k = k.abs();
    if k > BUMP_FOURIER_CUTOFF {
        return 0.0;
    }
    let rule = gauss_legendre(pow2_nodes(k + 48.0, 128));
    rule.integrate(-1.0, 1.0, |s| bump(s) * (k * s).cos())
}

/// `∏_l b((x_l − c_l)/r_l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductBump {
    pub center: [f64; 3],
    pub radii: [f64; 3],
}

impl ProductBump {
    pub fn new(center: [f64; 3], radii: [f64; 3]) -> Result<Self> {
        for (l, &r) in radii.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Invalid(format!("bump radius {l} must be positive, got {r}")));
            }
        }
        Ok(Self { center, radii })
    }
}

impl FourierIntegrand for ProductBump {
    fn value(&self, x: &[f64; 3]) -> f64 {
        (0..3).map(|l| bump((x[l] - self.center[l]) / self.radii[l])).product()
    }

    fn fourier(&self, y: &[f64; 3]) -> Result<Complex64> {
        let amp: f64 = (0..3)
            .map(|l| self.radii[l] * bump_fourier(self.radii[l] * y[l]))
            .product();
        Ok(Complex64::from_polar(amp, dot(&self.center, y)))
    }

    fn extent(&self) -> f64 {
        2.0 * norm(&self.radii)
    }
}

/// `∫_A e^{i(x,y)} dx = ∏ (e^{i b_l y_l} − e^{i a_l y_l}) / (i y_l)` for a box.
pub fn fourier_box(region: &RegionSpec, y: &[f64; 3]) -> Result<Complex64> {
    check_off_planes(y)?;
    match region {
        RegionSpec::Box { .. } => {
            region.check_finite()?;
            Ok(region.fourier(y))
        }
        other => Err(Error::Invalid(format!("fourier_box needs a box, got {other:?}"))),
    }
}

/// `A^H g(y)`.
pub fn apply_ah(g: &(impl FourierIntegrand + ?Sized), y: &[f64; 3], params: &ModelParams) -> Result<f64> {
    let kernel = WeightedKernel::new(params)?;
    let w = kernel.signed_weight(y)?;
    Ok(g.fourier(y)?.im * w)
}

/// `f_A(y) = ∫_A sin((x,y)) dx · ∏ sign y_l/|y_l|^{H+1/α−1}`.
pub fn f_a_kernel(region: &RegionSpec, y: &[f64; 3], params: &ModelParams) -> Result<f64> {
    let kernel = WeightedKernel::new(params)?;
    let w = kernel.signed_weight(y)?;
    let ft = match region {
        RegionSpec::Box { .. } => fourier_box(region, y)?,
        _ => FourierIntegrand::fourier(region, y)?,
    };
    Ok(ft.im * w)
}

/// `A^H f_{x,t}(y) = (1/a) sin((x,y)) ∏ sign y_l/|y_l|^{H+1/α−1} (1 − cos(at|y|))/|y|²`.
pub fn kirchhoff_ah_kernel(x: &[f64; 3], t: f64, y: &[f64; 3], params: &ModelParams) -> Result<f64> {
    crate::error::check_domain("t", t, "[0, inf)", t >= 0.0)?;
    let kernel = WeightedKernel::new(params)?;
    check_off_planes(y)?;
    Ok(KirchhoffAh::new(*x, t, kernel, params.wave_speed)
        .eval_log(y, &ln_abs(y))
        .value())
}

/// [`kirchhoff_ah_kernel`] as an [`Integrand`] at fixed `(x, t)`.
#[derive(Debug, Clone, Copy)]
pub struct KirchhoffAh {
    pub x: [f64; 3],
    pub t: f64,
    kernel: WeightedKernel,
    wave_speed: f64,
}

impl KirchhoffAh {
    pub fn new(x: [f64; 3], t: f64, kernel: WeightedKernel, wave_speed: f64) -> Self {
        Self { x, t, kernel, wave_speed }
    }
}

impl Integrand for KirchhoffAh {
    fn eval(&self, y: &[f64; 3]) -> f64 {
        self.eval_log(y, &ln_abs(y)).value()
    }

    fn eval_log(&self, y: &[f64; 3], ln_abs: &[f64; 3]) -> LogValue {
        let ln_r = ln_norm(y, ln_abs);
        let r = norm(y);
        let mantissa =
            sign(y) * dot(&self.x, y).sin() * one_minus_cos(self.wave_speed * self.t * r) / self.wave_speed;
        LogValue {
            mantissa,
            ln_scale: self.kernel.ln_weight(ln_abs) - 2.0 * ln_r,
        }
    }
}

/// `A^H g` as an [`Integrand`], for series evaluation.
pub struct AhIntegrand<'g, G: ?Sized> {
    g: &'g G,
    kernel: WeightedKernel,
}

impl<'g, G: FourierIntegrand + ?Sized> AhIntegrand<'g, G> {
    pub fn new(g: &'g G, params: &ModelParams) -> Result<Self> {
        Ok(Self {
            g,
            kernel: WeightedKernel::new(params)?,
        })
    }
}

impl<G: FourierIntegrand + ?Sized> Integrand for AhIntegrand<'_, G> {
    fn eval(&self, y: &[f64; 3]) -> f64 {
        self.try_eval_log(y, &ln_abs(y)).map_or(f64::NAN, |v| v.value())
    }

    fn try_eval_log(&self, y: &[f64; 3], ln_abs: &[f64; 3]) -> Result<LogValue> {
        check_off_planes(y)?;
        Ok(LogValue {
            mantissa: sign(y) * self.g.fourier(y)?.im,
            ln_scale: self.kernel.ln_weight(ln_abs),
        })
    }
}

/// Result of [`lalpha_norm_ah`].
#[derive(Debug, Clone, PartialEq)]
pub struct LalphaNorm {
    /// `∫_{|y| < R} |A^H g(y)|^α dy`.
    pub value: f64,
    /// Geometric extrapolation of `∫_{|y| > R}` from the contributions of
    /// the last two radial doublings; `None` when they do not decay.
    pub tail_estimate: Option<f64>,
    pub radial_cutoff: f64,
    /// Cumulative integral at `R/8, R/4, R/2, R` (those above 1).
    pub partial: Vec<(f64, f64)>,
}

impl LalphaNorm {
    pub fn total(&self) -> f64 {
        self.value + self.tail_estimate.unwrap_or(0.0)
    }
}

const GL_PER_PANEL: usize = 8;
const INNER_LOG_DEPTH: f64 = 40.0;

/// `∫|A^H g(y)|^α dy` in spherical coordinates
/// `y = ρ(sin θ cos ν, sin θ sin ν, cos θ)`, split at `ρ = 1`.
///
/// Both angles are integrated octant by octant after a sigmoidal change of
/// variables that removes the integrable singularities on the coordinate
/// planes; the radius uses log-spaced panels, with the panel count on
/// `ρ > 1` growing with the oscillation rate `ρ · extent(g)`.
pub fn lalpha_norm_ah(
    g: &(impl FourierIntegrand + ?Sized),
    params: &ModelParams,
    radial_cutoff: f64,
) -> Result<LalphaNorm> {
    crate::error::check_domain("radial_cutoff", radial_cutoff, "(0, inf)", radial_cutoff > 0.0)?;
    let kernel = WeightedKernel::new(params)?;
    let alpha = params.alpha;
    let extent = g.extent().max(1e-3);
    let rule = gauss_legendre(GL_PER_PANEL);

    let shell = |rho: f64| -> Result<f64> {
        let panels = ((rho * extent / 4.0).ceil() as usize).clamp(2, 16);
        let angles = sigmoid_nodes(panels, &rule.nodes, &rule.weights);
        let mut acc = 0.0;
        // |A^H g| is even under y → −y, so the four upper octants suffice.
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            for &(th, wth) in &angles {
                let (st, ct) = th.sin_cos();
                for &(nu, wnu) in &angles {
                    let (sn, cn) = nu.sin_cos();
                    let y = [sx * rho * st * cn, sy * rho * st * sn, rho * ct];
                    if y.contains(&0.0) {
                        continue;
                    }
                    let v = g.fourier(&y)?.im.abs() * kernel.ln_weight(&ln_abs(&y)).exp();
                    acc += wth * wnu * st * v.powf(alpha);
                }
            }
        }
        Ok(2.0 * acc * rho * rho)
    };

    let mut total = 0.0;
    // ρ = e^u on (−depth, 0].
    for p in 0..INNER_LOG_DEPTH as usize {
        let (a, b) = (-(p as f64) - 1.0, -(p as f64));
        for (u, w) in rule.mapped(a, b) {
            let rho = u.exp();
            total += w * rho * shell(rho)?;
        }
    }

    let mut marks: Vec<f64> = [8.0, 4.0, 2.0, 1.0]
        .iter()
        .map(|d| radial_cutoff / d)
        .filter(|&r| r > 1.0)
        .collect();
    if marks.is_empty() {
        marks.push(radial_cutoff);
    }
    let mut partial = Vec::new();
    let mut start = 1.0_f64.min(radial_cutoff);
    if radial_cutoff < 1.0 {
        return Err(Error::Invalid(format!(
            "radial cutoff {radial_cutoff} must be at least 1"
        )));
    }
    for &end in &marks {
        let mut u = start.ln();
        let u_end = end.ln();
        while u < u_end {
            let step = (0.25f64).min(1.0 / u.exp()).min(u_end - u);
            for (uu, w) in rule.mapped(u, u + step) {
                let rho = uu.exp();
                total += w * rho * shell(rho)?;
            }
            u += step;
        }
        partial.push((end, total));
        start = end;
    }
    if !total.is_finite() {
        return Err(Error::Quadrature(format!("L^alpha norm of A^H g is not finite ({total})")));
    }

    let tail_estimate = match partial.as_slice() {
        [.., (_, a), (_, b), (_, c)] => {
            let (d0, d1) = (b - a, c - b);
            let q = d1 / d0;
            (d0 > 0.0 && q > 0.0 && q < 1.0).then(|| d1 * q / (1.0 - q))
        }
        _ => None,
    };
    Ok(LalphaNorm {
        value: total,
        tail_estimate,
        radial_cutoff,
        partial,
    })
}

/// Composite Gauss–Legendre nodes on `(0, π/2)` after the map
/// `θ = (π/2) s³/(s³ + (1−s)³)`, which flattens both endpoints.
fn sigmoid_nodes(panels: usize, nodes: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels * nodes.len());
    let h = 1.0 / panels as f64;
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in nodes.iter().zip(weights) {
            let s = a + 0.5 * h * (x + 1.0);
            let (p3, q3) = (s * s * s, (1.0 - s).powi(3));
            let den = p3 + q3;
            let theta = 0.5 * PI * p3 / den;
            let jac = 0.5 * PI * 3.0 * s * s * (1.0 - s) * (1.0 - s) / (den * den);
            out.push((theta, 0.5 * h * w * jac));
        }
    }
    out
}
