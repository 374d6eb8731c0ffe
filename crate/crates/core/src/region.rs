//! Integration regions and the Fourier transforms of their indicators.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, pow2_nodes};

/// Membership test for a general region.
pub type IndicatorFn = Arc<dyn Fn(&[f64; 3]) -> bool + Send + Sync>;

/// A Borel set of finite volume.
#[derive(Clone)]
pub enum RegionSpec {
    Empty,
    /// Axis-aligned box `∏ [lower_l, upper_l]`.
    Box { lower: [f64; 3], upper: [f64; 3] },
    Ball { center: [f64; 3], radius: f64 },
    /// Set given by a membership test inside a bounding box; transforms are
    /// computed by tensor Gauss–Legendre quadrature with at least
    /// `nodes_per_axis` nodes per axis.
    General {
        indicator: IndicatorFn,
        lower: [f64; 3],
        upper: [f64; 3],
        nodes_per_axis: usize,
    },
}

impl fmt::Debug for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "Empty"),
            Self::Box { lower, upper } => write!(f, "Box({lower:?}, {upper:?})"),
            Self::Ball { center, radius } => write!(f, "Ball({center:?}, {radius})"),
            Self::General { lower, upper, nodes_per_axis, .. } => {
                write!(f, "General(bbox {lower:?}..{upper:?}, {nodes_per_axis} nodes)")
            }
        }
    }
}

impl RegionSpec {
    pub fn cuboid(lower: [f64; 3], upper: [f64; 3]) -> Result<Self> {
        if lower.iter().chain(&upper).any(|c| c.is_infinite()) {
            return Err(Error::InfiniteVolume);
        }
        if lower.iter().chain(&upper).any(|c| c.is_nan()) || (0..3).any(|l| upper[l] < lower[l]) {
            return Err(Error::Invalid(format!("box corners {lower:?}, {upper:?} are not ordered")));
        }
        Ok(Self::Box { lower, upper })
    }

    /// The cube `[0, side]³`.
    pub fn unit_cube_scaled(side: f64) -> Result<Self> {
        Self::cuboid([0.0; 3], [side; 3])
    }

    /// `[0, v^{1/3}]³`, a cube of volume `v`.
    pub fn cube_of_volume(volume: f64) -> Result<Self> {
        if !(volume >= 0.0) {
            return Err(Error::Invalid(format!("volume {volume} must be nonnegative")));
        }
        Self::unit_cube_scaled(volume.cbrt())
    }

    pub fn ball(center: [f64; 3], radius: f64) -> Result<Self> {
        if radius.is_infinite() {
            return Err(Error::InfiniteVolume);
        }
        if !(radius >= 0.0) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid(format!("bad ball center {center:?} / radius {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    /// The centered ball of the given volume.
    pub fn ball_of_volume(volume: f64) -> Result<Self> {
        Self::ball([0.0; 3], (3.0 * volume / (4.0 * PI)).cbrt())
    }

    pub fn general(indicator: IndicatorFn, lower: [f64; 3], upper: [f64; 3], nodes_per_axis: usize) -> Result<Self> {
        if let Self::Box { lower, upper } = Self::cuboid(lower, upper)? {
            Ok(Self::General {
                indicator,
                lower,
                upper,
                nodes_per_axis: nodes_per_axis.max(2),
            })
        } else {
            unreachable!()
        }
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        match self {
            Self::Empty => false,
            Self::Box { lower, upper } => (0..3).all(|l| x[l] >= lower[l] && x[l] <= upper[l]),
            Self::Ball { center, radius } => {
                let d2: f64 = (0..3).map(|l| (x[l] - center[l]).powi(2)).sum();
                d2 <= radius * radius
            }
            Self::General { indicator, lower, upper, .. } => {
                (0..3).all(|l| x[l] >= lower[l] && x[l] <= upper[l]) && indicator(x)
            }
        }
    }

    /// Lebesgue measure; quadrature estimate for general regions.
    pub fn volume(&self) -> f64 {
        match self {
            Self::Empty => 0.0,
            Self::Box { lower, upper } => (0..3).map(|l| upper[l] - lower[l]).product(),
            Self::Ball { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
            Self::General { .. } => self.fourier(&[0.0; 3]).re,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Empty => 0.0,
            Self::Box { lower, upper } | Self::General { lower, upper, .. } => {
                (0..3).map(|l| (upper[l] - lower[l]).powi(2)).sum::<f64>().sqrt()
            }
            Self::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.volume().is_finite() {
            Ok(())
        } else {
            Err(Error::InfiniteVolume)
        }
    }

    /// `∫_A e^{i(x,y)} dx`. Defined for every `y`, including coordinate
    /// planes, where it takes its continuous limit.
    pub fn fourier(&self, y: &[f64; 3]) -> Complex64 {
        match self {
            Self::Empty => Complex64::new(0.0, 0.0),
            Self::Box { lower, upper } => (0..3)
                .map(|l| interval_fourier(lower[l], upper[l], y[l]))
                .product(),
            Self::Ball { center, radius } => {
                let r = norm(y);
                let phase = Complex64::from_polar(1.0, dot(center, y));
                phase * ball_fourier_radial(*radius, r)
            }
            Self::General { indicator, lower, upper, nodes_per_axis } => {
                general_fourier(indicator.as_ref(), lower, upper, *nodes_per_axis, y)
            }
        }
    }
}

/// `∫_a^b e^{ixy} dx = e^{i(a+b)y/2} (b−a) sinc((b−a)y/2)`.
pub(crate) fn interval_fourier(a: f64, b: f64, y: f64) -> Complex64 {
    let len = b - a;
    let z = 0.5 * len * y;
    let sinc = if z.abs() < 1e-4 { 1.0 - z * z / 6.0 } else { z.sin() / z };
    Complex64::from_polar(len * sinc, 0.5 * (a + b) * y)
}

/// `4π (sin(Rr) − Rr cos(Rr)) / r³`, the transform of a centered ball.
fn ball_fourier_radial(radius: f64, r: f64) -> f64 {
    let z = radius * r;
    let vol = 4.0 / 3.0 * PI * radius.powi(3);
    if z < 1e-2 {
        let z2 = z * z;
        vol * (1.0 - z2 / 10.0 + z2 * z2 / 280.0)
    } else {
        4.0 * PI * (z.sin() - z * z.cos()) / (r * r * r)
    }
}

fn general_fourier(
    indicator: &(dyn Fn(&[f64; 3]) -> bool + Send + Sync),
    lower: &[f64; 3],
    upper: &[f64; 3],
    min_nodes: usize,
    y: &[f64; 3],
) -> Complex64 {
    let rules: Vec<_> = (0..3)
        .map(|l| {
            let oscillations = y[l].abs() * (upper[l] - lower[l]);
            gauss_legendre(pow2_nodes(oscillations + min_nodes as f64, min_nodes))
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (x0, w0) in rules[0].mapped(lower[0], upper[0]) {
        for (x1, w1) in rules[1].mapped(lower[1], upper[1]) {
            for (x2, w2) in rules[2].mapped(lower[2], upper[2]) {
                let x = [x0, x1, x2];
                if indicator(&x) {
                    acc += Complex64::from_polar(w0 * w1 * w2, dot(&x, y));
                }
            }
        }
    }
    acc
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Euclidean norm, scaled so that it stays finite for coordinates near
/// the top of the `f64` range.
pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    let m = a[0].abs().max(a[1].abs()).max(a[2].abs());
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s = [a[0] / m, a[1] / m, a[2] / m];
    m * dot(&s, &s).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        assert_eq!(RegionSpec::Empty.volume(), 0.0);
        let b = RegionSpec::cuboid([0.0, -1.0, 2.0], [1.0, 1.0, 5.0]).unwrap();
        assert_eq!(b.volume(), 6.0);
        let c = RegionSpec::cube_of_volume(2.0).unwrap();
        assert!((c.volume() - 2.0).abs() < 1e-14);
        let ball = RegionSpec::ball_of_volume(0.5).unwrap();
        assert!((ball.volume() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            RegionSpec::cuboid([0.0; 3], [1.0, f64::INFINITY, 1.0]),
            Err(Error::InfiniteVolume)
        ));
        assert!(RegionSpec::cuboid([1.0, 0.0, 0.0], [0.0, 1.0, 1.0]).is_err());
        assert!(RegionSpec::ball([0.0; 3], -1.0).is_err());
    }

    #[test]
    fn box_transform_at_origin_is_volume() {
        let b = RegionSpec::cuboid([0.0, 0.0, 0.0], [1.0, 2.0, 0.5]).unwrap();
        let v = b.fourier(&[1e-9, -1e-9, 1e-9]);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_transform_matches_general_quadrature() {
        let ball = RegionSpec::ball([0.2, -0.1, 0.3], 0.7).unwrap();
        let inside = ball.clone();
        let general = RegionSpec::general(
            Arc::new(move |x| inside.contains(x)),
            [-0.5, -0.8, -0.4],
            [0.9, 0.6, 1.0],
            64,
        )
        .unwrap();
        let y = [0.9, -1.3, 0.4];
        let exact = ball.fourier(&y);
        let approx = general.fourier(&y);
        // indicator discontinuity limits tensor quadrature to a few digits
        assert!((exact - approx).norm() / exact.norm() < 2e-2, "{exact} vs {approx}");
        let small = ball.fourier(&[1e-4, 0.0, 0.0]);
        assert!((small.norm() - ball.volume()).abs() < 1e-8);
    }

    #[test]
    fn membership() {
        let b = RegionSpec::cuboid([0.0; 3], [1.0; 3]).unwrap();
        assert!(b.contains(&[0.5, 0.5, 0.5]));
        assert!(!b.contains(&[0.5, 1.5, 0.5]));
        assert!(!RegionSpec::Empty.contains(&[0.0; 3]));
    }
}
