//! Simulation of the three-dimensional wave equation
//!
//! ```text
//! U_tt = a² ΔU + ∂Z^H,   U(x, 0) = 0,   U_t(x, 0) = 0,
//! ```
//!
//! driven by a harmonizable fractional symmetric α-stable field `Z^H`, with
//! every random object built from one truncated LePage series.
//!
//! The layers, from the bottom up:
//!
//! * [`stable`], [`ensemble`]: constants, the auxiliary density `φ`, and the
//!   random triple `(Γ_k, ξ_k, g_k)`.
//! * [`measure`], [`estimate`]: the stable random measure `M` and stable-law
//!   estimators used to check it.
//! * [`ah`], [`field`]: the operator `A^H` and the field `Z^H`, its measure
//!   and its integral.
//! * [`wave`], [`grid`]: the Kirchhoff solution `U`, its time derivative and
//!   the weak formulation.
//! * [`holder`], [`experiments`], [`runner`]: path regularity, Monte Carlo
//!   experiments and reproducible runs.
//!
//! ```
//! use stablewave::{generate_ensemble, solve_u, ModelParams};
//!
//! let params = ModelParams::new(1.5, 0.7, 1.0, 1.0)?;
//! let ens = generate_ensemble(1000, &params, 42)?;
//! assert_eq!(solve_u(&ens, &[0.3, 0.2, 0.1], 0.0, &params)?, 0.0);
//! assert_eq!(solve_u(&ens, &[0.0; 3], 1.0, &params)?, 0.0);
//! # Ok::<(), stablewave::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ah;
pub mod ensemble;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod holder;
pub mod measure;
pub mod params;
pub mod quadrature;
pub mod region;
pub mod runner;
pub mod stable;
pub mod wave;

pub use ah::{apply_ah, f_a_kernel, fourier_box, kirchhoff_ah_kernel, lalpha_norm_ah, FourierIntegrand, LalphaNorm};
pub use ensemble::{generate_ensemble, replicate_seed, LePageEnsemble};
pub use error::{Error, Result};
pub use estimate::{estimate_alpha, estimate_scale, StableSampleSet};
pub use field::{ih_integral, smoothing_convergence_report, zh_measure, zh_point, zh_smooth_point, SmoothingRow};
pub use grid::{grid_field, FieldGrid, GridSpec};
pub use holder::{dyadic_sup_increments, estimate_holder, truncation_slope, IncrementTable, RegressionReport};
pub use measure::{conditional_tail_variance, lepage_integral, measure_of_set, Integrand};
pub use params::ModelParams;
pub use region::RegionSpec;
pub use stable::{gaussian_alpha_norm, lepage_constant, phi_norm_constant, sample_phi_marginal, PhiDensity};
pub use wave::{solve_u, solve_v, time_integral_check, weak_solution_residual, TestFunction, WaveSeries, WeakQuadrature};
