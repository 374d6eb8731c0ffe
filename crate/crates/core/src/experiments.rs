//! Monte Carlo experiments over families of independent ensembles.
//!
//! Replicate `i` always uses the stream seed `replicate_seed(seed, i)`, and
//! every reduction runs in replicate order after the parallel map, so the
//! results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{generate_ensemble, replicate_seed, LePageEnsemble};
use crate::error::{Error, Result};
use crate::estimate::{estimate_alpha, estimate_scale, StableSampleSet};
use crate::field::{smoothing_convergence_report, SmoothingRow};
use crate::holder::{dyadic_sup_increments, estimate_holder, tail_slope, RegressionReport};
use crate::measure::{conditional_tail_variance, BoxMeasureSampler};
use crate::params::ModelParams;
use crate::region::RegionSpec;
use crate::wave::{weak_solution_residual, TestFunction, TimeIntegralCheck, WaveSeries, WeakQuadrature, WeakResidual};

/// Model, truncation level, number of replicates and base seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub params: ModelParams,
    pub terms: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl Design {
    pub fn new(params: ModelParams, terms: usize, replicates: usize, seed: u64) -> Result<Self> {
        params.validate()?;
        if terms == 0 || replicates == 0 {
            return Err(Error::Invalid("terms and replicates must be positive".into()));
        }
        Ok(Self { params, terms, replicates, seed })
    }

    pub fn ensemble(&self, index: usize) -> Result<LePageEnsemble> {
        generate_ensemble(self.terms, &self.params, replicate_seed(self.seed, index as u64))
    }

    /// Applies `f` to every replicate ensemble, in parallel, keeping order.
    pub fn map_ensembles<T: Send>(&self, f: impl Fn(&LePageEnsemble) -> Result<T> + Sync) -> Result<Vec<T>> {
        (0..self.replicates)
            .into_par_iter()
            .map(|i| f(&self.ensemble(i)?))
            .collect()
    }
}

/// `M(A)` for each box over all replicates: `out[region][replicate]`.
pub fn measure_replicates(design: &Design, regions: &[RegionSpec]) -> Result<Vec<Vec<f64>>> {
    let sampler = BoxMeasureSampler::new(regions, &design.params, design.terms)?;
    let rows: Vec<Vec<f64>> = (0..design.replicates)
        .into_par_iter()
        .map(|i| sampler.sample(replicate_seed(design.seed, i as u64)))
        .collect::<Result<_>>()?;
    Ok((0..regions.len()).map(|r| rows.iter().map(|row| row[r]).collect()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryRow {
    pub volume: f64,
    /// Estimated `‖M(A)‖_α^α`.
    pub scale_alpha: f64,
    /// `scale_alpha / volume`; the isometry predicts 1.
    pub ratio: f64,
}

/// Estimated `‖M(A)‖_α^α / λ(A)` for cubes `[0, v^{1/3}]³`.
pub fn isometry(design: &Design, volumes: &[f64]) -> Result<Vec<IsometryRow>> {
    let regions: Vec<RegionSpec> = volumes.iter().map(|&v| RegionSpec::cube_of_volume(v)).collect::<Result<_>>()?;
    let samples = measure_replicates(design, &regions)?;
    let alpha = design.params.alpha;
    volumes
        .iter()
        .zip(samples)
        .map(|(&volume, values)| {
            let scale = estimate_scale(&StableSampleSet::new(values, alpha)?, alpha)?;
            let scale_alpha = scale.powf(alpha);
            Ok(IsometryRow {
                volume,
                scale_alpha,
                ratio: scale_alpha / volume,
            })
        })
        .collect()
}

/// `estimate_alpha` applied to replicates of `M([0,1]³)`.
pub fn alpha_recovery(design: &Design) -> Result<f64> {
    let values = measure_replicates(design, &[RegionSpec::unit_cube_scaled(1.0)?])?.remove(0);
    estimate_alpha(&StableSampleSet::new(values, design.params.alpha)?)
}

/// Which one-dimensional section of `U` a Hölder fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Section {
    /// `s ↦ U(point, s)` for `s ∈ [0, length]`.
    Time,
    /// `s ↦ U(point + s e_axis, time)` for `s ∈ [0, length]`.
    Space { axis: usize, time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderSetup {
    pub point: [f64; 3],
    pub section: Section,
    pub length: f64,
    /// The path is sampled on `2^log2_intervals` intervals.
    pub log2_intervals: u32,
    pub n_min: u32,
    pub n_max: u32,
    pub with_log_correction: bool,
}

impl Default for HolderSetup {
    fn default() -> Self {
        Self {
            point: [1.0, 1.0, 1.0],
            section: Section::Time,
            length: 1.0,
            log2_intervals: 12,
            n_min: 3,
            n_max: 8,
            with_log_correction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderSummary {
    pub mean_exponent: f64,
    pub exponents: Vec<f64>,
    pub reports: Vec<RegressionReport>,
}

/// Fits a Hölder exponent to one section of `U` per replicate.
pub fn holder_exponents(design: &Design, setup: &HolderSetup) -> Result<HolderSummary> {
    let m = 1usize << setup.log2_intervals;
    let grid: Vec<f64> = (0..=m).map(|i| setup.length * i as f64 / m as f64).collect();
    let reports = design.map_ensembles(|ens| {
        let series = WaveSeries::new(ens, &design.params)?;
        let path = match setup.section {
            Section::Time => series.u_time_series(&setup.point, &grid),
            Section::Space { axis, time } => {
                if axis > 2 {
                    return Err(Error::Invalid(format!("axis {axis} is not 0, 1 or 2")));
                }
                series.u_space_series(&setup.point, axis, &grid, time)
            }
        };
        let table = dyadic_sup_increments(&path, setup.length, setup.n_min, setup.n_max)?;
        let mut report = estimate_holder(&table, setup.with_log_correction, design.params.alpha)?;
        report.increment_log_constant = Some(design.params.increment_log_constant());
        Ok(report)
    })?;
    let exponents: Vec<f64> = reports.iter().map(|r| r.exponent).collect();
    Ok(HolderSummary {
        mean_exponent: exponents.iter().sum::<f64>() / exponents.len() as f64,
        exponents,
        reports,
    })
}

/// [`TimeIntegralCheck`] at `(x, t)` for each replicate.
pub fn absolute_continuity(design: &Design, x: [f64; 3], t: f64, n_quad: usize) -> Result<Vec<TimeIntegralCheck>> {
    design.map_ensembles(|ens| crate::wave::time_integral_check(ens, &x, t, &design.params, n_quad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub v: f64,
    /// `|ΔU/2h − V|` at the coarse step.
    pub error_coarse: f64,
    /// The same at the fine step.
    pub error_fine: f64,
}

impl DerivativeRow {
    pub fn ratio(&self) -> f64 {
        self.error_coarse / self.error_fine
    }
}

/// Central differences of `U` in time against `V`, at two step sizes.
pub fn derivative_consistency(design: &Design, x: [f64; 3], t: f64, steps: (f64, f64)) -> Result<Vec<DerivativeRow>> {
    let (hc, hf) = steps;
    if !(hc > 0.0 && hf > 0.0 && t - hc >= 0.0 && t - hf >= 0.0) {
        return Err(Error::Invalid("steps must be positive and keep t - h >= 0".into()));
    }
    design.map_ensembles(|ens| {
        let s = WaveSeries::new(ens, &design.params)?;
        let v = s.v(&x, t);
        let fd = |h: f64| (s.u(&x, t + h) - s.u(&x, t - h)) / (2.0 * h);
        Ok(DerivativeRow {
            v,
            error_coarse: (fd(hc) - v).abs(),
            error_fine: (fd(hf) - v).abs(),
        })
    })
}

/// [`smoothing_convergence_report`] for each replicate.
pub fn smoothing_convergence(design: &Design, region: &RegionSpec, eps_list: &[f64]) -> Result<Vec<Vec<SmoothingRow>>> {
    design.map_ensembles(|ens| smoothing_convergence_report(ens, region, &design.params, eps_list))
}

/// Whether the errors of a report strictly decrease as `ε` decreases.
pub fn strictly_decreasing(rows: &[SmoothingRow]) -> bool {
    rows.windows(2).all(|w| w[1].error < w[0].error)
}

/// The weak-formulation residual at a coarse and a fine quadrature.
pub fn weak_refinement(
    design: &Design,
    theta: &TestFunction,
    coarse: usize,
    fine: usize,
) -> Result<Vec<(WeakResidual, WeakResidual)>> {
    design.map_ensembles(|ens| {
        Ok((
            weak_solution_residual(ens, theta, &design.params, &WeakQuadrature::uniform(coarse))?,
            weak_solution_residual(ens, theta, &design.params, &WeakQuadrature::uniform(fine))?,
        ))
    })
}

/// [`truncation_slope`] for `f = 1_{[0,1]³}` over all replicates, without
/// holding every ensemble in memory at once.
pub fn truncation_diagnostic(design: &Design, k_list: &[usize]) -> Result<f64> {
    crate::holder::check_k_list(k_list)?;
    let cube = RegionSpec::unit_cube_scaled(1.0)?;
    let per_ensemble = design.map_ensembles(|ens| {
        k_list
            .iter()
            .map(|&k0| conditional_tail_variance(ens, &cube, k0))
            .collect::<Result<Vec<f64>>>()
    })?;
    let means: Vec<f64> = (0..k_list.len())
        .map(|j| per_ensemble.iter().map(|v| v[j]).sum::<f64>() / per_ensemble.len() as f64)
        .collect();
    tail_slope(k_list, &means)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(terms: usize, replicates: usize) -> Design {
        Design::new(ModelParams::new(1.5, 0.75, 1.0, 1.0).unwrap(), terms, replicates, 9).unwrap()
    }

    #[test]
    fn measure_replicates_match_ensembles() {
        let d = design(300, 4);
        let cube = RegionSpec::unit_cube_scaled(1.0).unwrap();
        let m = measure_replicates(&d, &[cube.clone()]).unwrap();
        for i in 0..4 {
            let ens = d.ensemble(i).unwrap();
            assert_eq!(m[0][i], crate::measure::measure_of_set(&ens, &cube).unwrap());
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let d = design(500, 6);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let setup = HolderSetup { log2_intervals: 8, ..HolderSetup::default() };
                    holder_exponents(&d, &setup).unwrap().exponents
                })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn derivative_rows_reject_bad_steps() {
        let d = design(50, 1);
        assert!(derivative_consistency(&d, [1.0; 3], 0.001, (0.01, 0.001)).is_err());
        let rows = derivative_consistency(&d, [1.0; 3], 1.0, (0.01, 0.001)).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn streaming_diagnostic_matches_truncation_slope() {
        let d = design(400, 5);
        let ensembles: Vec<_> = (0..5).map(|i| d.ensemble(i).unwrap()).collect();
        let cube = RegionSpec::unit_cube_scaled(1.0).unwrap();
        let k = [5, 20, 80];
        let a = crate::holder::truncation_slope(&ensembles, &cube, &k).unwrap();
        let b = truncation_diagnostic(&d, &k).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn monotone_helper() {
        let row = |eps, error| SmoothingRow { eps, smoothed: 0.0, error };
        assert!(strictly_decreasing(&[row(0.1, 3.0), row(0.01, 2.0), row(0.001, 1.0)]));
        assert!(!strictly_decreasing(&[row(0.1, 3.0), row(0.01, 3.0)]));
    }
}
