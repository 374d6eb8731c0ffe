//! Hölder exponent estimation from dyadic suprema of increments, and the
//! truncation diagnostic for the series tail.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::ensemble::LePageEnsemble;
use crate::error::{Error, Result};
use crate::measure::{conditional_tail_variance, Integrand};

/// `sup |f(s) − f(s')|` over `|s − s'| ≤ 2^{−n}·length`, for each level `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementTable {
    pub levels: Vec<u32>,
    /// `2^{−n}·length`, strictly decreasing.
    pub scales: Vec<f64>,
    pub sup_increments: Vec<f64>,
}

impl IncrementTable {
    /// CSV with columns `level,scale,sup_increment`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["level", "scale", "sup_increment"])?;
        for i in 0..self.levels.len() {
            w.write_record([
                self.levels[i].to_string(),
                format!("{:?}", self.scales[i]),
                format!("{:?}", self.sup_increments[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Dyadic suprema of increments of a path sampled at `2^N + 1` equally
/// spaced points covering an interval of the given length. Every level
/// `n ∈ [n_min, n_max]` needs `2^N ≥ 2^n`.
pub fn dyadic_sup_increments(path: &[f64], length: f64, n_min: u32, n_max: u32) -> Result<IncrementTable> {
    if n_min > n_max {
        return Err(Error::Invalid(format!("n_min {n_min} exceeds n_max {n_max}")));
    }
    let intervals = path.len().saturating_sub(1);
    let needed = 1usize.checked_shl(n_max).unwrap_or(usize::MAX);
    if intervals == 0 || !intervals.is_power_of_two() || intervals < needed {
        return Err(Error::Resolution {
            intervals,
            n_max,
            needed,
        });
    }
    if path.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("path contains non-finite values".into()));
    }
    let mut table = IncrementTable {
        levels: Vec::new(),
        scales: Vec::new(),
        sup_increments: Vec::new(),
    };
    for n in n_min..=n_max {
        let lag = intervals >> n;
        table.levels.push(n);
        table.scales.push(length / (1u64 << n) as f64);
        table.sup_increments.push(max_window_range(path, lag + 1));
    }
    Ok(table)
}

/// Largest `max − min` over all windows of `window` consecutive samples.
fn max_window_range(path: &[f64], window: usize) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best: f64 = 0.0;
    for (i, &v) in path.iter().enumerate() {
        while maxq.back().is_some_and(|&j| path[j] <= v) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| path[j] >= v) {
            minq.pop_back();
        }
        minq.push_back(i);
        if maxq[0] + window <= i {
            maxq.pop_front();
        }
        if minq[0] + window <= i {
            minq.pop_front();
        }
        best = best.max(path[maxq[0]] - path[minq[0]]);
    }
    best
}

/// Least-squares fit of `log₂ sup_increment` against `log₂ h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub scales: Vec<f64>,
    pub sup_increments: Vec<f64>,
    /// Power of `|log h|` divided out before fitting (0 when uncorrected).
    pub log_correction_exponent: f64,
    /// `(1 + η)(2/α − 1)`, for reference; never fitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increment_log_constant: Option<f64>,
}

/// Fits `sup_n ≈ C h_n^γ`, or `sup_n ≈ C h_n^γ |log h_n|^{3/α − 1/2}` when
/// `with_log_correction` is set.
pub fn estimate_holder(table: &IncrementTable, with_log_correction: bool, alpha: f64) -> Result<RegressionReport> {
    let n = table.scales.len();
    if n < 4 || table.sup_increments.len() != n {
        return Err(Error::DegenerateFit(format!("need at least 4 scales, got {n}")));
    }
    if table.scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("scales must be strictly decreasing".into()));
    }
    if table.sup_increments.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateFit("zero increment at some scale; exponent is +inf".into()));
    }
    let kappa = if with_log_correction {
        crate::error::check_domain("alpha", alpha, "(0, 2]", alpha > 0.0 && alpha <= 2.0)?;
        if table.scales.iter().any(|&h| h >= 1.0) {
            return Err(Error::Invalid("log correction needs scales below 1".into()));
        }
        3.0 / alpha - 0.5
    } else {
        0.0
    };
    let xs: Vec<f64> = table.scales.iter().map(|h| h.log2()).collect();
    let ys: Vec<f64> = table
        .scales
        .iter()
        .zip(&table.sup_increments)
        .map(|(h, s)| {
            let y = s.log2();
            if kappa == 0.0 {
                y
            } else {
                y - kappa * h.ln().abs().log2()
            }
        })
        .collect();
    let (slope, intercept, r2, residuals) = least_squares(&xs, &ys);
    Ok(RegressionReport {
        exponent: slope,
        intercept,
        r_squared: r2,
        residuals,
        scales: table.scales.clone(),
        sup_increments: table.sup_increments.clone(),
        log_correction_exponent: kappa,
        increment_log_constant: None,
    })
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, r², residuals)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (a + b * x)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    (b, a, r2, residuals)
}

/// Log-log slope of the ensemble mean of
/// [`conditional_tail_variance`] against the tail start `k0`.
pub fn truncation_slope(
    ensembles: &[LePageEnsemble],
    f: &(impl Integrand + ?Sized),
    k_list: &[usize],
) -> Result<f64> {
    check_k_list(k_list)?;
    if ensembles.is_empty() {
        return Err(Error::Invalid("no ensembles given".into()));
    }
    let mut means = Vec::with_capacity(k_list.len());
    for &k0 in k_list {
        let mut acc = 0.0;
        for ens in ensembles {
            acc += conditional_tail_variance(ens, f, k0)?;
        }
        means.push(acc / ensembles.len() as f64);
    }
    tail_slope(k_list, &means)
}

pub(crate) fn check_k_list(k_list: &[usize]) -> Result<()> {
    if k_list.len() < 3 || k_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "k_list needs at least 3 strictly increasing entries".into(),
        ));
    }
    Ok(())
}

/// Log-log slope of mean tail variances against `k0`.
pub(crate) fn tail_slope(k_list: &[usize], means: &[f64]) -> Result<f64> {
    if means.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::DegenerateFit("tail variance vanishes".into()));
    }
    let xs: Vec<f64> = k_list.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    Ok(least_squares(&xs, &ys).0)
}
