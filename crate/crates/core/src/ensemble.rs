//! The random triple `(Γ_k, ξ_k, g_k)` shared by every coupled computation.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::stable::{gaussian_alpha_norm, lepage_series_factor, CoordDraw, PhiDensity, PhiSampler};

/// Mixes a base seed with a replicate index into an independent stream seed.
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One term of the series before the spatial coordinates are materialized.
pub(crate) struct RawTerm {
    pub gamma: f64,
    pub draws: [CoordDraw; 3],
    pub g: f64,
}

/// Sequential generator of series terms. Term `k` consumes the same random
/// draws whatever the total count, so every ensemble is a prefix of any
/// longer ensemble with the same seed.
pub(crate) struct TermSource {
    rng: ChaCha8Rng,
    pub sampler: PhiSampler,
    sigma: f64,
    gamma: f64,
}

impl TermSource {
    pub fn new(seed: u64, alpha: f64, eta: f64) -> Result<Self> {
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sampler: PhiSampler::new(eta)?,
            sigma: gaussian_alpha_norm(alpha)?,
            gamma: 0.0,
        })
    }

    pub fn next_raw(&mut self) -> RawTerm {
        let e: f64 = self.rng.sample(Exp1);
        self.gamma += e;
        let draws = [
            self.sampler.draw(&mut self.rng),
            self.sampler.draw(&mut self.rng),
            self.sampler.draw(&mut self.rng),
        ];
        let z: f64 = self.rng.sample(StandardNormal);
        RawTerm {
            gamma: self.gamma,
            draws,
            g: self.sigma * z,
        }
    }
}

/// Precomputed `log` of the deterministic part of one series coefficient,
/// `log(C Γ^{-1/α} φ(ξ)^{-1/α})` with `C` the series factor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CoefficientLog {
    ln_factor: f64,
    inv_alpha: f64,
    phi: PhiDensity,
}

impl CoefficientLog {
    pub fn new(alpha: f64, eta: f64) -> Result<Self> {
        Ok(Self {
            ln_factor: lepage_series_factor(alpha)?.ln(),
            inv_alpha: 1.0 / alpha,
            phi: PhiDensity::new(eta)?,
        })
    }

    pub fn ln_abs(xi: &[f64; 3]) -> [f64; 3] {
        [xi[0].abs().ln(), xi[1].abs().ln(), xi[2].abs().ln()]
    }

    pub fn eval(&self, gamma: f64, ln_abs: &[f64; 3]) -> f64 {
        self.ln_factor
            - self.inv_alpha * gamma.ln()
            - self.inv_alpha * self.phi.ln_sampling_density(ln_abs)
    }
}

/// A truncated LePage ensemble.
///
/// Holds the Poisson arrivals `Γ_k`, the points `ξ_k ∈ R³` drawn from `φ`,
/// the Gaussian multipliers `g_k` and, derived from them, `log|ξ_{k,l}|` and
/// the log-coefficients `log(C Γ_k^{-1/α} φ(ξ_k)^{-1/α})`. Immutable once
/// built.
#[derive(Debug, Clone)]
pub struct LePageEnsemble {
    seed: u64,
    alpha: f64,
    eta: f64,
    gammas: Vec<f64>,
    xis: Vec<[f64; 3]>,
    gs: Vec<f64>,
    ln_abs_xi: Vec<[f64; 3]>,
    ln_base: Vec<f64>,
}

/// Generate `count` terms for the given model from `seed`.
pub fn generate_ensemble(count: usize, params: &ModelParams, seed: u64) -> Result<LePageEnsemble> {
    if count == 0 {
        return Err(Error::Invalid("ensemble needs at least one term".into()));
    }
    params.validate()?;
    let mut source = TermSource::new(seed, params.alpha, params.eta)?;
    let mut gammas = Vec::with_capacity(count);
    let mut xis = Vec::with_capacity(count);
    let mut gs = Vec::with_capacity(count);
    for _ in 0..count {
        let raw = source.next_raw();
        let s = &source.sampler;
        gammas.push(raw.gamma);
        xis.push([
            s.coordinate(raw.draws[0]),
            s.coordinate(raw.draws[1]),
            s.coordinate(raw.draws[2]),
        ]);
        gs.push(raw.g);
    }
    LePageEnsemble::from_parts(seed, params.alpha, params.eta, gammas, xis, gs)
}

impl LePageEnsemble {
    /// Assemble an ensemble from raw sequences, validating the invariants.
    pub fn from_parts(
        seed: u64,
        alpha: f64,
        eta: f64,
        gammas: Vec<f64>,
        xis: Vec<[f64; 3]>,
        gs: Vec<f64>,
    ) -> Result<Self> {
        let n = gammas.len();
        if n == 0 || xis.len() != n || gs.len() != n {
            return Err(Error::Invalid(format!(
                "sequence lengths differ or are empty: {} / {} / {}",
                n,
                xis.len(),
                gs.len()
            )));
        }
        if !(gammas[0] > 0.0) || gammas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("arrival times must be positive and strictly increasing".into()));
        }
        for (k, xi) in xis.iter().enumerate() {
            if xi.iter().any(|c| *c == 0.0 || !c.is_finite()) {
                return Err(Error::Invalid(format!("point {} has a zero or non-finite coordinate", k + 1)));
            }
        }
        if gs.iter().any(|g| !g.is_finite()) {
            return Err(Error::Invalid("non-finite Gaussian multiplier".into()));
        }
        let coef = CoefficientLog::new(alpha, eta)?;
        let ln_abs_xi: Vec<[f64; 3]> = xis.iter().map(CoefficientLog::ln_abs).collect();
        let ln_base = gammas
            .iter()
            .zip(&ln_abs_xi)
            .map(|(&g, l)| coef.eval(g, l))
            .collect();
        Ok(Self {
            seed,
            alpha,
            eta,
            gammas,
            xis,
            gs,
            ln_abs_xi,
            ln_base,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Truncation level `K`.
    pub fn truncation(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn xis(&self) -> &[[f64; 3]] {
        &self.xis
    }

    pub fn gs(&self) -> &[f64] {
        &self.gs
    }

    pub fn ln_abs_xi(&self) -> &[[f64; 3]] {
        &self.ln_abs_xi
    }

    /// `log(C Γ_k^{-1/α} φ(ξ_k)^{-1/α})` per term.
    pub fn ln_coefficients(&self) -> &[f64] {
        &self.ln_base
    }

    /// The first `k` terms as an ensemble of their own.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.truncation() {
            return Err(Error::Invalid(format!("prefix length {k} out of 1..={}", self.truncation())));
        }
        Ok(Self {
            seed: self.seed,
            alpha: self.alpha,
            eta: self.eta,
            gammas: self.gammas[..k].to_vec(),
            xis: self.xis[..k].to_vec(),
            gs: self.gs[..k].to_vec(),
            ln_abs_xi: self.ln_abs_xi[..k].to_vec(),
            ln_base: self.ln_base[..k].to_vec(),
        })
    }

    pub(crate) fn check_alpha(&self, params: &ModelParams) -> Result<()> {
        if self.alpha != params.alpha {
            return Err(Error::EnsembleMismatch {
                ensemble: self.alpha,
                model: params.alpha,
            });
        }
        Ok(())
    }

    /// Write as CSV: a `# seed=..,alpha=..,eta=..,K=..` line, a header row,
    /// then one `gamma,xi1,xi2,xi3,g` row per term. Numbers use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# seed={},alpha={:?},eta={:?},K={}",
            self.seed,
            self.alpha,
            self.eta,
            self.truncation()
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gamma", "xi1", "xi2", "xi3", "g"])?;
        for k in 0..self.truncation() {
            let xi = &self.xis[k];
            w.write_record([
                format!("{:?}", self.gammas[k]),
                format!("{:?}", xi[0]),
                format!("{:?}", xi[1]),
                format!("{:?}", xi[2]),
                format!("{:?}", self.gs[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let meta = parse_metadata_line(&first)?;
        let field = |key: &str| -> Result<&str> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Parse(format!("metadata line lacks `{key}`")))
        };
        let seed: u64 = parse_num(field("seed")?)?;
        let alpha: f64 = parse_num(field("alpha")?)?;
        let eta: f64 = parse_num(field("eta")?)?;
        let count: usize = parse_num(field("K")?)?;

        let mut reader = csv::Reader::from_reader(input);
        let mut gammas = Vec::with_capacity(count);
        let mut xis = Vec::with_capacity(count);
        let mut gs = Vec::with_capacity(count);
        for record in reader.records() {
            let record = record?;
            if record.len() != 5 {
                return Err(Error::Parse(format!("expected 5 columns, found {}", record.len())));
            }
            let v: Vec<f64> = record.iter().map(parse_num).collect::<Result<_>>()?;
            gammas.push(v[0]);
            xis.push([v[1], v[2], v[3]]);
            gs.push(v[4]);
        }
        if gammas.len() != count {
            return Err(Error::Parse(format!("header announces K={count}, found {} rows", gammas.len())));
        }
        Self::from_parts(seed, alpha, eta, gammas, xis, gs)
    }
}

pub(crate) fn parse_metadata_line(line: &str) -> Result<Vec<(String, String)>> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing `#` metadata line".into()))?;
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata entry `{kv}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

pub(crate) fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse `{s}` as a number")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64) -> ModelParams {
        ModelParams::new(alpha, 0.7, 1.0, 1.0).unwrap()
    }

    #[test]
    fn arrivals_increase_and_points_are_nonzero() {
        let ens = generate_ensemble(5000, &params(1.5), 3).unwrap();
        assert!(ens.gammas()[0] > 0.0);
        assert!(ens.gammas().windows(2).all(|w| w[1] > w[0]));
        assert!(ens.xis().iter().flatten().all(|c| *c != 0.0 && c.is_finite()));
        assert!(ens.ln_coefficients().iter().all(|c| c.is_finite()));
    }

    #[test]
    fn prefix_stable_streams() {
        let short = generate_ensemble(100, &params(1.5), 77).unwrap();
        let long = generate_ensemble(1000, &params(1.5), 77).unwrap();
        assert_eq!(short.gammas(), &long.gammas()[..100]);
        assert_eq!(short.xis(), &long.xis()[..100]);
        assert_eq!(short.gs(), &long.gs()[..100]);
        assert_eq!(short.ln_coefficients(), long.prefix(100).unwrap().ln_coefficients());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let ens = generate_ensemble(300, &params(1.2), 9).unwrap();
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).unwrap();
        let back = LePageEnsemble::read_csv(&buf[..]).unwrap();
        assert_eq!(back.seed(), 9);
        assert_eq!(back.alpha(), 1.2);
        assert_eq!(back.gammas(), ens.gammas());
        assert_eq!(back.xis(), ens.xis());
        assert_eq!(back.gs(), ens.gs());
        assert_eq!(back.ln_coefficients(), ens.ln_coefficients());
        let mut again = Vec::new();
        back.write_csv(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_ensemble(200, &params(1.8), 1234).unwrap();
        let b = generate_ensemble(200, &params(1.8), 1234).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn rejects_bad_parts() {
        assert!(generate_ensemble(0, &params(1.5), 1).is_err());
        let bad = LePageEnsemble::from_parts(0, 1.5, 1.0, vec![2.0, 1.0], vec![[1.0; 3]; 2], vec![0.0; 2]);
        assert!(bad.is_err());
        let zero = LePageEnsemble::from_parts(0, 1.5, 1.0, vec![1.0], vec![[1.0, 0.0, 1.0]], vec![0.0]);
        assert!(zero.is_err());
        assert!(LePageEnsemble::read_csv("seed=1\n".as_bytes()).is_err());
    }

    #[test]
    fn replicate_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| replicate_seed(42, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(replicate_seed(1, 0), replicate_seed(2, 0));
    }
}
