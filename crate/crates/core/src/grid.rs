//! Space-time lattices of `U` values and their CSV/JSON export.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{parse_metadata_line, parse_num, LePageEnsemble};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::wave::WaveSeries;

/// A tensor lattice: `counts[0..3]` nodes per spatial axis over
/// `[space.0, space.1]`, and `counts[3]` times over `[time.0, time.1]`.
/// An axis with a single node sits at the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: [usize; 4],
    pub space: (f64, f64),
    pub time: (f64, f64),
}

impl GridSpec {
    pub fn new(counts: [usize; 4], space: (f64, f64), time: (f64, f64)) -> Result<Self> {
        let spec = Self { counts, space, time };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.contains(&0) {
            return Err(Error::Invalid(format!("grid counts must be positive, got {:?}", self.counts)));
        }
        let (s0, s1) = self.space;
        let (t0, t1) = self.time;
        if !(s0.is_finite() && s1.is_finite() && s0 <= s1) {
            return Err(Error::Invalid(format!("bad spatial range [{s0}, {s1}]")));
        }
        if !(t0.is_finite() && t1.is_finite() && 0.0 <= t0 && t0 <= t1) {
            return Err(Error::Invalid(format!("bad time range [{t0}, {t1}]; times must be >= 0")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Spatial nodes in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<[f64; 3]> {
        let a: Vec<Vec<f64>> = (0..3).map(|l| Self::axis(self.counts[l], self.space)).collect();
        let mut out = Vec::with_capacity(self.counts[..3].iter().product());
        for &x1 in &a[0] {
            for &x2 in &a[1] {
                for &x3 in &a[2] {
                    out.push([x1, x2, x3]);
                }
            }
        }
        out
    }

    pub fn times(&self) -> Vec<f64> {
        Self::axis(self.counts[3], self.time)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            counts: [9, 9, 9, 17],
            space: (-1.0, 1.0),
            time: (0.0, 1.0),
        }
    }
}

/// Parses `N1xN2xN3xNt`, using the default ranges `[-1, 1]³ × [0, 1]`.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("grid `{s}` is not of the form N1xN2xN3xNt")));
        }
        let mut counts = [0usize; 4];
        for (c, p) in counts.iter_mut().zip(&parts) {
            *c = p
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("grid `{s}`: `{p}` is not a node count")))?;
        }
        Self::new(counts, (-1.0, 1.0), (0.0, 1.0))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.counts;
        write!(f, "{a}x{b}x{c}x{d}")
    }
}

/// Values of `U` on a lattice; `values[i * ts.len() + j] = U(xs[i], ts[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub xs: Vec<[f64; 3]>,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub params: ModelParams,
    pub ensemble_seed: u64,
    pub truncation: usize,
}

/// Header fields shared by the CSV preamble and the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGridMeta {
    pub seed: u64,
    #[serde(rename = "K")]
    pub truncation: usize,
    pub alpha: f64,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub eta: f64,
    pub a: f64,
}

impl FieldGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ts.len() + j]
    }

    pub fn meta(&self) -> FieldGridMeta {
        FieldGridMeta {
            seed: self.ensemble_seed,
            truncation: self.truncation,
            alpha: self.params.alpha,
            hurst: self.params.hurst,
            eta: self.params.eta,
            a: self.params.wave_speed,
        }
    }

    /// Long-format CSV: one `# seed=..,K=..,alpha=..,H=..,eta=..,a=..` line,
    /// a header row, then one `x1,x2,x3,t,U` row per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = self.meta();
        writeln!(
            out,
            "# seed={},K={},alpha={:?},H={:?},eta={:?},a={:?}",
            m.seed, m.truncation, m.alpha, m.hurst, m.eta, m.a
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x1", "x2", "x3", "t", "U"])?;
        for (i, x) in self.xs.iter().enumerate() {
            for (j, t) in self.ts.iter().enumerate() {
                w.write_record([
                    format!("{:?}", x[0]),
                    format!("{:?}", x[1]),
                    format!("{:?}", x[2]),
                    format!("{t:?}"),
                    format!("{:?}", self.value(i, j)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`FieldGrid::write_csv`]. Rows must form a full
    /// tensor lattice in the order written.
    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let meta = parse_metadata_line(&first)?;
        let get = |key: &str| -> Result<&str> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Parse(format!("metadata line lacks `{key}`")))
        };
        let params = ModelParams::new(
            parse_num(get("alpha")?)?,
            parse_num(get("H")?)?,
            parse_num(get("eta")?)?,
            parse_num(get("a")?)?,
        )?;
        let ensemble_seed = parse_num(get("seed")?)?;
        let truncation = parse_num(get("K")?)?;

        let mut rows: Vec<[f64; 5]> = Vec::new();
        for record in csv::Reader::from_reader(input).records() {
            let record = record?;
            if record.len() != 5 {
                return Err(Error::Parse(format!("expected 5 columns, found {}", record.len())));
            }
            let mut r = [0.0; 5];
            for (dst, src) in r.iter_mut().zip(record.iter()) {
                *dst = parse_num(src)?;
            }
            rows.push(r);
        }
        let Some(first_row) = rows.first() else {
            return Err(Error::Parse("field grid has no rows".into()));
        };
        let x0 = [first_row[0], first_row[1], first_row[2]];
        let nt = rows
            .iter()
            .take_while(|r| [r[0], r[1], r[2]] == x0)
            .count();
        if rows.len() % nt != 0 {
            return Err(Error::Parse("rows do not form a space-time lattice".into()));
        }
        let ts: Vec<f64> = rows[..nt].iter().map(|r| r[3]).collect();
        let mut xs = Vec::with_capacity(rows.len() / nt);
        for chunk in rows.chunks(nt) {
            let x = [chunk[0][0], chunk[0][1], chunk[0][2]];
            if chunk.iter().zip(&ts).any(|(r, &t)| [r[0], r[1], r[2]] != x || r[3] != t) {
                return Err(Error::Parse("rows do not form a space-time lattice".into()));
            }
            xs.push(x);
        }
        Ok(Self {
            xs,
            ts,
            values: rows.iter().map(|r| r[4]).collect(),
            params,
            ensemble_seed,
            truncation,
        })
    }
}

/// Evaluates `U` on every node of `spec`, in parallel over spatial nodes.
pub fn grid_field(ens: &LePageEnsemble, spec: &GridSpec, params: &ModelParams) -> Result<FieldGrid> {
    spec.validate()?;
    let series = WaveSeries::new(ens, params)?;
    let xs = spec.points();
    let ts = spec.times();
    let values: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|x| ts.iter().map(|&t| series.u(x, t)).collect::<Vec<_>>())
        .collect();
    Ok(FieldGrid {
        xs,
        ts,
        values,
        params: *params,
        ensemble_seed: ens.seed(),
        truncation: ens.truncation(),
    })
}
