//! Reproducible, seed-pinned runs that write CSV/JSON artifacts.
//!
//! A run is described by a [`RunConfig`]. Its canonical form, the JSON
//! sidecar, is also a valid config file, and the artifact names are derived
//! from a SHA-256 digest of the configuration, so identical configurations
//! always produce identically named, byte-identical files.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimate::{estimate_alpha, estimate_scale, StableSampleSet};
use crate::experiments::{self, Design, HolderSetup};
use crate::field::zh_point;
use crate::grid::{grid_field, GridSpec};
use crate::params::ModelParams;
use crate::region::RegionSpec;
use crate::wave::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Ensemble,
    Isometry,
    Measure,
    Field,
    Wave,
    Holder,
    Weaksol,
    Abscont,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Ensemble,
        Command::Isometry,
        Command::Measure,
        Command::Field,
        Command::Wave,
        Command::Holder,
        Command::Weaksol,
        Command::Abscont,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ensemble => "ensemble",
            Command::Isometry => "isometry",
            Command::Measure => "measure",
            Command::Field => "field",
            Command::Wave => "wave",
            Command::Holder => "holder",
            Command::Weaksol => "weaksol",
            Command::Abscont => "abscont",
        }
    }

    /// Replicate count used when none is given.
    pub fn default_replicates(self) -> usize {
        match self {
            Command::Isometry | Command::Measure => 10_000,
            Command::Holder | Command::Weaksol | Command::Abscont => 20,
            Command::Ensemble | Command::Field | Command::Wave => 1,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Command::Holder => "json",
            _ => "csv",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown command `{s}`")))
    }
}

/// Everything that determines a run's artifacts, plus where to put them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub seed: u64,
    pub terms: usize,
    pub replicates: usize,
    pub grid: GridSpec,
    /// Volume of the cube `[0, v^{1/3}]³` used by `isometry` and `measure`.
    pub volume: f64,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
}

/// Experiment keys accepted in config files.
pub const CONFIG_KEYS: [&str; 10] = [
    "command", "alpha", "hurst", "eta", "speed", "terms", "seed", "replicates", "grid", "volume",
];

/// Keys that configure the host rather than the experiment; accepted in
/// config files but never written to the sidecar.
pub const HOST_KEYS: [&str; 2] = ["output", "threads"];

/// Informational sidecar keys, ignored when the sidecar is read back.
pub const INFO_KEYS: [&str; 2] = ["version", "artifact"];

impl RunConfig {
    /// Defaults for `command`, writing to `output_dir`.
    pub fn defaults(command: Command, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            command,
            params: ModelParams::default(),
            seed: 0,
            terms: 10_000,
            replicates: command.default_replicates(),
            grid: GridSpec::default(),
            volume: 1.0,
            output_dir: output_dir.into(),
            threads: None,
        }
    }

    /// Applies `key = value` settings in order; later settings win.
    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        let mut params = self.params;
        for (key, value) in pairs {
            let value = value.trim();
            match key.trim() {
                "command" => {
                    let c: Command = value.parse()?;
                    if c != self.command {
                        return Err(Error::Invalid(format!(
                            "config is for `{c}`, but the command is `{}`",
                            self.command
                        )));
                    }
                }
                "alpha" => params.alpha = number(key, value)?,
                "hurst" => params.hurst = number(key, value)?,
                "eta" => params.eta = number(key, value)?,
                "speed" => params.wave_speed = number(key, value)?,
                "terms" => self.terms = number(key, value)?,
                "seed" => self.seed = number(key, value)?,
                "replicates" | "ensembles" => self.replicates = number(key, value)?,
                "grid" => self.grid = value.parse()?,
                "volume" => self.volume = number(key, value)?,
                "output" => self.output_dir = PathBuf::from(value),
                "threads" => self.threads = Some(number(key, value)?),
                k if INFO_KEYS.contains(&k) => {}
                other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
            }
        }
        self.params = params;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        crate::error::check_domain("terms", self.terms as f64, "[1, inf)", self.terms >= 1)?;
        crate::error::check_domain("replicates", self.replicates as f64, "[1, inf)", self.replicates >= 1)?;
        crate::error::check_domain("volume", self.volume, "(0, inf)", self.volume > 0.0)?;
        if let Some(t) = self.threads {
            crate::error::check_domain("threads", t as f64, "[1, inf)", t >= 1)?;
        }
        self.grid.validate()?;
        match self.command {
            Command::Isometry | Command::Measure if self.replicates < 2 => {
                Err(Error::Invalid(format!("`{}` needs at least 2 replicates", self.command)))
            }
            Command::Abscont if self.params.hurst <= 2.0 / 3.0 => Err(Error::Domain {
                name: "hurst",
                value: self.params.hurst,
                domain: "(2/3, 1) for abscont",
            }),
            _ => Ok(()),
        }
    }

    /// The experiment-defining settings as `(key, value)` pairs in
    /// [`CONFIG_KEYS`] order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        vec![
            ("command", self.command.to_string()),
            ("alpha", format!("{:?}", p.alpha)),
            ("hurst", format!("{:?}", p.hurst)),
            ("eta", format!("{:?}", p.eta)),
            ("speed", format!("{:?}", p.wave_speed)),
            ("terms", self.terms.to_string()),
            ("seed", self.seed.to_string()),
            ("replicates", self.replicates.to_string()),
            ("grid", self.grid.to_string()),
            ("volume", format!("{:?}", self.volume)),
        ]
    }

    fn design(&self) -> Result<Design> {
        Design::new(self.params, self.terms, self.replicates, self.seed)
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{value}`")))
}

/// Parses a config file: either a flat JSON object (such as a sidecar) or
/// `key = value` lines, where `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    if text.trim_start().starts_with('{') {
        let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)?;
        return map
            .into_iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => Ok((k, s)),
                serde_json::Value::Number(n) => Ok((k, n.to_string())),
                other => Err(Error::Parse(format!("`{k}`: expected a string or number, found {other}"))),
            })
            .collect();
    }
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`, found `{raw}`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Paths and console summary of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub artifact: PathBuf,
    pub sidecar: PathBuf,
    pub timing: PathBuf,
    pub summary: String,
}

/// Canonical sidecar text for a config and artifact name.
pub fn sidecar_json(config: &RunConfig, artifact: &str) -> String {
    let mut map = BTreeMap::new();
    for (k, v) in config.pairs() {
        let value = match k {
            "command" | "grid" => serde_json::Value::String(v),
            _ => serde_json::from_str(&v).unwrap_or(serde_json::Value::String(v)),
        };
        map.insert(k.to_string(), value);
    }
    map.insert("version".into(), serde_json::Value::String(env!("CARGO_PKG_VERSION").into()));
    map.insert("artifact".into(), serde_json::Value::String(artifact.into()));
    let mut text = serde_json::to_string_pretty(&map).expect("string map serializes");
    text.push('\n');
    text
}

/// Stem shared by a run's files: `<command>-<first 16 hex digits of the
/// SHA-256 of the config pairs>`.
pub fn artifact_stem(config: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    for (k, v) in config.pairs() {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    let digest = h.finalize();
    let mut hex = String::with_capacity(16);
    for b in &digest[..8] {
        let _ = write!(hex, "{b:02x}");
    }
    format!("{}-{hex}", config.command)
}

/// Runs the experiment named by `config.command` and writes its artifacts.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start thread pool: {e}")))?;
    let started = Instant::now();
    let (bytes, summary) = pool.install(|| execute(config))?;
    let elapsed = started.elapsed().as_secs_f64();

    fs::create_dir_all(&config.output_dir)?;
    let stem = artifact_stem(config);
    let artifact_name = format!("{stem}.{}", config.command.extension());
    let artifact = config.output_dir.join(&artifact_name);
    let sidecar = config.output_dir.join(format!("{stem}.config.json"));
    write_once(&artifact, &bytes)?;
    write_once(&sidecar, sidecar_json(config, &artifact_name).as_bytes())?;

    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    let timing = config.output_dir.join(format!("{stem}.timing-{stamp}.json"));
    let timing_text = serde_json::json!({
        "artifact": artifact_name,
        "seconds": elapsed,
        "threads": pool.current_num_threads(),
    });
    fs::write(&timing, format!("{timing_text}\n"))?;

    Ok(RunOutcome {
        artifact,
        sidecar,
        timing,
        summary,
    })
}

/// Writes a content-addressed file. An existing file is left untouched if
/// it already holds these bytes, and is an error otherwise.
fn write_once(path: &Path, bytes: &[u8]) -> Result<()> {
    match fs::read(path) {
        Ok(existing) if existing == bytes => Ok(()),
        Ok(_) => Err(Error::Invalid(format!(
            "{} exists with different contents; refusing to overwrite",
            path.display()
        ))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let tmp = path.with_extension("partial");
            {
                let mut f = fs::File::create(&tmp)?;
                f.write_all(bytes)?;
                f.sync_all()?;
            }
            fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn execute(config: &RunConfig) -> Result<(Vec<u8>, String)> {
    let design = config.design()?;
    let p = &config.params;
    let mut out = Vec::new();
    let summary = match config.command {
        Command::Ensemble => {
            let ens = design.ensemble(0)?;
            ens.write_csv(&mut out)?;
            format!("ensemble of {} terms (alpha = {}, eta = {})", ens.truncation(), p.alpha, p.eta)
        }
        Command::Measure | Command::Isometry => {
            let cube = RegionSpec::cube_of_volume(config.volume)?;
            let values = experiments::measure_replicates(&design, &[cube])?.remove(0);
            let set = StableSampleSet::new(values, p.alpha)?;
            let scale_alpha = estimate_scale(&set, p.alpha)?.powf(p.alpha);
            if config.command == Command::Measure {
                set.write_csv(&mut out)?;
                format!("{} samples of M(A), volume {}", set.len(), config.volume)
            } else {
                let alpha_hat = estimate_alpha(&set)?;
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(["volume", "scale_alpha", "ratio", "alpha_hat"])?;
                w.write_record([
                    format!("{:?}", config.volume),
                    format!("{scale_alpha:?}"),
                    format!("{:?}", scale_alpha / config.volume),
                    format!("{alpha_hat:?}"),
                ])?;
                w.flush()?;
                drop(w);
                format!(
                    "estimated ||M(A)||_alpha^alpha = {scale_alpha:.4} for volume {} (ratio {:.4}); alpha_hat = {alpha_hat:.4}",
                    config.volume,
                    scale_alpha / config.volume
                )
            }
        }
        Command::Field => {
            let ens = design.ensemble(0)?;
            let points = config.grid.points();
            let values: Vec<f64> = points.par_iter().map(|x| zh_point(&ens, x, p)).collect::<Result<_>>()?;
            writeln!(
                out,
                "# seed={},K={},alpha={:?},H={:?},eta={:?}",
                ens.seed(),
                ens.truncation(),
                p.alpha,
                p.hurst,
                p.eta
            )?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["x1", "x2", "x3", "Z"])?;
            for (x, z) in points.iter().zip(&values) {
                w.write_record([
                    format!("{:?}", x[0]),
                    format!("{:?}", x[1]),
                    format!("{:?}", x[2]),
                    format!("{z:?}"),
                ])?;
            }
            w.flush()?;
            drop(w);
            format!("Z^H at {} points", points.len())
        }
        Command::Wave => {
            let ens = design.ensemble(0)?;
            let grid = grid_field(&ens, &config.grid, p)?;
            grid.write_csv(&mut out)?;
            let max = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            format!(
                "U on a {} grid ({} nodes); max |U| = {max:.4e}",
                config.grid,
                grid.values.len()
            )
        }
        Command::Holder => {
            let summary = experiments::holder_exponents(&design, &HolderSetup::default())?;
            serde_json::to_writer_pretty(&mut out, &summary)?;
            out.push(b'\n');
            format!(
                "mean temporal Holder exponent over {} ensembles: {:.4} (target {:.4})",
                summary.exponents.len(),
                summary.mean_exponent,
                p.holder_target()
            )
        }
        Command::Weaksol => {
            let theta = default_test_function();
            let rows = experiments::weak_refinement(&design, &theta, 16, 32)?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["replicate", "nodes", "lhs", "rhs", "residual"])?;
            let mut decreasing = 0;
            for (i, (c, f)) in rows.iter().enumerate() {
                for (n, r) in [(16, c), (32, f)] {
                    w.write_record([
                        i.to_string(),
                        n.to_string(),
                        format!("{:?}", r.lhs),
                        format!("{:?}", r.rhs),
                        format!("{:?}", r.residual),
                    ])?;
                }
                decreasing += usize::from(f.residual < c.residual);
            }
            w.flush()?;
            drop(w);
            format!("residual decreased from 16^4 to 32^4 nodes on {decreasing} of {} ensembles", rows.len())
        }
        Command::Abscont => {
            let rows = experiments::absolute_continuity(&design, [1.0; 3], 1.0, 64)?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["replicate", "integral", "u", "difference"])?;
            for (i, r) in rows.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    format!("{:?}", r.integral),
                    format!("{:?}", r.u),
                    format!("{:?}", r.difference),
                ])?;
            }
            w.flush()?;
            drop(w);
            let worst = rows
                .iter()
                .map(|r| r.difference / r.u.abs().max(1.0))
                .fold(0.0f64, f64::max);
            format!("largest |int V - U| / max(1, |U|) over {} ensembles: {worst:.3e}", rows.len())
        }
    };
    Ok((out, summary))
}

/// The product bump used by `weaksol`: centered at `(½, ½, ½, 1)` with all
/// radii `½`.
pub fn default_test_function() -> TestFunction {
    TestFunction::new([0.5, 0.5, 0.5, 1.0], [0.5; 4], 1.0).expect("valid constants")
}
