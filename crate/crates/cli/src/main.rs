use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use stablewave::runner::{self, parse_config_text, Command, RunConfig};
use stablewave::Error;

/// Simulate the 3-D wave equation driven by coloured SαS noise.
///
/// Every run writes a content-addressed artifact, a JSON sidecar that
/// reproduces it (pass it back with --config), and a timing file.
#[derive(Debug, Parser)]
#[command(name = "stablewave", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Write one LePage ensemble (Γ_k, ξ_k, g_k) as CSV.
    Ensemble(Opts),
    /// Estimate ‖M(A)‖_α^α / λ(A) for a cube of the given volume.
    Isometry(Opts),
    /// Write replicate samples of M(A) for a cube of the given volume.
    Measure(Opts),
    /// Evaluate Z^H at the spatial nodes of the grid.
    Field(Opts),
    /// Evaluate U on the space-time grid.
    Wave(Opts),
    /// Fit temporal Hölder exponents of U at (1, 1, 1).
    Holder(Opts),
    /// Weak-formulation residuals at 16⁴ and 32⁴ quadrature nodes.
    Weaksol(Opts),
    /// Compare ∫₀¹ V ds with U at (1, 1, 1), t = 1.
    Abscont(Opts),
}

#[derive(Debug, Args)]
struct Opts {
    /// Config file: `key = value` lines or a JSON sidecar. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stability index α in (1, 2).
    #[arg(long)]
    alpha: Option<String>,
    /// Hurst index H in (1/2, 1).
    #[arg(long)]
    hurst: Option<String>,
    /// Tuning exponent η of the auxiliary density.
    #[arg(long)]
    eta: Option<String>,
    /// Wave speed a.
    #[arg(long)]
    speed: Option<String>,
    /// Truncation K of the LePage series.
    #[arg(long)]
    terms: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Number of independent ensembles.
    #[arg(long, visible_alias = "ensembles")]
    replicates: Option<String>,
    /// Lattice `N1xN2xN3xNt` over [-1, 1]³ × [0, 1].
    #[arg(long)]
    grid: Option<String>,
    /// Volume of the cube [0, v^(1/3)]³.
    #[arg(long)]
    volume: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Output directory [default: runs].
    #[arg(long, env = "STABLEWAVE_OUTPUT")]
    output: Option<PathBuf>,
}

impl Sub {
    fn split(&self) -> (Command, &Opts) {
        match self {
            Sub::Ensemble(o) => (Command::Ensemble, o),
            Sub::Isometry(o) => (Command::Isometry, o),
            Sub::Measure(o) => (Command::Measure, o),
            Sub::Field(o) => (Command::Field, o),
            Sub::Wave(o) => (Command::Wave, o),
            Sub::Holder(o) => (Command::Holder, o),
            Sub::Weaksol(o) => (Command::Weaksol, o),
            Sub::Abscont(o) => (Command::Abscont, o),
        }
    }
}

fn build_config(command: Command, opts: &Opts) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::defaults(command, "runs");
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let pairs = parse_config_text(&text).with_context(|| format!("in {}", path.display()))?;
        config
            .apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
            .with_context(|| format!("in {}", path.display()))?;
    }
    let flags = [
        ("alpha", &opts.alpha),
        ("hurst", &opts.hurst),
        ("eta", &opts.eta),
        ("speed", &opts.speed),
        ("terms", &opts.terms),
        ("seed", &opts.seed),
        ("replicates", &opts.replicates),
        ("grid", &opts.grid),
        ("volume", &opts.volume),
        ("threads", &opts.threads),
    ];
    config.apply(flags.iter().filter_map(|(k, v)| v.as_deref().map(|v| (*k, v))))?;
    if let Some(dir) = &opts.output {
        config.output_dir = dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn is_usage_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(
            e.downcast_ref::<Error>(),
            Some(Error::Parse(_) | Error::Invalid(_) | Error::Domain { .. } | Error::Json(_))
        )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = cli.command.split();
    let config = match build_config(command, opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("stablewave: {e:#}");
            return ExitCode::from(if is_usage_error(&e) { 2 } else { 1 });
        }
    };
    match runner::run(&config) {
        Ok(out) => {
            println!("{}", out.summary);
            println!("artifact: {}", out.artifact.display());
            println!("config:   {}", out.sidecar.display());
            println!("timing:   {}", out.timing.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stablewave: {e}");
            ExitCode::FAILURE
        }
    }
}
