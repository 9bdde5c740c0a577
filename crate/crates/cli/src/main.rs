//! `gauge-frontier` command-line front end.
//!
//! Exit codes: 0 success (including inconclusive verdicts), 1 verification
//! failure, 2 usage or validation error.

mod config;
mod output;
mod parse;
mod run;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gauge_frontier::{ChannelKind, ChannelSpec, RhoGrid};

use config::{ClassifyCmd, Command, CutoffCmd, DistCmd, DmtCmd, Format, FrontierCmd, PackCmd, RunConfig, SimulateCmd, SzegoCmd};

/// Environment variable capping the worker count.
const THREADS_VAR: &str = "GAUGE_FRONTIER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gauge-frontier", version, about = "Bhattacharyya packing, frontiers and gauge classification for fading channels")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Log-spaced SNR grid `start:stop:points[:geom]`, in decades.
    #[arg(long, global = true)]
    rho_grid: Option<String>,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    quiet: bool,
    /// Replay a config file or the header of a previous output.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Divergence between two laws.
    Dist(DistCmd),
    /// Packing number bounds at a threshold.
    Pack {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        args: PackCmd,
    },
    /// Diversity frontier bounds for a codebook size or multiplexing gain.
    Frontier {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        args: FrontierCmd,
    },
    /// Same-gauge / cross-gauge classification of the tradeoff.
    Classify {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        args: ClassifyCmd,
    },
    /// Monte Carlo ML decoding against the union bound.
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        args: SimulateCmd,
    },
    /// Union-bound vs optimal diversity-multiplexing table.
    Dmt(DmtCmd),
    /// Szegő integral and the fractional-log on-off pair distance.
    Szego(SzegoCmd),
    /// Cutoff rate of a codebook.
    Cutoff {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        args: CutoffCmd,
    },
}

#[derive(Debug, Clone, Args)]
struct SpecArgs {
    /// Channel class: fixed-h, coherent-mimo, block-fading, fast-fading, multipath, frac-log.
    #[arg(long)]
    kind: Option<String>,
    /// Transmit antennas.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Receive antennas.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Block length.
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// SNR (linear). Defaults to the first grid point when a grid is given.
    #[arg(long)]
    rho: Option<f64>,
    /// Fixed channel matrix (N x M), rows split by `;`.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c_beta: Option<f64>,
    /// Multipath tap powers.
    #[arg(long, value_delimiter = ',')]
    taps: Option<Vec<f64>>,
    /// Channel spec as a JSON file; overrides the flags above.
    #[arg(long)]
    spec_file: Option<PathBuf>,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<gauge_frontier::Error> for Failure {
    fn from(e: gauge_frontier::Error) -> Self {
        use gauge_frontier::Error::*;
        let code = match e {
            Quadrature(_) | Sandwich { .. } => 1,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

fn resolve_spec(args: &SpecArgs, grid: Option<&str>) -> Result<ChannelSpec, Failure> {
    if let Some(path) = &args.spec_file {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let value = value.get("spec").cloned().unwrap_or(value);
        let spec: ChannelSpec =
            serde_json::from_value(value).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        return Ok(spec);
    }
    let kind = parse::kind(args.kind.as_deref().ok_or_else(|| Failure::usage("--kind (or --spec-file) is required"))?)
        .map_err(Failure::usage)?;
    let rho = match (args.rho, grid) {
        (Some(r), _) => r,
        (None, Some(g)) => RhoGrid::parse(g)?.points()[0].linear(),
        (None, None) => return Err(Failure::usage("--rho is required without --rho-grid")),
    };
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Failure::usage(format!("{flag} is required for {kind}")));
    let spec = match kind {
        ChannelKind::FastFading => ChannelSpec::fast_fading(args.n, rho)?,
        ChannelKind::Multipath => {
            let taps = args.taps.clone().ok_or_else(|| Failure::usage("--taps is required for Multipath"))?;
            ChannelSpec::multipath(taps, args.n, rho)?
        }
        ChannelKind::FixedH => {
            let text = args.h.as_deref().ok_or_else(|| Failure::usage("--h is required for FixedH"))?;
            let h = parse::matrix(text)
                .map_err(Failure::usage)?
                .unwrap_or_else(|| gauge_frontier::linalg::CMatrix::identity(args.n, args.m));
            ChannelSpec::fixed_h(&h, args.t, rho)?
        }
        ChannelKind::CoherentMIMO => ChannelSpec::coherent_mimo(args.m, args.n, args.t, rho)?,
        ChannelKind::BlockFading => ChannelSpec::block_fading(args.m, args.n, args.t, rho)?,
        ChannelKind::FracLog => {
            ChannelSpec::frac_log(need(args.beta, "--beta")?, need(args.c_beta, "--c-beta")?, args.n, args.t, rho)?
        }
    };
    Ok(spec)
}

fn read_codebook(path: &Option<PathBuf>) -> Result<Option<Vec<gauge_frontier::InputPoint>>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    // Accept a bare list or a packing result with a certificate.
    let list = value.pointer("/result/certificate").or_else(|| value.get("certificate")).cloned().unwrap_or(value);
    serde_json::from_value(list).map(Some).map_err(|e| Failure::usage(format!("{}: not a codebook: {e}", path.display())))
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    if let Some(path) = &cli.config {
        if cli.command.is_some() {
            return Err(Failure::usage("--config replays a run; do not also give a subcommand"));
        }
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        return config::extract(&text).map_err(Failure::usage);
    }
    let sub = cli.command.as_ref().ok_or_else(|| Failure::usage("a subcommand or --config is required (see --help)"))?;
    let grid = cli.rho_grid.as_deref();
    let (spec, command) = match sub {
        Sub::Dist(a) => (None, Command::Dist(a.clone())),
        Sub::Dmt(a) => (None, Command::Dmt(a.clone())),
        Sub::Szego(a) => (None, Command::Szego(a.clone())),
        Sub::Pack { spec, args } => (Some(resolve_spec(spec, grid)?), Command::Pack(args.clone())),
        Sub::Frontier { spec, args } => (Some(resolve_spec(spec, grid)?), Command::Frontier(args.clone())),
        Sub::Classify { spec, args } => {
            let grid = grid.or(Some(run::CLASSIFY_GRID));
            (Some(resolve_spec(spec, grid)?), Command::Classify(args.clone()))
        }
        Sub::Simulate { spec, args } => {
            let mut args = args.clone();
            args.codebook_points = read_codebook(&args.codebook)?;
            args.codebook = None;
            (Some(resolve_spec(spec, grid)?), Command::Simulate(args))
        }
        Sub::Cutoff { spec, args } => {
            let mut args = args.clone();
            args.codebook_points = read_codebook(&args.codebook)?;
            args.codebook = None;
            (Some(resolve_spec(spec, grid)?), Command::Cutoff(args))
        }
    };
    Ok(RunConfig { seed: cli.seed, format: cli.format, rho_grid: cli.rho_grid.clone(), spec, command })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot size the worker pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn execute(cli: &Cli) -> Result<Option<String>, Failure> {
    configure_threads()?;
    let cfg = resolve(cli)?;
    let report = run::run(&cfg)?;
    let config_json = serde_json::to_value(&cfg).expect("config serializes");
    let text = match cfg.format {
        Format::Json => output::render_json(&config_json, &report.json),
        Format::Csv => output::render_csv(&config_json, &report.table),
    };
    match &cli.out {
        Some(path) => fs::write(path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::usage(e.to_string()))?;
        }
    }
    if !cli.quiet {
        eprintln!("{}: {}", cfg.command.name(), report.summary);
    }
    Ok(report.failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(reason)) => {
            eprintln!("verification failed: {reason}");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
