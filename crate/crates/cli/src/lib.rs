//! Command implementations behind the `nqp` binary.
//!
//! Every command returns an [`Artifact`] (file text plus an optional JSON
//! sidecar and any raised flags) so that tests can run commands without
//! touching the filesystem.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};

use nqp_core::bounds::Source;
use nqp_core::certify::certify_state_detailed;
use nqp_core::io::{self, Provenance};
use nqp_core::{
    bounds_table, critical_table, quasiprobability_grid, witness_coefficients, BoundsConfig,
    BoundsTable, GridSpec, SearchSpec, StateDescriptor,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Settings read from `--config FILE.toml`; command-line flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub bounds: BoundsConfig,
    pub search: SearchSpec,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.bounds.genetic.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nqp",
    version,
    about = "Nonclassicality quasiprobabilities, bounds and certificates"
)]
pub struct Cli {
    /// Worker threads (falls back to NQP_THREADS, then all cores).
    #[arg(long, global = true, env = "NQP_THREADS")]
    pub threads: Option<usize>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Witness coefficients c_{w,n} for n = 0..=n_max.
    Coeffs(CoeffsArgs),
    /// P_w on a rectangular grid.
    Quasiprob(QuasiprobArgs),
    /// Bounds over M_1..M_r and the Gaussian hull for a range of w.
    Bounds(BoundsArgs),
    /// Transition points of the extremal Fock states.
    Table1(Table1Args),
    /// Certificate for a state from a bounds file.
    Certify(CertifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub w: f64,
    #[arg(long)]
    pub n_max: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuasiprobArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub w: f64,
    /// RE_MIN:RE_MAX:IM_MIN:IM_MAX
    #[arg(long, allow_hyphen_values = true, default_value = "-3:3:-3:3")]
    pub rect: String,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Witness spectrum length; sized from the state and grid when absent.
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// `LO:HI:STEP`, a comma list, or a single value.
    #[arg(long)]
    pub w: String,
    #[arg(long, default_value_t = 6)]
    pub r_max: usize,
    /// Skip the Gaussian-hull bounds.
    #[arg(long)]
    pub no_gaussian: bool,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Also write the full table as JSON (loadable by `certify`).
    #[arg(long)]
    pub save_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Table1Args {
    #[arg(long, default_value_t = 1.001)]
    pub w_lo: f64,
    #[arg(long, default_value_t = 2.7)]
    pub w_hi: f64,
    /// Keep the rows below the onset of the vacuum / single-photon regime.
    #[arg(long)]
    pub all_rows: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub w: f64,
    /// Bounds table written by `bounds --format json` or `--save-table`.
    #[arg(long)]
    pub bounds: PathBuf,
    /// Search rectangle; chosen from the state when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,
    #[arg(long)]
    pub step: Option<f64>,
}

/// Output of one command.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Artifact {
    pub text: String,
    /// JSON written next to the main file, with extension `.json`.
    pub sidecar: Option<String>,
    /// Extra files requested by the command.
    pub extra: Vec<(PathBuf, String)>,
    /// Conditions that make the run exit non-zero.
    pub flags: Vec<String>,
}

/// Inclusive `w` grid from `LO:HI:STEP`, `a,b,c` or a single value.
pub fn parse_w_list(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .with_context(|| format!("bad number {s:?} in {spec:?}"))?;
        if v <= 0.0 || !v.is_finite() {
            bail!("w must be positive and finite, got {v}");
        }
        Ok(v)
    };
    match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if hi < lo {
                bail!("empty w range {spec:?}");
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            // round to the step's decimal grid so 1.2 + 4·0.05 prints as 1.4
            Ok((0..=n)
                .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => bail!("expected LO:HI:STEP or a comma list, got {spec:?}"),
    }
}

pub fn parse_rect(spec: &str, step: f64) -> Result<GridSpec> {
    let v: Vec<f64> = spec
        .split(':')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {s:?} in rect {spec:?}"))
        })
        .collect::<Result<_>>()?;
    let [re_min, re_max, im_min, im_max] = v[..] else {
        bail!("rect needs RE_MIN:RE_MAX:IM_MIN:IM_MAX, got {spec:?}");
    };
    let g = GridSpec {
        re_min,
        re_max,
        im_min,
        im_max,
        step,
    };
    g.validate()?;
    Ok(g)
}

fn parse_state(spec: &str) -> Result<StateDescriptor> {
    spec.parse::<StateDescriptor>()
        .with_context(|| format!("state descriptor {spec:?}"))
}

fn seed_of(cli_seed: Option<u64>, cfg: &RunConfig) -> u64 {
    cli_seed.or(cfg.seed).unwrap_or(cfg.bounds.genetic.seed)
}

pub fn cmd_coeffs(args: &CoeffsArgs, format: Format, seed: u64) -> Result<Artifact> {
    let s = witness_coefficients(args.w, args.n_max)?;
    let prov = Provenance::new("coeffs", seed, serde_json::to_value(args)?);
    let text = match format {
        Format::Csv => io::coefficients_csv(&s, &prov),
        Format::Json => {
            serde_json::to_string_pretty(&json!({
                "provenance": prov,
                "w": args.w,
                "coefficients": s.coefficients(),
                "error_estimates": s.error_estimates(),
            }))? + "\n"
        }
    };
    Ok(Artifact {
        text,
        ..Artifact::default()
    })
}

/// Spectrum length that covers `state` displaced to any grid point.
fn grid_cutoff(support: usize, g: &GridSpec) -> usize {
    let corner = [
        g.re_min.abs().max(g.re_max.abs()),
        g.im_min.abs().max(g.im_max.abs()),
    ];
    let r = corner[0].hypot(corner[1]);
    support + nqp_core::witness::displacement_headroom(support, Complex64::new(r, 0.0)) + 8
}

pub fn cmd_quasiprob(args: &QuasiprobArgs, format: Format, seed: u64) -> Result<Artifact> {
    let desc = parse_state(&args.state)?;
    let state = desc.build()?;
    let spec = parse_rect(&args.rect, args.step)?;
    let cutoff = args
        .cutoff
        .unwrap_or_else(|| grid_cutoff(state.support(), &spec));
    let s = witness_coefficients(args.w, cutoff)?;
    let grid = quasiprobability_grid(&state, &s, &spec)?;
    let mut params = serde_json::to_value(args)?;
    params["state"] = json!(desc.to_string());
    params["cutoff"] = json!(cutoff);
    let prov = Provenance::new("quasiprob", seed, params);
    let sidecar = io::grid_sidecar(&grid, &prov)?;
    let (text, sidecar) = match format {
        Format::Csv => (io::grid_csv(&grid, &prov), Some(sidecar)),
        Format::Json => {
            let mut v: serde_json::Value = serde_json::from_str(&sidecar)?;
            v["values"] = json!(grid.values);
            (serde_json::to_string_pretty(&v)? + "\n", None)
        }
    };
    Ok(Artifact {
        text,
        sidecar,
        extra: Vec::new(),
        flags: grid.warnings.clone(),
    })
}

pub fn bounds_config(args: &BoundsArgs, cfg: &RunConfig, seed: u64) -> BoundsConfig {
    let mut b = cfg.bounds.clone();
    b.genetic.seed = seed;
    if let Some(p) = args.population {
        b.genetic.population = p;
    }
    if let Some(g) = args.generations {
        b.genetic.generations = g;
    }
    if let Some(r) = args.restarts {
        b.genetic.restarts = r;
    }
    if args.no_gaussian {
        b.include_gaussian = false;
    }
    b
}

pub fn cmd_bounds(
    args: &BoundsArgs,
    cfg: &RunConfig,
    format: Format,
    seed: u64,
) -> Result<Artifact> {
    let ws = parse_w_list(&args.w)?;
    let config = bounds_config(args, cfg, seed);
    let table = bounds_table(&ws, args.r_max, &config)?;
    let mut flags = Vec::new();
    for rec in &table.records {
        for e in [&rec.upper, &rec.lower] {
            if e.source == Source::Optimizer && !e.converged {
                flags.push(format!(
                    "w={} {} {}: local polish did not converge",
                    rec.w, rec.family, e.direction
                ));
            }
        }
    }
    let mut params = serde_json::to_value(args)?;
    params["w_values"] = json!(ws);
    params["config"] = serde_json::to_value(&config)?;
    let prov = Provenance::new("bounds", seed, params);
    let text = match format {
        Format::Csv => io::bounds_csv(&table, &prov),
        Format::Json => table.to_json()? + "\n",
    };
    let mut extra = Vec::new();
    if let Some(path) = &args.save_table {
        extra.push((path.clone(), table.to_json()? + "\n"));
    }
    Ok(Artifact {
        text,
        sidecar: None,
        extra,
        flags,
    })
}

pub fn cmd_table1(args: &Table1Args, format: Format, seed: u64) -> Result<Artifact> {
    let mut table = critical_table(args.w_lo, args.w_hi)?;
    if !args.all_rows {
        if let Some(onset) = table.onset {
            table.rows.retain(|r| r.w_max > onset + 1e-9);
        }
    }
    let prov = Provenance::new("table1", seed, serde_json::to_value(args)?);
    let text = match format {
        Format::Csv => io::critical_csv(&table, &prov),
        Format::Json => {
            serde_json::to_string_pretty(&json!({"provenance": prov, "table": table}))? + "\n"
        }
    };
    Ok(Artifact {
        text,
        ..Artifact::default()
    })
}

pub fn cmd_certify(args: &CertifyArgs, cfg: &RunConfig) -> Result<Artifact> {
    let desc = parse_state(&args.state)?;
    let state = desc.build()?;
    let table = BoundsTable::load(&args.bounds)
        .with_context(|| format!("loading bounds {}", args.bounds.display()))?;
    let mut search = cfg.search.clone();
    if let Some(step) = args.step {
        search.step = step;
    }
    if let Some(rect) = &args.rect {
        search.region = Some(parse_rect(rect, search.step)?);
    }
    let cert = certify_state_detailed(&desc.to_string(), &state, args.w, &table, &search)?;
    Ok(Artifact {
        text: cert.certificate.to_json()? + "\n",
        sidecar: None,
        extra: Vec::new(),
        flags: cert.warnings,
    })
}

/// Runs a parsed command line, returning the artifact and the output path.
pub fn run(cli: &Cli) -> Result<(Artifact, Option<PathBuf>)> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(cfg.threads);
    let format = cli.format.or(cfg.format).unwrap_or(Format::Csv);
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    let seed = seed_of(cli.seed, &cfg);
    let work = || -> Result<Artifact> {
        match &cli.command {
            Command::Coeffs(a) => cmd_coeffs(a, format, seed),
            Command::Quasiprob(a) => cmd_quasiprob(a, format, seed),
            Command::Bounds(a) => cmd_bounds(a, &cfg, format, seed),
            Command::Table1(a) => cmd_table1(a, format, seed),
            Command::Certify(a) => cmd_certify(a, &cfg),
        }
    };
    let artifact = match threads {
        Some(n) => {
            if n == 0 {
                bail!("--threads must be at least 1");
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()?
                .install(work)?
        }
        None => work()?,
    };
    Ok((artifact, out))
}

/// Writes the artifact to `out` (sidecar next to it) or to stdout.
pub fn emit(artifact: &Artifact, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, &artifact.text)
                .with_context(|| format!("writing {}", path.display()))?;
            if let Some(side) = &artifact.sidecar {
                let side_path = path.with_extension("json");
                if side_path != path {
                    std::fs::write(&side_path, side)?;
                }
            }
        }
        None => print!("{}", artifact.text),
    }
    for (path, text) in &artifact.extra {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
