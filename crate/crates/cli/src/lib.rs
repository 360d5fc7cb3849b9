//! Command-line pipelines over `htype_core`: each command computes a report,
//! writes optional CSV and JSON artifacts and states whether its pass
//! criteria hold.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use htype_core::analysis::{
    fit_decay, geometric_grid, sharpness_profile, sup_norm_scan_with, theta_theory, DecayFit,
    ScanConfig,
};
use htype_core::frame::{annular, build_frame, check_frame, psi};
use htype_core::group::{parse_builtin, GroupSpec, HTypeGroup};
use htype_core::kernel::{eval_kernel, Scale};
use htype_core::special::{bessel_j, check_bessel_properties, check_laguerre_bound};
use htype_core::symbols::{default_hypothesis_grid, verify_hypotheses, PhaseSymbol};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Exit code for a completed run whose pass criteria failed or for a
/// numerical failure.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "htype", version, about = "Dispersive kernels on H-type groups")]
pub struct Cli {
    /// Numerical tolerance (kernel series target, or scan accuracy).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Directory for summary.json and relative CSV paths.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Seed for scan grid jitter; omitted means no jitter.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group construction and checks.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Special-function checks.
    #[command(subcommand)]
    Specfn(SpecfnCmd),
    /// Littlewood-Paley frame checks.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Phase-symbol hypothesis checks.
    #[command(subcommand)]
    Symbol(SymbolCmd),
    /// Kernel evaluation.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Decay and sharpness analysis.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Run an experiment described by a JSON config.
    Run { config: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GroupCmd {
    /// Validate generators given as `builtin:pN[:dM]` or a JSON group file.
    Validate { group: String },
    /// Print the JSON spec of a group.
    Export { group: String },
}

#[derive(Debug, Subcommand)]
pub enum SpecfnCmd {
    CheckLaguerre {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m_max: usize,
        /// Largest power of τ d/dτ (defaults to d).
        #[arg(long)]
        beta_max: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    CheckBessel {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FrameCmd {
    Check {
        /// CSV samples of Ψ and R on [0, 8].
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SymbolCmd {
    Verify {
        #[arg(long)]
        name: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum KernelCmd {
    Eval(KernelEvalArgs),
}

#[derive(Debug, Args)]
pub struct KernelEvalArgs {
    #[arg(long, default_value = "builtin:p3")]
    pub group: String,
    #[arg(long)]
    pub symbol: String,
    /// Band index, or `lowpass[:k]`.
    #[arg(long, allow_hyphen_values = true)]
    pub j: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho_z: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho_s: f64,
    /// Emit the full sample as JSON (the summary is JSON either way).
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    Decay(DecayArgs),
    Sharpness(SharpnessArgs),
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long, default_value = "fractional:0.5")]
    pub symbol: String,
    #[arg(long, default_value = "builtin:p3")]
    pub group: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub j: String,
    #[arg(long, default_value_t = 10.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    /// Fit a CSV of (t, sup) samples instead of scanning.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub symbol: String,
    #[arg(long, default_value = "builtin:p3")]
    pub group: String,
    #[arg(long, default_value_t = 100.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 10_000.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 17)]
    pub points: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Geometric time grid of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Reproducible experiment description read by `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// One of group-validate, specfn-check, frame-check, symbol-verify,
    /// kernel-eval, analyze-decay, analyze-sharpness.
    pub pipeline: String,
    #[serde(default = "default_group")]
    pub group: String,
    #[serde(default = "default_symbol")]
    pub symbol: String,
    #[serde(default = "default_scales")]
    pub j: Vec<String>,
    #[serde(default = "default_grid")]
    pub t_grid: TimeGrid,
    #[serde(default)]
    pub rho_z: f64,
    #[serde(default)]
    pub rho_s: f64,
    pub tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: usize,
    pub seed: Option<u64>,
}

fn default_group() -> String {
    "builtin:p3".into()
}
fn default_symbol() -> String {
    "fractional:0.5".into()
}
fn default_scales() -> Vec<String> {
    vec!["0".into()]
}
fn default_grid() -> TimeGrid {
    TimeGrid {
        min: 10.0,
        max: 1000.0,
        points: 8,
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        let g = &self.t_grid;
        if !(g.min > 0.0 && g.max > g.min && g.points >= 2) {
            bail!("t grid must be positive and increasing, got {g:?}");
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                bail!("tolerance must be positive, got {tol}");
            }
        }
        if !self.group.starts_with("builtin:") && !Path::new(&self.group).exists() {
            bail!("group file {} does not exist", self.group);
        }
        if self.j.is_empty() {
            bail!("at least one scale is required");
        }
        Ok(())
    }
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Numeric(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_FAIL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "configuration error: {e:#}"),
            CliError::Numeric(e) => write!(f, "numerical failure: {e:#}"),
        }
    }
}

fn config<T>(r: anyhow::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Config)
}

fn numeric<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Numeric(e.into()))
}

/// Result of a pipeline: pass flag and JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: Value,
}

/// Shared settings from global flags or an experiment config.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunContext {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            series_rel: self.tol.unwrap_or(ScanConfig::default().series_rel),
            jitter_seed: self.seed,
            ..ScanConfig::default()
        }
    }
}

pub fn load_group(spec: &str) -> Result<HTypeGroup, CliError> {
    if spec.starts_with("builtin:") {
        return config(parse_builtin(spec).map_err(anyhow::Error::from));
    }
    let text = config(
        std::fs::read_to_string(spec).with_context(|| format!("reading group file {spec}")),
    )?;
    let gs: GroupSpec =
        config(serde_json::from_str(&text).with_context(|| format!("parsing group file {spec}")))?;
    config(HTypeGroup::from_spec(&gs).map_err(anyhow::Error::from))
}

fn load_symbol(name: &str) -> Result<PhaseSymbol, CliError> {
    config(name.parse::<PhaseSymbol>().map_err(anyhow::Error::from))
}

fn load_scale(j: &str) -> Result<Scale, CliError> {
    config(j.parse::<Scale>().map_err(anyhow::Error::from))
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            numeric(std::fs::create_dir_all(parent))?;
        }
    }
    let mut w = numeric(csv::Writer::from_path(path))?;
    numeric(w.write_record(header))?;
    for row in rows {
        numeric(w.write_record(row.iter().map(|v| v.to_string())))?;
    }
    numeric(w.flush())
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            numeric(std::fs::create_dir_all(parent))?;
        }
    }
    let text = numeric(serde_json::to_string_pretty(value))?;
    numeric(std::fs::write(path, text + "\n"))
}

fn sidecar(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    numeric(serde_json::to_value(v))
}

/// Runs a parsed command line.
pub fn run_cli(cli: &Cli) -> Result<Outcome, CliError> {
    let ctx = RunContext {
        tol: cli.tol,
        out_dir: cli.out_dir.clone(),
        seed: cli.seed,
    };
    if let Some(tol) = ctx.tol {
        if !(tol > 0.0) {
            return Err(CliError::Config(anyhow!(
                "tolerance must be positive, got {tol}"
            )));
        }
    }
    set_threads(cli.threads)?;
    let out = match &cli.command {
        Command::Group(GroupCmd::Validate { group }) => group_validate(group)?,
        Command::Group(GroupCmd::Export { group }) => {
            let g = load_group(group)?;
            Outcome {
                pass: true,
                summary: to_value(&g.to_spec())?,
            }
        }
        Command::Specfn(SpecfnCmd::CheckLaguerre {
            d,
            m_max,
            beta_max,
            csv,
        }) => check_laguerre(&ctx, *d, *m_max, beta_max.unwrap_or(*d), csv.as_deref())?,
        Command::Specfn(SpecfnCmd::CheckBessel { nu, csv }) => {
            check_bessel(&ctx, *nu, csv.as_deref())?
        }
        Command::Frame(FrameCmd::Check { csv }) => frame_check(&ctx, csv.as_deref())?,
        Command::Symbol(SymbolCmd::Verify { name, csv }) => {
            symbol_verify(&ctx, name, csv.as_deref())?
        }
        Command::Kernel(KernelCmd::Eval(a)) => {
            let g = load_group(&a.group)?;
            kernel_eval(&ctx, &g, &a.symbol, &a.j, a.t, a.rho_z, a.rho_s, a.json)?
        }
        Command::Analyze(AnalyzeCmd::Decay(a)) => analyze_decay(&ctx, a)?,
        Command::Analyze(AnalyzeCmd::Sharpness(a)) => analyze_sharpness(&ctx, a)?,
        Command::Run { config: path } => return run_config(path),
    };
    finish(&ctx, out)
}

fn finish(ctx: &RunContext, out: Outcome) -> Result<Outcome, CliError> {
    if let Some(dir) = &ctx.out_dir {
        write_json(&dir.join("summary.json"), &out.summary)?;
    }
    Ok(out)
}

fn set_threads(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Ok(());
    }
    // A second initialization in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Loads and runs an [`ExperimentConfig`].
pub fn run_config(path: &Path) -> Result<Outcome, CliError> {
    let text = config(
        std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display())),
    )?;
    let cfg: ExperimentConfig = config(
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display())),
    )?;
    run_experiment(&cfg)
}

/// Executes the named pipeline for every scale in the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    config(cfg.validate())?;
    set_threads(cfg.threads)?;
    let ctx = RunContext {
        tol: cfg.tol,
        out_dir: cfg.out_dir.clone(),
        seed: cfg.seed,
    };
    let out = match cfg.pipeline.as_str() {
        "group-validate" => group_validate(&cfg.group)?,
        "specfn-check" => {
            let g = load_group(&cfg.group)?;
            let a = check_laguerre(&ctx, g.d(), 50, g.d(), Some(Path::new("laguerre.csv")))?;
            let b = check_bessel(
                &ctx,
                (g.p() as f64 - 2.0) / 2.0 + 1.0,
                Some(Path::new("bessel.csv")),
            )?;
            Outcome {
                pass: a.pass && b.pass,
                summary: json!({ "laguerre": a.summary, "bessel": b.summary }),
            }
        }
        "frame-check" => frame_check(&ctx, Some(Path::new("frame.csv")))?,
        "symbol-verify" => symbol_verify(&ctx, &cfg.symbol, Some(Path::new("symbol.csv")))?,
        "kernel-eval" => {
            let g = load_group(&cfg.group)?;
            let ts = geometric_grid(cfg.t_grid.min, cfg.t_grid.max, cfg.t_grid.points);
            let mut pass = true;
            let mut rows = Vec::new();
            for j in &cfg.j {
                for &t in &ts {
                    let o = kernel_eval(&ctx, &g, &cfg.symbol, j, t, cfg.rho_z, cfg.rho_s, true)?;
                    pass &= o.pass;
                    rows.push(o.summary);
                }
            }
            Outcome {
                pass,
                summary: json!({ "samples": rows }),
            }
        }
        "analyze-decay" => {
            let mut pass = true;
            let mut fits = Vec::new();
            for j in &cfg.j {
                let args = DecayArgs {
                    symbol: cfg.symbol.clone(),
                    group: cfg.group.clone(),
                    j: j.clone(),
                    t_min: cfg.t_grid.min,
                    t_max: cfg.t_grid.max,
                    points: cfg.t_grid.points,
                    fixture: None,
                    csv: Some(PathBuf::from(format!("decay_j{}.csv", j.replace(':', "_")))),
                };
                let o = analyze_decay(&ctx, &args)?;
                pass &= o.pass;
                fits.push(o.summary);
            }
            Outcome {
                pass,
                summary: json!({ "fits": fits }),
            }
        }
        "analyze-sharpness" => analyze_sharpness(
            &ctx,
            &SharpnessArgs {
                symbol: cfg.symbol.clone(),
                group: cfg.group.clone(),
                t_min: cfg.t_grid.min,
                t_max: cfg.t_grid.max,
                points: cfg.t_grid.points,
                csv: Some(PathBuf::from("sharpness.csv")),
            },
        )?,
        other => return Err(CliError::Config(anyhow!("unknown pipeline {other:?}"))),
    };
    finish(&ctx, out)
}

fn group_validate(spec: &str) -> Result<Outcome, CliError> {
    let g = load_group(spec)?;
    let r = g.validate();
    Ok(Outcome {
        pass: r.pass,
        summary: to_value(&r)?,
    })
}

fn check_laguerre(
    ctx: &RunContext,
    d: usize,
    m_max: usize,
    beta_max: usize,
    csv: Option<&Path>,
) -> Result<Outcome, CliError> {
    if d == 0 || beta_max > d {
        return Err(CliError::Config(anyhow!(
            "need d ≥ 1 and beta-max ≤ d, got d = {d}, beta-max = {beta_max}"
        )));
    }
    let top = 4.0 * (2 * m_max + d) as f64 + 40.0;
    let tau: Vec<f64> = (0..=4000).map(|i| top * i as f64 / 4000.0).collect();
    let r = numeric(check_laguerre_bound(d, m_max, beta_max, &tau))?;
    if let Some(p) = csv {
        write_csv(
            &ctx.path(p),
            &["m", "beta", "ratio", "sup_value"],
            r.rows
                .iter()
                .map(|row| vec![row.m as f64, row.beta as f64, row.ratio, row.sup_value]),
        )?;
    }
    Ok(Outcome {
        pass: r.pass,
        summary: json!({
            "d": r.d, "m_max": r.m_max, "beta_max": r.beta_max,
            "head_sup": r.head_sup, "tail_sup": r.tail_sup, "pass": r.pass
        }),
    })
}

fn check_bessel(ctx: &RunContext, nu: f64, csv: Option<&Path>) -> Result<Outcome, CliError> {
    let grid = geometric_grid(1e-3, 1e4, 2000);
    let r = numeric(check_bessel_properties(nu, &grid))?;
    if let Some(p) = csv {
        let rows = grid
            .iter()
            .map(|&x| bessel_j(nu, x).map(|v| vec![x, v]))
            .collect::<Result<Vec<_>, _>>();
        write_csv(&ctx.path(p), &["r", "value"], numeric(rows)?)?;
    }
    Ok(Outcome {
        pass: r.pass,
        summary: to_value(&r)?,
    })
}

fn frame_check(ctx: &RunContext, csv: Option<&Path>) -> Result<Outcome, CliError> {
    let r = check_frame(&build_frame());
    if let Some(p) = csv {
        write_csv(
            &ctx.path(p),
            &["tau", "psi", "r"],
            (0..=800).map(|i| {
                let tau = i as f64 / 100.0;
                vec![tau, psi(tau), annular(tau)]
            }),
        )?;
    }
    Ok(Outcome {
        pass: r.pass,
        summary: to_value(&r)?,
    })
}

fn symbol_verify(ctx: &RunContext, name: &str, csv: Option<&Path>) -> Result<Outcome, CliError> {
    let sym = load_symbol(name)?;
    let grid = default_hypothesis_grid(601);
    let r = verify_hypotheses(&sym, &grid);
    if let Some(p) = csv {
        write_csv(
            &ctx.path(p),
            &["r", "phi", "phi_prime", "phi_second"],
            grid.iter()
                .map(|&x| vec![x, sym.eval(x), sym.d1(x), sym.d2(x)]),
        )?;
    }
    let mut summary = to_value(&r)?;
    summary["warnings"] = json!(sym.warnings());
    Ok(Outcome {
        pass: r.pass,
        summary,
    })
}

#[allow(clippy::too_many_arguments)]
fn kernel_eval(
    ctx: &RunContext,
    g: &HTypeGroup,
    symbol: &str,
    j: &str,
    t: f64,
    rho_z: f64,
    rho_s: f64,
    full: bool,
) -> Result<Outcome, CliError> {
    let sym = load_symbol(symbol)?;
    let scale = load_scale(j)?;
    let tol = ctx.tol.unwrap_or(1e-8);
    let s = numeric(eval_kernel(g, sym, scale, t, rho_z, rho_s, tol))?;
    let mut summary = json!({
        "symbol": sym.name(), "scale": scale.to_string(), "t": t, "rho_z": rho_z, "rho_s": rho_s,
        "re": s.value.re, "im": s.value.im, "abs": s.value.norm(),
    });
    if full {
        summary["sample"] = to_value(&s)?;
    }
    Ok(Outcome {
        pass: true,
        summary,
    })
}

fn read_fixture(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut rdr = config(
        csv::Reader::from_path(path).with_context(|| format!("opening fixture {}", path.display())),
    )?;
    let mut t = Vec::new();
    let mut v = Vec::new();
    for rec in rdr.records() {
        let rec = config(rec.map_err(anyhow::Error::from))?;
        let get = |i: usize| -> Result<f64, CliError> {
            config(
                rec.get(i)
                    .ok_or_else(|| anyhow!("fixture row has fewer than two columns"))
                    .and_then(|s| s.trim().parse::<f64>().map_err(anyhow::Error::from)),
            )
        };
        t.push(get(0)?);
        v.push(get(1)?);
    }
    Ok((t, v))
}

fn decay_summary(fit: &DecayFit, extra: Value) -> Value {
    json!({
        "theta_hat": fit.theta_hat,
        "theta_theory": fit.theta_theory,
        "residual": fit.residual,
        "fit_start": fit.fit_start,
        "intercept": fit.intercept,
        "points": fit.t_samples.len(),
        "context": extra,
    })
}

fn analyze_decay(ctx: &RunContext, a: &DecayArgs) -> Result<Outcome, CliError> {
    let (fit, extra) = if let Some(fx) = &a.fixture {
        let (t, v) = read_fixture(fx)?;
        let fit = config(fit_decay(&t, &v, f64::NAN, false).map_err(anyhow::Error::from))?;
        (fit, json!({ "fixture": fx }))
    } else {
        let g = load_group(&a.group)?;
        let sym = load_symbol(&a.symbol)?;
        let scale = load_scale(&a.j)?;
        if !(a.t_min > 0.0 && a.t_max >= 100.0 * a.t_min) {
            return Err(CliError::Config(anyhow!(
                "t range must span at least two decades, got [{}, {}]",
                a.t_min,
                a.t_max
            )));
        }
        let target = config(theta_theory(&sym, &g, scale).map_err(anyhow::Error::from))?;
        let ts = geometric_grid(a.t_min, a.t_max, a.points.max(8));
        let frame = build_frame();
        let cfg = ctx.scan_config();
        let mut sups = Vec::with_capacity(ts.len());
        let mut locs = Vec::with_capacity(ts.len());
        for &t in &ts {
            let r = numeric(sup_norm_scan_with(&g, sym, &frame, scale, t, &cfg))?;
            sups.push(r.sup);
            locs.push(
                json!({ "t": t, "rho_z": r.rho_z, "rho_s": r.rho_s, "evaluations": r.evaluations }),
            );
        }
        let fit = numeric(fit_decay(&ts, &sups, target, true))?;
        (
            fit,
            json!({ "symbol": sym.name(), "group": a.group, "scale": scale.to_string(), "maxima": locs }),
        )
    };
    let pass = if fit.theta_theory.is_nan() {
        fit.residual.is_finite()
    } else {
        fit.theta_hat >= fit.theta_theory - 0.15
    };
    let summary = decay_summary(&fit, extra);
    if let Some(p) = &a.csv {
        let path = ctx.path(p);
        write_csv(
            &path,
            &["t", "sup_or_profile"],
            fit.t_samples
                .iter()
                .zip(&fit.sup_values)
                .map(|(t, v)| vec![*t, *v]),
        )?;
        write_json(&sidecar(&path), &summary)?;
    }
    Ok(Outcome { pass, summary })
}

fn analyze_sharpness(ctx: &RunContext, a: &SharpnessArgs) -> Result<Outcome, CliError> {
    let g = load_group(&a.group)?;
    let sym = load_symbol(&a.symbol)?;
    if !(a.t_min > 0.0 && a.t_max > a.t_min) {
        return Err(CliError::Config(anyhow!(
            "invalid t range [{}, {}]",
            a.t_min,
            a.t_max
        )));
    }
    let pr = numeric(sharpness_profile(sym, &g, (a.t_min, a.t_max), a.points))?;
    let half_p = g.p() as f64 / 2.0;
    let slope = pr.slope();
    let ratio = pr.leading_ratio();
    let pass = (slope + half_p).abs() <= 0.1
        && (ratio - 1.0).abs() <= 0.05
        && pr.lambda0_error() <= 1e-6
        && pr.hessian_error() <= 1e-6;
    let summary = json!({
        "symbol": pr.symbol,
        "slope": slope,
        "target_slope": -half_p,
        "leading_ratio": ratio,
        "lambda0_error": pr.lambda0_error(),
        "hessian_error": pr.hessian_error(),
        "profile": to_value(&pr)?,
    });
    if let Some(p) = &a.csv {
        let path = ctx.path(p);
        write_csv(
            &path,
            &["t", "sup_or_profile", "leading"],
            pr.profile
                .iter()
                .zip(&pr.leading)
                .map(|((t, u), (_, l))| vec![*t, *u, *l]),
        )?;
        write_json(&sidecar(&path), &summary)?;
    }
    Ok(Outcome { pass, summary })
}
