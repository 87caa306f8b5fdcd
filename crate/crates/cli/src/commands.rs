//! Subcommand argument surfaces and implementations.
//!
//! Each command resolves its full configuration first (flags over config
//! file over defaults), validates that no unknown config keys remain, and
//! only then touches inputs or outputs. Data files get sidecar metadata; a
//! rerun with the recorded parameters reproduces every byte.

use crate::config::{resolve, resolve_opt, resolve_required, resolve_switch, ConfigMap};
use crate::meta::{self, Band, BootstrapSummary, DecisionCounts, Quantiles, SamRunSummary, SeriesSummary};
use chrono::NaiveDate;
use clap::{Args, Subcommand};
use serde::Serialize;
use spillover_core::asymmetry::{
    rolling_spillovers, sam_directional, sam_total, Direction, RollingSpec, RollingSpillovers,
    SamFlag, SamSeries,
};
use spillover_core::bootstrap::{bootstrap_sam, decide_with_band, Decision, PipelineConfig};
use spillover_core::ingest::{build_panel, load_ticks, TradingCalendar};
use spillover_core::io::{
    read_measure_csv, write_distribution_csv, write_fevd_csv, write_fevd_snapshots_csv,
    write_grid_csv, write_measure_csv, write_sam_csv, write_spillover_csv,
};
use spillover_core::realized::{realized_measures, MeasureKind, MeasurePanel};
use spillover_core::sim::{Subsample, SvParams};
use spillover_core::spillover::{generalized_fevd, spillover_indices, FevdResult, SigmaConvention};
use spillover_core::var::{fit_var, ma_coefficients, VarSpec};
use spillover_core::{Error, Result};
use std::path::{Path, PathBuf};

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute daily realized measures from tick files.
    Measures(MeasuresArgs),
    /// Rolling spillover indices from a daily measure panel.
    Spillover(SpilloverArgs),
    /// Rolling spillover asymmetry from semivariance panels.
    Sam(SamArgs),
    /// Simulated null distribution of the asymmetry measure.
    Bootstrap(BootstrapArgs),
    /// Full-sample variance decomposition table.
    Fevd(FevdArgs),
}

pub fn dispatch(command: Command, cfg: &mut ConfigMap) -> Result<()> {
    match command {
        Command::Measures(args) => run_measures(args, cfg),
        Command::Spillover(args) => run_spillover(args, cfg),
        Command::Sam(args) => run_sam(args, cfg),
        Command::Bootstrap(args) => run_bootstrap(args, cfg),
        Command::Fevd(args) => run_fevd(args, cfg),
    }
}

/// Estimation flags shared by every command that fits a system.
#[derive(Args, Debug)]
pub struct VarFlags {
    /// Autoregressive order of the fitted system.
    #[arg(long = "lag-order", value_name = "P")]
    lag_order: Option<usize>,
    /// Forecast horizon of the variance decomposition.
    #[arg(long, value_name = "H")]
    horizon: Option<usize>,
    /// Fit without per-equation intercepts.
    #[arg(long = "no-intercept")]
    no_intercept: bool,
    /// Shock-size convention in the decomposition: variance or stddev.
    #[arg(long = "sigma-convention", value_name = "NAME")]
    sigma_convention: Option<String>,
    /// Apply ln(x + 1e-12) to the measures before fitting.
    #[arg(long = "log-transform")]
    log_transform: bool,
}

struct VarChoices {
    spec: VarSpec,
    convention: SigmaConvention,
    log_transform: bool,
}

impl VarChoices {
    fn resolve(flags: &VarFlags, cfg: &mut ConfigMap) -> Result<Self> {
        let defaults = VarSpec::default();
        let conv_flag = flags
            .sigma_convention
            .as_deref()
            .map(str::parse::<SigmaConvention>)
            .transpose()?;
        let spec = VarSpec {
            lag_order: resolve(flags.lag_order, cfg, "lag-order", defaults.lag_order)?,
            include_intercept: !resolve_switch(flags.no_intercept, cfg, "no-intercept")?,
            horizon: resolve(flags.horizon, cfg, "horizon", defaults.horizon)?,
        };
        Ok(Self {
            spec,
            convention: resolve(conv_flag, cfg, "sigma-convention", SigmaConvention::default())?,
            log_transform: resolve_switch(flags.log_transform, cfg, "log-transform")?,
        })
    }
}

/// Rolling-window flags.
#[derive(Args, Debug)]
pub struct RollFlags {
    /// Window length in days.
    #[arg(long, value_name = "DAYS")]
    window: Option<usize>,
    /// Days between consecutive window starts.
    #[arg(long, value_name = "DAYS")]
    step: Option<usize>,
}

impl RollFlags {
    fn resolve(&self, cfg: &mut ConfigMap) -> Result<RollingSpec> {
        let defaults = RollingSpec::default();
        Ok(RollingSpec {
            window_length: resolve(self.window, cfg, "window", defaults.window_length)?,
            step: resolve(self.step, cfg, "step", defaults.step)?,
        })
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_error(path))
}

/// Asset ids become CSV headers and file-name components, so they must stay
/// plain: ASCII letters, digits, `.`, `_`, `-`.
fn check_asset_id(id: &str) -> Result<()> {
    let plain = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if plain {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name: "asset_id",
            reason: format!("`{id}` may only contain ASCII letters, digits, `.`, `_`, `-`"),
        })
    }
}

// ---------------------------------------------------------------- measures

#[derive(Args, Debug)]
pub struct MeasuresArgs {
    /// Tick file as ID=PATH; repeat once per asset (two or more).
    #[arg(long = "ticks", value_name = "ID=PATH")]
    ticks: Vec<String>,
    /// Calendar file: session times, bar length, excluded dates.
    #[arg(long, value_name = "PATH")]
    calendar: Option<PathBuf>,
    /// Directory for rv.csv, rs_minus.csv, rs_plus.csv.
    #[arg(long = "out-dir", value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Also write the filled intraday log-price grid to this file.
    #[arg(long = "dump-panel", value_name = "PATH")]
    dump_panel: Option<PathBuf>,
}

fn resolve_ticks(flag: &[String], cfg: &mut ConfigMap) -> Result<Vec<(String, PathBuf)>> {
    let raw: Vec<String> = if flag.is_empty() {
        match cfg.take("ticks") {
            Some(value) => value
                .split(',')
                .map(|s| s.trim().to_owned())
                .filter(|s| !s.is_empty())
                .collect(),
            None => Vec::new(),
        }
    } else {
        cfg.take("ticks");
        flag.to_vec()
    };
    if raw.is_empty() {
        return Err(Error::InvalidParam {
            name: "ticks",
            reason: "required: at least two ID=PATH pairs".into(),
        });
    }
    raw.iter()
        .map(|pair| match pair.split_once('=') {
            Some((id, path)) if !id.trim().is_empty() && !path.trim().is_empty() => {
                check_asset_id(id.trim())?;
                Ok((id.trim().to_owned(), PathBuf::from(path.trim())))
            }
            _ => Err(Error::InvalidParam {
                name: "ticks",
                reason: format!("expected ID=PATH, got `{pair}`"),
            }),
        })
        .collect()
}

#[derive(Serialize)]
struct MeasureParams {
    ticks: Vec<String>,
    calendar: String,
    bars_per_day: usize,
    dropped_days: Vec<String>,
}

fn run_measures(args: MeasuresArgs, cfg: &mut ConfigMap) -> Result<()> {
    let ticks = resolve_ticks(&args.ticks, cfg)?;
    let calendar_path: PathBuf = resolve_required(args.calendar, cfg, "calendar")?;
    let out_dir: PathBuf = resolve_required(args.out_dir, cfg, "out-dir")?;
    let dump_panel: Option<PathBuf> = resolve_opt(args.dump_panel, cfg, "dump-panel")?;
    cfg.finish()?;

    let calendar = TradingCalendar::from_file(&calendar_path)?;
    let files = ticks
        .iter()
        .map(|(id, path)| load_ticks(path, id))
        .collect::<Result<Vec<_>>>()?;
    let built = build_panel(&files, &calendar)?;
    for dropped in &built.dropped_days {
        eprintln!(
            "warning: dropped {}: no in-session data for {}",
            dropped.date,
            dropped.missing_assets.join(", ")
        );
    }

    let measures = realized_measures(&built.panel);
    create_dir(&out_dir)?;
    let params = MeasureParams {
        ticks: ticks
            .iter()
            .map(|(id, path)| format!("{id}={}", path.display()))
            .collect(),
        calendar: calendar_path.display().to_string(),
        bars_per_day: built.panel.bars_per_day(),
        dropped_days: built
            .dropped_days
            .iter()
            .map(|d| format!("{} (missing {})", d.date, d.missing_assets.join(" ")))
            .collect(),
    };
    for panel in [&measures.rv, &measures.rs_minus, &measures.rs_plus] {
        let path = out_dir.join(format!("{}.csv", panel.kind.as_str()));
        write_measure_csv(&path, panel)?;
        meta::write_sidecar(&path, "measures", panel.n_days(), &params)?;
    }
    if let Some(grid_path) = dump_panel {
        write_grid_csv(&grid_path, &built.panel, &calendar)?;
        let rows = built.panel.n_days() * (built.panel.bars_per_day() + 1);
        meta::write_sidecar(&grid_path, "measures", rows, &params)?;
    }
    println!(
        "wrote rv.csv, rs_minus.csv, rs_plus.csv to {} ({} days, {} assets)",
        out_dir.display(),
        built.panel.n_days(),
        built.panel.n_assets()
    );
    Ok(())
}

// ---------------------------------------------------------------- spillover

#[derive(Args, Debug)]
pub struct SpilloverArgs {
    /// Daily measure CSV (`date,<asset>,...`).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output CSV for the rolling series.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write every window's decomposition table to this file.
    #[arg(long = "fevd-out", value_name = "PATH")]
    fevd_out: Option<PathBuf>,
    #[command(flatten)]
    var: VarFlags,
    #[command(flatten)]
    roll: RollFlags,
}

#[derive(Serialize)]
struct SpilloverParams {
    input: String,
    window: usize,
    step: usize,
    lag_order: usize,
    intercept: bool,
    horizon: usize,
    sigma_convention: String,
    log_transform: bool,
    failed_windows: Vec<String>,
}

fn window_fevds(
    panel: &MeasurePanel<f64>,
    spec: &VarSpec,
    roll: &RollingSpec,
    convention: SigmaConvention,
    series: &RollingSpillovers<f64>,
) -> Result<Vec<(NaiveDate, FevdResult<f64>)>> {
    let mut snapshots = Vec::new();
    for w in 0..series.n_windows() {
        if series.sets[w].is_none() {
            continue;
        }
        let start = w * roll.step;
        let window = panel
            .values
            .slice(ndarray::s![start..start + roll.window_length, ..]);
        let fit = fit_var(window, spec)?;
        let ma = ma_coefficients(&fit, spec.horizon)?;
        snapshots.push((
            series.dates[w],
            generalized_fevd(&fit.sigma_eps, &ma, convention)?,
        ));
    }
    Ok(snapshots)
}

fn warn_failures(series: &RollingSpillovers<f64>, label: &str) {
    for (w, cause) in &series.failures {
        eprintln!("warning: {label} window ending {}: {cause}", series.dates[*w]);
    }
}

fn run_spillover(args: SpilloverArgs, cfg: &mut ConfigMap) -> Result<()> {
    let input: PathBuf = resolve_required(args.input, cfg, "input")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let fevd_out: Option<PathBuf> = resolve_opt(args.fevd_out, cfg, "fevd-out")?;
    let var = VarChoices::resolve(&args.var, cfg)?;
    let roll = args.roll.resolve(cfg)?;
    cfg.finish()?;

    let mut panel = read_measure_csv(&input, MeasureKind::Rv)?;
    if var.log_transform {
        panel = panel.log_transformed();
    }
    let series = rolling_spillovers(&panel, &var.spec, &roll, var.convention)?;
    warn_failures(&series, "spillover");

    write_spillover_csv(&out, &series)?;
    let params = SpilloverParams {
        input: input.display().to_string(),
        window: roll.window_length,
        step: roll.step,
        lag_order: var.spec.lag_order,
        intercept: var.spec.include_intercept,
        horizon: var.spec.horizon,
        sigma_convention: var.convention.as_str().to_owned(),
        log_transform: var.log_transform,
        failed_windows: series
            .failures
            .iter()
            .map(|(w, cause)| format!("{}: {cause}", series.dates[*w]))
            .collect(),
    };
    meta::write_sidecar(&out, "spillover", series.n_windows(), &params)?;

    if let Some(fevd_path) = fevd_out {
        let snapshots = window_fevds(&panel, &var.spec, &roll, var.convention, &series)?;
        write_fevd_snapshots_csv(&fevd_path, &panel.assets, &snapshots)?;
        let rows = snapshots.len() * panel.n_assets();
        meta::write_sidecar(&fevd_path, "spillover", rows, &params)?;
    }
    println!(
        "wrote {} ({} windows, {} failed)",
        out.display(),
        series.n_windows(),
        series.failures.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------- sam

#[derive(Args, Debug)]
pub struct SamArgs {
    /// Positive-semivariance measure CSV.
    #[arg(long, value_name = "PATH")]
    plus: Option<PathBuf>,
    /// Negative-semivariance measure CSV.
    #[arg(long, value_name = "PATH")]
    minus: Option<PathBuf>,
    /// Directory for the total and directional SAM series.
    #[arg(long = "out-dir", value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Bootstrap summary JSON supplying the confidence band.
    #[arg(long = "ci-from", value_name = "PATH")]
    ci_from: Option<PathBuf>,
    #[command(flatten)]
    var: VarFlags,
    #[command(flatten)]
    roll: RollFlags,
}

#[derive(Serialize)]
struct SamParams {
    plus: String,
    minus: String,
    window: usize,
    step: usize,
    lag_order: usize,
    intercept: bool,
    horizon: usize,
    sigma_convention: String,
    log_transform: bool,
    ci_from: Option<String>,
}

fn run_sam(args: SamArgs, cfg: &mut ConfigMap) -> Result<()> {
    let plus_path: PathBuf = resolve_required(args.plus, cfg, "plus")?;
    let minus_path: PathBuf = resolve_required(args.minus, cfg, "minus")?;
    let out_dir: PathBuf = resolve_required(args.out_dir, cfg, "out-dir")?;
    let ci_from: Option<PathBuf> = resolve_opt(args.ci_from, cfg, "ci-from")?;
    let var = VarChoices::resolve(&args.var, cfg)?;
    let roll = args.roll.resolve(cfg)?;
    cfg.finish()?;

    let mut plus = read_measure_csv(&plus_path, MeasureKind::RsPlus)?;
    let mut minus = read_measure_csv(&minus_path, MeasureKind::RsMinus)?;
    for asset in &plus.assets {
        check_asset_id(asset)?;
    }
    if var.log_transform {
        plus = plus.log_transformed();
        minus = minus.log_transformed();
    }

    let band: Option<(Band, String)> = match &ci_from {
        Some(path) => {
            let summary = BootstrapSummary::read(path)?;
            let band = summary.ci.ok_or(Error::InvalidParam {
                name: "ci-from",
                reason: format!(
                    "{} carries no confidence band ({} retained replications < 100)",
                    path.display(),
                    summary.retained
                ),
            })?;
            Some((band, path.display().to_string()))
        }
        None => None,
    };

    let roll_plus = rolling_spillovers(&plus, &var.spec, &roll, var.convention)?;
    let roll_minus = rolling_spillovers(&minus, &var.spec, &roll, var.convention)?;
    warn_failures(&roll_plus, "rs_plus");
    warn_failures(&roll_minus, "rs_minus");

    let mut series_list: Vec<(String, SamSeries<f64>)> =
        vec![("sam_total".to_owned(), sam_total(&roll_plus, &roll_minus)?)];
    for (a, asset) in plus.assets.iter().enumerate() {
        series_list.push((
            format!("sam_from_{asset}"),
            sam_directional(&roll_plus, &roll_minus, a, Direction::From)?,
        ));
        series_list.push((
            format!("sam_to_{asset}"),
            sam_directional(&roll_plus, &roll_minus, a, Direction::To)?,
        ));
    }

    create_dir(&out_dir)?;
    let params = SamParams {
        plus: plus_path.display().to_string(),
        minus: minus_path.display().to_string(),
        window: roll.window_length,
        step: roll.step,
        lag_order: var.spec.lag_order,
        intercept: var.spec.include_intercept,
        horizon: var.spec.horizon,
        sigma_convention: var.convention.as_str().to_owned(),
        log_transform: var.log_transform,
        ci_from: band.as_ref().map(|(_, source)| source.clone()),
    };

    let mut summaries = Vec::new();
    let n_windows = roll_plus.n_windows();
    for (name, mut series) in series_list {
        if let Some((band, _)) = &band {
            series.ci = Some((band.low, band.high));
        }
        let path = out_dir.join(format!("{name}.csv"));
        write_sam_csv(&path, &series)?;
        meta::write_sidecar(&path, "sam", series.dates.len(), &params)?;

        let count = |target: SamFlag| series.flags.iter().filter(|f| **f == target).count();
        let decisions = band.as_ref().map(|(band, _)| {
            let outcomes = decide_with_band(&series, band.low, band.high);
            let count = |target: Decision| outcomes.iter().filter(|d| **d == target).count();
            DecisionCounts {
                reject: count(Decision::Reject),
                fail_to_reject: count(Decision::FailToReject),
                skipped: count(Decision::Skipped),
            }
        });
        summaries.push(SeriesSummary {
            name,
            windows: series.dates.len(),
            ok: count(SamFlag::Ok),
            degenerate: count(SamFlag::Degenerate),
            missing: count(SamFlag::Missing),
            decisions,
        });
    }

    let run_summary = SamRunSummary {
        tool: meta::TOOL,
        version: meta::VERSION,
        command: "sam",
        band: band.as_ref().map(|(b, _)| *b),
        band_source: band.map(|(_, source)| source),
        series: summaries,
    };
    run_summary.write(&out_dir.join("sam_summary.json"))?;
    println!(
        "wrote {} SAM series to {} ({} windows each)",
        1 + 2 * plus.assets.len(),
        out_dir.display(),
        n_windows
    );
    Ok(())
}

// ----------------------------------------------------------------- bootstrap

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    /// Number of simulated replications.
    #[arg(long, value_name = "R")]
    replications: Option<usize>,
    /// Simulated days per replication.
    #[arg(long, value_name = "T")]
    days: Option<usize>,
    /// Root RNG seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Expected jumps per asset per day (0 disables jumps).
    #[arg(long = "jump-intensity", value_name = "RATE")]
    jump_intensity: Option<f64>,
    /// Standard deviation of jump sizes.
    #[arg(long = "jump-sd", value_name = "SD")]
    jump_sd: Option<f64>,
    /// Intraday sampling grid: 5min or 36obs.
    #[arg(long, value_name = "GRID")]
    subsample: Option<String>,
    /// Directory for distribution.csv and summary.json.
    #[arg(long = "out-dir", value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    var: VarFlags,
}

#[derive(Serialize)]
struct BootstrapParams {
    replications: usize,
    days: usize,
    seed: u64,
    subsample: String,
    jump_intensity: f64,
    jump_sd: f64,
    lag_order: usize,
    intercept: bool,
    horizon: usize,
    sigma_convention: String,
    log_transform: bool,
}

fn run_bootstrap(args: BootstrapArgs, cfg: &mut ConfigMap) -> Result<()> {
    let replications = resolve(args.replications, cfg, "replications", 500)?;
    let days = resolve(args.days, cfg, "days", 200)?;
    let seed = resolve(args.seed, cfg, "seed", 0u64)?;
    let jump_intensity = resolve(args.jump_intensity, cfg, "jump-intensity", 0.0f64)?;
    let jump_sd = resolve(args.jump_sd, cfg, "jump-sd", 0.01f64)?;
    let sub_flag = args
        .subsample
        .as_deref()
        .map(str::parse::<Subsample>)
        .transpose()?;
    let subsample = resolve(sub_flag, cfg, "subsample", Subsample::default())?;
    let out_dir: PathBuf = resolve_required(args.out_dir, cfg, "out-dir")?;
    let var = VarChoices::resolve(&args.var, cfg)?;
    cfg.finish()?;

    let sv = SvParams {
        jump_intensity,
        jump_sd,
        ..SvParams::<f64>::default()
    };
    let pipeline = PipelineConfig {
        var_spec: var.spec,
        subsample,
        convention: var.convention,
        log_transform: var.log_transform,
    };
    let dist = bootstrap_sam(&sv, days, replications, &pipeline, seed)?;

    create_dir(&out_dir)?;
    let params = BootstrapParams {
        replications,
        days,
        seed,
        subsample: subsample.as_str().to_owned(),
        jump_intensity,
        jump_sd,
        lag_order: var.spec.lag_order,
        intercept: var.spec.include_intercept,
        horizon: var.spec.horizon,
        sigma_convention: var.convention.as_str().to_owned(),
        log_transform: var.log_transform,
    };
    let dist_path = out_dir.join("distribution.csv");
    write_distribution_csv(&dist_path, &dist)?;
    meta::write_sidecar(&dist_path, "bootstrap", dist.retained(), &params)?;

    let summary = BootstrapSummary {
        tool: meta::TOOL.to_owned(),
        version: meta::VERSION.to_owned(),
        command: "bootstrap".to_owned(),
        replications,
        retained: dist.retained(),
        dropped: dist.dropped,
        days,
        seed,
        subsample: subsample.as_str().to_owned(),
        jump_intensity,
        jump_sd,
        lag_order: var.spec.lag_order,
        intercept: var.spec.include_intercept,
        horizon: var.spec.horizon,
        sigma_convention: var.convention.as_str().to_owned(),
        log_transform: var.log_transform,
        quantiles: Quantiles {
            q025: dist.quantiles.0,
            q500: dist.quantiles.1,
            q975: dist.quantiles.2,
        },
        ci: dist
            .confidence_band()
            .map(|(low, high)| Band { low, high }),
    };
    summary.write(&out_dir.join("summary.json"))?;

    println!(
        "retained {} of {} replications (dropped {})",
        dist.retained(),
        replications,
        dist.dropped
    );
    println!(
        "quantiles: q2.5={:.6} q50={:.6} q97.5={:.6}",
        dist.quantiles.0, dist.quantiles.1, dist.quantiles.2
    );
    Ok(())
}

// ---------------------------------------------------------------------- fevd

#[derive(Args, Debug)]
pub struct FevdArgs {
    /// Daily measure CSV (`date,<asset>,...`).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output CSV for the decomposition table.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    var: VarFlags,
}

#[derive(Serialize)]
struct FevdParams {
    input: String,
    lag_order: usize,
    intercept: bool,
    horizon: usize,
    sigma_convention: String,
    log_transform: bool,
    total_spillover: f64,
    unstable: bool,
}

fn run_fevd(args: FevdArgs, cfg: &mut ConfigMap) -> Result<()> {
    let input: PathBuf = resolve_required(args.input, cfg, "input")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let var = VarChoices::resolve(&args.var, cfg)?;
    cfg.finish()?;

    let mut panel = read_measure_csv(&input, MeasureKind::Rv)?;
    if var.log_transform {
        panel = panel.log_transformed();
    }
    let fit = fit_var(panel.values.view(), &var.spec)?;
    let ma = ma_coefficients(&fit, var.spec.horizon)?;
    let fevd = generalized_fevd(&fit.sigma_eps, &ma, var.convention)?;
    let set = spillover_indices(&fevd);

    if fit.is_unstable() {
        eprintln!(
            "warning: fitted system is not covariance stationary (spectral radius {:.4})",
            fit.spectral_radius
        );
    }
    write_fevd_csv(&out, &fevd, &panel.assets)?;
    let params = FevdParams {
        input: input.display().to_string(),
        lag_order: var.spec.lag_order,
        intercept: var.spec.include_intercept,
        horizon: var.spec.horizon,
        sigma_convention: var.convention.as_str().to_owned(),
        log_transform: var.log_transform,
        total_spillover: set.total,
        unstable: fit.is_unstable(),
    };
    meta::write_sidecar(&out, "fevd", panel.n_assets(), &params)?;
    println!("total spillover: {:.6}%", set.total);
    Ok(())
}
