//! `iqsc`: analytic curves, Monte Carlo sweeps and cross-validation for
//! mirror-subcarrier I/Q imbalance schemes.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error.

mod output;
mod presets;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iqsc_core::engine::{self, Engine, SweepConfig, ValidationOptions, Verdict};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] iqsc_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "iqsc", version, about = "Mirror-subcarrier IQ imbalance link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form outage and SER curves.
    Analytic(RunArgs),
    /// Monte Carlo estimates with 95% intervals.
    Sweep(RunArgs),
    /// Monte Carlo vs. closed forms; exit 1 if any point disagrees. Without
    /// --config or --preset, flags override the default validation suite.
    Validate {
        #[command(flatten)]
        run: RunArgs,
        /// Multiply every analytic reference by this factor (negative control).
        #[arg(long, default_value_t = 1.0)]
        corrupt_analytics: f64,
    },
    /// Run a named figure preset.
    Preset {
        /// One of: fig2-outage-r1, fig3-outage-vs-rate, fig4-outage,
        /// fig5-ser-modulations, fig6-ser-qpsk-irr, fig7-ser-16qam-floors.
        name: String,
        #[arg(long, value_enum, default_value_t = Mode::Analytic)]
        mode: Mode,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Analytic,
    Sweep,
    Validate,
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON config with flat keys, or a run manifest to replay.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a named preset instead of a config file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; the manifest is written next to it. Standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Comma-separated scheme names.
    #[arg(long)]
    schemes: Option<String>,
    /// Comma-separated constellation orders.
    #[arg(long)]
    order: Option<String>,
    /// Comma-separated IRR values in dB (`inf` allowed).
    #[arg(long, allow_hyphen_values = true)]
    irr_db: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi_deg: Option<f64>,
    /// Comma-separated SNR values in dB (`inf` allowed).
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Comma-separated rates in bits/s/Hz.
    #[arg(long)]
    rate: Option<String>,
    /// ser, outage or both.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    /// equal-energy or equal-power.
    #[arg(long)]
    power: Option<String>,
    /// corrected, as-printed or textbook.
    #[arg(long)]
    ser_form: Option<String>,
}

fn list_value(key: &str, text: &str, numeric: bool) -> CliResult<Value> {
    let items = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            if !numeric || s == "inf" {
                return Ok(Value::from(s));
            }
            if let Ok(n) = s.parse::<u64>() {
                return Ok(Value::from(n));
            }
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Value::from)
                .ok_or_else(|| {
                    CliError::Core(iqsc_core::Error::Config {
                        key: key.to_owned(),
                        reason: format!("`{s}` is not a number"),
                    })
                })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Value::Array(items))
}

impl RunArgs {
    fn overrides(&self) -> CliResult<Map<String, Value>> {
        let mut m = Map::new();
        let lists = [
            ("schemes", &self.schemes, false),
            ("order", &self.order, true),
            ("irr_db", &self.irr_db, true),
            ("snr_db", &self.snr_db, true),
            ("rate", &self.rate, true),
        ];
        for (key, value, numeric) in lists {
            if let Some(text) = value {
                m.insert(key.to_owned(), list_value(key, text, numeric)?);
            }
        }
        let scalars = [
            ("epsilon", self.epsilon.map(Value::from)),
            ("phi_deg", self.phi_deg.map(Value::from)),
            ("seed", self.seed.map(Value::from)),
            ("min_errors", self.min_errors.map(Value::from)),
            ("max_trials", self.max_trials.map(Value::from)),
            ("metric", self.metric.clone().map(Value::from)),
            ("power", self.power.clone().map(Value::from)),
            ("ser_form", self.ser_form.clone().map(Value::from)),
        ];
        for (key, value) in scalars {
            if let Some(v) = value {
                m.insert(key.to_owned(), v);
            }
        }
        Ok(m)
    }

    /// `base` stands in for the config file when neither a file nor a preset is given.
    fn resolve(&self, preset: Option<&str>, base: Option<SweepConfig>) -> CliResult<SweepConfig> {
        let overrides = self.overrides()?;
        let preset = match (preset, self.preset.as_deref()) {
            (Some(_), Some(_)) => return Err(CliError::Usage("give the preset once".into())),
            (a, b) => a.or(b),
        };
        if let Some(name) = preset {
            let mut cfg = presets::preset(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown preset `{name}`; available: {}",
                    presets::NAMES.join(", ")
                ))
            })?;
            cfg.merge_json(&overrides)?;
            return Ok(cfg);
        }
        let Some(path) = &self.config else {
            return Ok(match base {
                Some(mut cfg) => {
                    cfg.merge_json(&overrides)?;
                    cfg
                }
                None => SweepConfig::from_json(&Value::Object(overrides))?,
            });
        };
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|e| {
            CliError::Core(iqsc_core::Error::Config {
                key: "<file>".into(),
                reason: format!("{}: invalid JSON: {e}", path.display()),
            })
        })?;
        // A run manifest carries its resolved config under `config`.
        let value = match value.get("config") {
            Some(inner) if value.get("tool").is_some() => inner.clone(),
            _ => value,
        };
        let mut cfg = SweepConfig::from_json(&value)?;
        cfg.merge_json(&overrides)?;
        Ok(cfg)
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes the CSV to `--out` plus its manifest, or to standard output.
fn emit(command: &str, args: &RunArgs, cfg: &SweepConfig, workers: usize, csv: &str) -> CliResult<()> {
    match &args.out {
        Some(path) => {
            write_file(path, csv)?;
            let manifest_path = output::manifest_path(path);
            let manifest = output::RunManifest::new(command, cfg, workers, vec![path.clone(), manifest_path.clone()]);
            let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            write_file(&manifest_path, &(json + "\n"))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(csv.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn cmd_analytic(args: &RunArgs, preset: Option<&str>) -> CliResult<ExitCode> {
    let cfg = args.resolve(preset, None)?;
    let rows = engine::analytic_sweep(&cfg)?;
    emit("analytic", args, &cfg, 0, &output::analytic_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &RunArgs, preset: Option<&str>) -> CliResult<ExitCode> {
    let cfg = args.resolve(preset, None)?;
    let engine = Engine::new(args.workers)?;
    let results = engine.run_sweep(&cfg)?;
    emit("sweep", args, &cfg, engine.workers(), &output::sweep_csv(&results))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: &RunArgs, preset: Option<&str>, corrupt: f64) -> CliResult<ExitCode> {
    let cfg = args.resolve(preset, Some(presets::default_validation()))?;
    let engine = Engine::new(args.workers)?;
    let report = engine::validate_analytics(&engine, &cfg, ValidationOptions { corrupt_factor: corrupt })?;
    let results: Vec<_> = report.points.iter().map(|p| p.result).collect();
    if args.out.is_some() {
        emit("validate", args, &cfg, engine.workers(), &output::sweep_csv(&results))?;
    }
    for p in &report.points {
        let pt = &p.result.point;
        let e = &p.result.estimate;
        let verdict = match p.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        println!(
            "{verdict} {} {} irr={} snr={} {}{}: mc={} ci=[{}, {}] analytic={}{}",
            pt.scheme,
            pt.modulation.map_or("", |m| m.name()),
            pt.irr_db,
            pt.snr_db,
            pt.metric.name(),
            pt.metric.rate().map_or(String::new(), |r| format!(" R={r}")),
            output::prob(e.estimate),
            output::prob(e.ci95.0),
            output::prob(e.ci95.1),
            e.analytic.map_or("-".to_owned(), |a| output::prob(a.value)),
            p.warning.map_or(String::new(), |w| format!(" (warning: {w})")),
        );
    }
    let failed = report.count(Verdict::Fail);
    println!(
        "{} passed, {failed} failed, {} skipped",
        report.count(Verdict::Pass),
        report.count(Verdict::Skipped)
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Analytic(args) => cmd_analytic(&args, None),
        Command::Sweep(args) => cmd_sweep(&args, None),
        Command::Validate { run, corrupt_analytics } => cmd_validate(&run, None, corrupt_analytics),
        Command::Preset { name, mode, run } => match mode {
            Mode::Analytic => cmd_analytic(&run, Some(&name)),
            Mode::Sweep => cmd_sweep(&run, Some(&name)),
            Mode::Validate => cmd_validate(&run, Some(&name), 1.0),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
