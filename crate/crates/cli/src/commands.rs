use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use ptkr::io as pio;
use ptkr::linalg::{backend_by_name, EigenBackend};
use ptkr::model::sample_mass_jitter;
use ptkr::otoc::{lyapunov, otoc_series, otoc_series_with};
use ptkr::rmt::{ensemble_clsr, EnsembleKind, EnsembleResult, EnsembleSpec};
use ptkr::spectral::{pt_broken, rotor_spectrum, PT_BREAKING_THRESHOLD};
use ptkr::stats::{clsr, goe_surmise_cdf, ks_distance, rlsr, unfold_complex, unfold_real};
use ptkr::sweep::{self, Diagnostic, GridSpec, SweepResult};
use ptkr::{OtocSeries, QuasienergySpectrum, RotorParams, SplitStepApplicator, WavepacketSpec};

use crate::config::{EffectiveConfig, RunConfig};
use crate::{
    Cli, Command, Format, LyapunovArgs, OtocArgs, RmtArgs, RotorArgs, SpectrumInputArgs, SweepArgs, UnfoldArgs,
    UnfoldMode, WavepacketArgs, EXIT_COMPUTE, EXIT_USAGE,
};

/// Error with the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
}

impl Failure {
    pub fn error(&self) -> &anyhow::Error {
        match self {
            Self::Usage(e) | Self::Compute(e) => e,
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Compute(_) => EXIT_COMPUTE,
        }
    }
}

impl From<ptkr::Error> for Failure {
    fn from(e: ptkr::Error) -> Self {
        match e {
            ptkr::Error::InvalidParameter(_)
            | ptkr::Error::Parse { .. }
            | ptkr::Error::Csv(_)
            | ptkr::Error::Json(_)
            | ptkr::Error::CorruptCheckpoint { .. } => Self::Usage(e.into()),
            _ => Self::Compute(e.into()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn compute(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Compute(e.into())
}

/// Settings shared by every subcommand after merging flags and config.
struct Session {
    cfg: RunConfig,
    out: Option<PathBuf>,
    format: Option<Format>,
    backend_name: String,
    backend: &'static dyn EigenBackend,
}

impl Session {
    fn new(cli: &Cli) -> Outcome<Self> {
        let cfg = match &cli.config {
            Some(path) => RunConfig::load(path).map_err(usage)?,
            None => RunConfig::default(),
        };
        let format = match (cli.format, &cfg.output.format) {
            (Some(f), _) => Some(f),
            (None, Some(s)) => Some(Format::parse(s).ok_or_else(|| usage(anyhow!("unknown output format '{s}'; expected csv or json")))?),
            (None, None) => None,
        };
        let backend_name = cli.backend.clone().or_else(|| cfg.run.backend.clone()).unwrap_or_else(|| "auto".into());
        let backend = backend_by_name(&backend_name)
            .ok_or_else(|| usage(anyhow!("unknown backend '{backend_name}'; expected auto, faer, cayley or hqr")))?;
        Ok(Self {
            out: cli.out.clone().or_else(|| cfg.output.out.clone()),
            cfg,
            format,
            backend_name,
            backend,
        })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn rotor(&self, a: &RotorArgs) -> Outcome<RotorParams> {
        let c = &self.cfg.rotor;
        let d = RotorParams::default();
        let params = RotorParams {
            kick_strength: a.k.or(c.k).unwrap_or(d.kick_strength),
            lambda: a.lambda.or(c.lambda).unwrap_or(d.lambda),
            hbar_eff: a.hbar.or(c.hbar).unwrap_or(d.hbar_eff),
            mass: a.m.or(c.m).unwrap_or(d.mass),
            tau: a.tau.or(c.tau).unwrap_or(d.tau),
            half_size: a.n.or(c.n).unwrap_or(d.half_size),
            jitter_amplitude: a.jitter.or(c.jitter).unwrap_or(d.jitter_amplitude),
            seed: a.seed.or(c.seed).unwrap_or(d.seed),
        };
        params.validate()?;
        Ok(params)
    }

    fn wavepacket(&self, a: &WavepacketArgs, params: &RotorParams) -> Outcome<WavepacketSpec> {
        let c = &self.cfg.wavepacket;
        let d = WavepacketSpec::default();
        let spec = WavepacketSpec {
            k0: a.k0.or(c.k0).unwrap_or(d.k0),
            sigma: a.sigma.or(c.sigma).unwrap_or(d.sigma),
        };
        spec.validate(params)?;
        Ok(spec)
    }

    fn steps(&self, flag: Option<usize>) -> usize {
        flag.or(self.cfg.otoc.steps).unwrap_or(DEFAULT_OTOC_STEPS)
    }

    fn effective(&self) -> EffectiveConfig {
        EffectiveConfig {
            backend: Some(self.backend_name.clone()),
            ..EffectiveConfig::default()
        }
    }

    fn writer(&self) -> Outcome<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display())).map_err(compute)?,
            )),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        })
    }

    fn emit_json(&self, value: &Value) -> Outcome {
        let mut w = self.writer()?;
        pio::write_json(&mut w, value).map_err(compute)?;
        w.flush().map_err(compute)
    }

    /// Writes a table through `write`, plus `metadata` into a `.json` sidecar
    /// when the table goes to a file.
    fn emit_table(&self, write: impl FnOnce(&mut dyn Write) -> ptkr::Result<()>, metadata: &Value) -> Outcome {
        let mut w = self.writer()?;
        write(&mut w).map_err(compute)?;
        w.flush().map_err(compute)?;
        match &self.out {
            Some(path) => {
                let side = sidecar_path(path);
                let f = File::create(&side).with_context(|| format!("creating {}", side.display())).map_err(compute)?;
                pio::write_json(BufWriter::new(f), metadata).map_err(compute)
            }
            None => {
                log::info!("metadata: {metadata}");
                Ok(())
            }
        }
    }
}

const DEFAULT_OTOC_STEPS: usize = 40;
const DEFAULT_RMT_DIM: usize = 1000;
const DEFAULT_RMT_TRIALS: usize = 30;

/// `<path>.json`, next to a CSV output.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Serializes `value` and adds a `config` entry.
fn with_config<T: Serialize>(value: &T, config: &EffectiveConfig) -> Outcome<Value> {
    let mut v = serde_json::to_value(value).map_err(compute)?;
    let cfg = serde_json::to_value(config).map_err(compute)?;
    match &mut v {
        Value::Object(map) => {
            map.insert("config".into(), cfg);
            Ok(v)
        }
        _ => Ok(json!({ "value": v, "config": cfg })),
    }
}

fn read_text(path: &Path) -> Outcome<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    Ok(s)
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

fn first_line(text: &str) -> &str {
    text.lines().next().unwrap_or("").trim()
}

fn read_spectrum(path: &Path) -> Outcome<QuasienergySpectrum> {
    let text = read_text(path)?;
    let spectrum = if is_json(&text) {
        pio::read_json(text.as_bytes())?
    } else {
        pio::read_spectrum_csv(text.as_bytes())?
    };
    Ok(spectrum)
}

pub fn run(cli: &Cli) -> Outcome {
    let ctx = Session::new(cli)?;
    match &cli.command {
        Command::Spectrum(a) => spectrum(&ctx, a),
        Command::Clsr(a) => clsr_cmd(&ctx, a),
        Command::Rlsr(a) => rlsr_cmd(&ctx, a),
        Command::Unfold(a) => unfold(&ctx, a),
        Command::Rmt(a) => rmt(&ctx, a),
        Command::Otoc(a) => otoc(&ctx, a),
        Command::Lyapunov(a) => lyapunov_cmd(&ctx, a),
        Command::Sweep(a) => sweep_cmd(&ctx, a),
        Command::Plot(a) => crate::plot::run(a, ctx.out.as_deref()),
    }
}

/// Spectrum from `--input` or computed from the rotor flags, with the
/// effective configuration describing where it came from.
fn obtain_spectrum(ctx: &Session, a: &SpectrumInputArgs) -> Outcome<(QuasienergySpectrum, EffectiveConfig)> {
    let mut eff = ctx.effective();
    match &a.input {
        Some(path) => {
            eff.input = Some(path.clone());
            eff.backend = None;
            Ok((read_spectrum(path)?, eff))
        }
        None => {
            let params = ctx.rotor(&a.rotor)?;
            eff.rotor = Some(params);
            log::info!("diagonalizing a {0}x{0} Floquet matrix", params.dim());
            Ok((rotor_spectrum(&params, ctx.backend)?, eff))
        }
    }
}

fn spectrum(ctx: &Session, a: &RotorArgs) -> Outcome {
    let args = SpectrumInputArgs {
        rotor: a.clone(),
        input: None,
    };
    let (s, eff) = obtain_spectrum(ctx, &args)?;
    let broken = pt_broken(&s, PT_BREAKING_THRESHOLD);
    match ctx.format_or(Format::Csv) {
        Format::Json => {
            let mut v = with_config(&s, &eff)?;
            v["pt_broken"] = json!(broken);
            ctx.emit_json(&v)
        }
        Format::Csv => {
            let meta = with_config(&json!({ "alpha": s.alpha, "pt_broken": broken, "count": s.len() }), &eff)?;
            ctx.emit_table(|w| pio::write_spectrum_csv(w, &s), &meta)
        }
    }
}

fn ratio_summary(xis: &[Complex64]) -> (f64, f64) {
    let n = xis.len() as f64;
    let r = ptkr::linalg::pairwise_sum(xis, |x| x.norm()) / n;
    let c = -ptkr::linalg::pairwise_sum(xis, |x| x.re / x.norm()) / n;
    (r, c)
}

fn clsr_cmd(ctx: &Session, a: &SpectrumInputArgs) -> Outcome {
    // a ratio table written by this subcommand
    if let Some(path) = &a.input {
        let text = read_text(path)?;
        if first_line(&text) == pio::XI_COLUMNS.join(",") {
            let xis = pio::read_points_csv(text.as_bytes(), pio::XI_COLUMNS)?;
            if xis.is_empty() {
                return Err(usage(anyhow!("{} holds no ratios", path.display())));
            }
            let (mean_r, mean_neg_cos) = ratio_summary(&xis);
            let mut eff = ctx.effective();
            eff.input = Some(path.clone());
            eff.backend = None;
            return emit_ratios(ctx, &xis, mean_r, mean_neg_cos, None, &eff);
        }
    }
    let (s, eff) = obtain_spectrum(ctx, a)?;
    let stats = clsr(&s.epsilons)?;
    emit_ratios(ctx, &stats.xis, stats.mean_r, stats.mean_neg_cos, Some(s.alpha), &eff)
}

fn emit_ratios(
    ctx: &Session,
    xis: &[Complex64],
    mean_r: f64,
    mean_neg_cos: f64,
    alpha: Option<f64>,
    eff: &EffectiveConfig,
) -> Outcome {
    let summary = json!({
        "mean_r": mean_r,
        "mean_neg_cos": mean_neg_cos,
        "count": xis.len(),
        "alpha": alpha,
    });
    match ctx.format_or(Format::Json) {
        Format::Json => ctx.emit_json(&with_config(&summary, eff)?),
        Format::Csv => ctx.emit_table(|w| pio::write_points_csv(w, pio::XI_COLUMNS, xis), &with_config(&summary, eff)?),
    }
}

fn rlsr_cmd(ctx: &Session, a: &SpectrumInputArgs) -> Outcome {
    let (s, eff) = obtain_spectrum(ctx, a)?;
    let r = rlsr(&s.real_parts())?;
    let summary = json!({ "rlsr": r, "count": s.len(), "alpha": s.alpha });
    match ctx.format_or(Format::Json) {
        Format::Json => ctx.emit_json(&with_config(&summary, &eff)?),
        Format::Csv => ctx.emit_table(|w| pio::write_column_csv(w, "rlsr", &[r]), &with_config(&summary, &eff)?),
    }
}

fn unfold(ctx: &Session, a: &UnfoldArgs) -> Outcome {
    let (spacings, densities, mode, eff) = match &a.spectrum.input {
        Some(path) if first_line(&read_text(path)?) == "s" => {
            // spacings written by this subcommand
            let s = pio::read_column_csv(read_text(path)?.as_bytes(), "s")?;
            let mut eff = ctx.effective();
            eff.input = Some(path.clone());
            eff.backend = None;
            (s, Vec::new(), "input", eff)
        }
        _ => {
            let (s, eff) = obtain_spectrum(ctx, &a.spectrum)?;
            let complex = match a.mode {
                UnfoldMode::Auto => pt_broken(&s, PT_BREAKING_THRESHOLD),
                UnfoldMode::Real => false,
                UnfoldMode::Complex => true,
            };
            let u = if complex {
                unfold_complex(&s.epsilons, a.order)?
            } else {
                unfold_real(&s.real_parts(), a.window)?
            };
            (u.spacings, u.densities, if complex { "complex" } else { "real" }, eff)
        }
    };
    let ks = ks_distance(&spacings, goe_surmise_cdf)?;
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let summary = json!({
        "mode": mode,
        "count": spacings.len(),
        "mean_spacing": mean,
        "ks_goe_surmise": ks,
        "window": a.window,
        "order": a.order,
    });
    match ctx.format_or(Format::Csv) {
        Format::Json => {
            let mut v = with_config(&summary, &eff)?;
            v["spacings"] = json!(spacings);
            v["densities"] = json!(densities);
            ctx.emit_json(&v)
        }
        Format::Csv => ctx.emit_table(|w| pio::write_column_csv(w, "s", &spacings), &with_config(&summary, &eff)?),
    }
}

fn rmt(ctx: &Session, a: &RmtArgs) -> Outcome {
    let mut eff = ctx.effective();
    let result: EnsembleResult = match &a.input {
        Some(path) => {
            eff.input = Some(path.clone());
            eff.backend = None;
            let text = read_text(path)?;
            pio::read_json(text.as_bytes())?
        }
        None => {
            let c = &ctx.cfg.ensemble;
            let kind: EnsembleKind = match a.ensemble.as_ref().or(c.kind.as_ref()) {
                Some(name) => name.parse()?,
                None => return Err(usage(anyhow!("--ensemble is required"))),
            };
            let spec = EnsembleSpec::new(
                kind,
                a.dim.or(c.dim).unwrap_or(DEFAULT_RMT_DIM),
                a.trials.or(c.trials).unwrap_or(DEFAULT_RMT_TRIALS),
                a.seed.or(c.seed).unwrap_or(0),
            )?;
            eff.ensemble = Some(spec);
            ensemble_clsr(&spec, ctx.backend)?
        }
    };
    match ctx.format_or(Format::Json) {
        Format::Json => ctx.emit_json(&with_config(&result, &eff)?),
        Format::Csv => {
            if result.per_trial.is_empty() {
                return Err(usage(anyhow!("per-trial values are not stored in JSON results; use --format json")));
            }
            let rows = result
                .per_trial
                .iter()
                .enumerate()
                .map(|(i, s)| vec![i as f64, s.mean_r, s.mean_neg_cos]);
            ctx.emit_table(
                |w| pio::write_table(w, &["trial", "mean_r", "mean_neg_cos"], rows),
                &with_config(&result, &eff)?,
            )
        }
    }
}

fn compute_otoc(ctx: &Session, a: &OtocArgs) -> Outcome<(OtocSeries, EffectiveConfig)> {
    let mut params = ctx.rotor(&a.rotor)?;
    let wavepacket = ctx.wavepacket(&a.wavepacket, &params)?;
    let steps = ctx.steps(a.steps);
    // OTOC runs use zero mass jitter unless it is requested explicitly
    let explicit_jitter = a.rotor.jitter.or(ctx.cfg.rotor.jitter).unwrap_or(0.0);
    params.jitter_amplitude = explicit_jitter;
    let series = if explicit_jitter == 0.0 {
        otoc_series(&params, &wavepacket, steps)?
    } else {
        let app = SplitStepApplicator::new(&params, &sample_mass_jitter(&params))?;
        otoc_series_with(&app, &wavepacket, steps)?
    };
    let mut eff = ctx.effective();
    eff.backend = None;
    eff.rotor = Some(series.params);
    eff.wavepacket = Some(wavepacket);
    eff.steps = Some(steps);
    Ok((series, eff))
}

fn otoc(ctx: &Session, a: &OtocArgs) -> Outcome {
    let (series, eff) = compute_otoc(ctx, a)?;
    match ctx.format_or(Format::Csv) {
        Format::Json => ctx.emit_json(&with_config(&series, &eff)?),
        Format::Csv => {
            let meta = with_config(&pio::OtocMetadata::of(&series), &eff)?;
            ctx.emit_table(|w| pio::write_otoc_csv(w, &series), &meta)
        }
    }
}

fn read_otoc_input(path: &Path) -> Outcome<OtocSeries> {
    let text = read_text(path)?;
    if is_json(&text) {
        return Ok(pio::read_json(text.as_bytes())?);
    }
    let side = sidecar_path(path);
    let meta = read_text(&side).map_err(|_| {
        usage(anyhow!(
            "missing sidecar {} with the OTOC fit metadata",
            side.display()
        ))
    })?;
    Ok(pio::read_otoc(text.as_bytes(), meta.as_bytes())?)
}

fn lyapunov_cmd(ctx: &Session, a: &LyapunovArgs) -> Outcome {
    let (series, eff) = match &a.input {
        Some(path) => {
            let mut eff = ctx.effective();
            eff.backend = None;
            eff.input = Some(path.clone());
            let series = read_otoc_input(path)?;
            eff.rotor = Some(series.params);
            eff.wavepacket = Some(series.wavepacket);
            eff.steps = series.times.last().copied();
            (series, eff)
        }
        None => {
            let (series, eff) = compute_otoc(ctx, &a.otoc)?;
            (series, eff)
        }
    };
    let fit = lyapunov(&series)?;
    let summary = json!({
        "lambda": fit.lambda,
        "amplitude": fit.amplitude,
        "fit_window": fit.window,
        "alpha_fit": series.alpha_fit,
        "alpha_clamped": series.alpha_clamped,
    });
    match ctx.format_or(Format::Json) {
        Format::Json => ctx.emit_json(&with_config(&summary, &eff)?),
        Format::Csv => {
            let row = vec![fit.lambda, fit.amplitude, fit.window.0 as f64, fit.window.1 as f64];
            ctx.emit_table(
                |w| pio::write_table(w, &["lambda", "amplitude", "t_start", "t_end"], [row]),
                &with_config(&summary, &eff)?,
            )
        }
    }
}

fn parse_diagnostics(names: &[String]) -> Outcome<Vec<Diagnostic>> {
    names
        .iter()
        .map(|n| {
            serde_json::from_value(Value::String(n.trim().to_ascii_lowercase()))
                .map_err(|_| usage(anyhow!("unknown diagnostic '{n}'; expected clsr, alpha, rlsr or otoc")))
        })
        .collect()
}

fn sweep_cmd(ctx: &Session, a: &SweepArgs) -> Outcome {
    let g = &ctx.cfg.grid;
    let parallelism = a
        .parallelism
        .or(ctx.cfg.run.parallelism)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if ctx.backend_name != "auto" {
        log::warn!("sweeps use the default eigensolver; --backend is ignored");
    }
    let result = match &a.resume {
        Some(path) => sweep::resume(path, parallelism)?,
        None => {
            let base = ctx.rotor(&a.rotor)?;
            let mut grid = GridSpec::new(
                a.k_values.clone().or_else(|| g.k_values.clone()).ok_or_else(|| usage(anyhow!("--k-values is required")))?,
                a.lambda_values
                    .clone()
                    .or_else(|| g.lambda_values.clone())
                    .ok_or_else(|| usage(anyhow!("--lambda-values is required")))?,
                base,
            );
            if let Some(d) = a.diagnostics.as_ref().or(g.diagnostics.as_ref()) {
                grid.diagnostics = parse_diagnostics(d)?;
            }
            grid.base_seed = a.rotor.seed.or(g.base_seed).or(ctx.cfg.rotor.seed).unwrap_or(0);
            grid.wavepacket = ctx.wavepacket(&a.wavepacket, &base)?;
            grid.otoc_steps = ctx.steps(a.steps);
            let checkpoint = a.checkpoint.clone().or_else(|| g.checkpoint.clone());
            sweep::run_sweep(&grid, parallelism, checkpoint.as_deref())?
        }
    };
    let mut eff = ctx.effective();
    eff.rotor = Some(result.grid.base);
    eff.backend = None;
    emit_sweep(ctx, &result, &eff, parallelism)
}

fn emit_sweep(ctx: &Session, result: &SweepResult, eff: &EffectiveConfig, parallelism: usize) -> Outcome {
    let meta = with_config(
        &json!({
            "grid": result.grid,
            "thresholds": result.thresholds,
            "failed": result.failed(),
            "parallelism": parallelism,
        }),
        eff,
    )?;
    match ctx.format_or(Format::Csv) {
        Format::Json => ctx.emit_table(|w| result.write_jsonl(w), &meta),
        Format::Csv => ctx.emit_table(|w| result.write_csv(w), &meta),
    }
}
