//! Command-line front end: fit models to case data, score holdout windows,
//! forecast forward and export the effective infection rate.
//!
//! Exit codes: 0 success, 1 data problem (unreadable or invalid input
//! files), 2 numeric divergence, 3 bad flags or configuration.

mod artifacts;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chrono::Days;
use clap::{Args, Parser, Subcommand};

use epifit::{
    effect_input, evaluate_on_holdout, fit, integrate, load_case_series, load_region_config,
    predict_series, CaseSeries, Error, FitMethod, IntegratorConfig, IntegratorScheme,
    ModelVariant, RegionConfig, TrainingConfig,
};

use artifacts::{
    manifest_line, read_fit_artifact, write_json, EvaluationArtifact, FitArtifact, RunManifest,
};

const EXIT_DATA: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_FLAGS: u8 = 3;

/// A command failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(message: impl Display) -> Self {
        Failure {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }

    fn numeric(message: impl Display) -> Self {
        Failure {
            code: EXIT_NUMERIC,
            message: message.to_string(),
        }
    }

    fn flags(message: impl Display) -> Self {
        Failure {
            code: EXIT_FLAGS,
            message: message.to_string(),
        }
    }

    /// Classifies a library error by what it says about the run.
    fn from_error(error: Error) -> Self {
        let code = match &error {
            Error::NonFinite { .. } | Error::Divergence { .. } => EXIT_NUMERIC,
            Error::InvalidConfig(_)
            | Error::InputDimensionMismatch { .. }
            | Error::NetworkShape(_)
            | Error::GradientsRequireEuler
            | Error::MissingRate { .. }
            | Error::InactiveRate { .. }
            | Error::RateOutOfRange { .. }
            | Error::DimensionMismatch { .. } => EXIT_FLAGS,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: error.to_string(),
        }
    }
}

type CmdResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(
    name = "epifit",
    version,
    about = "Fit compartmental epidemic models to daily case series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a case series and write fit.json + loss_curve.csv.
    Fit(FitArgs),
    /// Recompute holdout metrics for an existing fit.
    Evaluate(EvaluateArgs),
    /// Integrate the fitted model past the training window.
    Forecast(ForecastArgs),
    /// Export the effective infection rate along the fitted trajectory.
    ExportRates(ExportRatesArgs),
}

fn parse_variant(s: &str) -> Result<ModelVariant, String> {
    ModelVariant::parse(s)
        .ok_or_else(|| format!("unknown variant '{s}' (expected sir|seir|sird|seird|smcrd|semcrd)"))
}

fn parse_method(s: &str) -> Result<FitMethod, String> {
    FitMethod::parse(s)
        .ok_or_else(|| format!("unknown method '{s}' (expected dde|const-grad|nelder-mead)"))
}

fn parse_scheme(s: &str) -> Result<IntegratorScheme, String> {
    match s {
        "euler" => Ok(IntegratorScheme::Euler),
        "rk4" => Ok(IntegratorScheme::Rk4),
        other => Err(format!("unknown integrator '{other}' (expected euler|rk4)")),
    }
}

#[derive(Args)]
struct FitArgs {
    /// Case series CSV (date,cumulative_cases,recovered,deaths).
    #[arg(long)]
    data: PathBuf,
    /// Region config JSON (region_id, population, e0_ratio, mild_fraction).
    #[arg(long)]
    region_config: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    variant: ModelVariant,
    #[arg(long, value_parser = parse_method)]
    method: FitMethod,
    /// Integrator used for inference; training always integrates with Euler.
    #[arg(long, value_parser = parse_scheme, default_value = "euler")]
    integrator: IntegratorScheme,
    /// Substeps per day, for both training and inference.
    #[arg(long, default_value_t = 4)]
    substeps: u32,
    /// Hidden layer widths of the effect network (dde only).
    #[arg(long, value_delimiter = ',', default_value = "16,16")]
    hidden: Vec<usize>,
    /// Optimizer iterations.
    #[arg(long, default_value_t = 5000)]
    iters: u32,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Seed for the effect network initialization.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Days held out from the end of the series for testing.
    #[arg(long, default_value_t = 20)]
    test_days: usize,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Path to a fit.json produced by `epifit fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Case series CSV; defaults to the path recorded in the fit manifest.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Region config JSON; defaults to the manifest's path.
    #[arg(long)]
    region_config: Option<PathBuf>,
    /// Must match the fitted variant when given.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<ModelVariant>,
    /// Output directory; defaults to the fit.json's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long)]
    fit: PathBuf,
    /// Days to integrate past the end of the training window.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    horizon: u32,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    region_config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportRatesArgs {
    #[arg(long)]
    fit: PathBuf,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    region_config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_FLAGS);
        }
    };
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Forecast(args) => cmd_forecast(args),
        Command::ExportRates(args) => cmd_export_rates(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn load_inputs(
    data: &Path,
    region_config: &Path,
) -> CmdResult<(CaseSeries, RegionConfig)> {
    let series = load_case_series(data).map_err(Failure::data)?;
    let region = load_region_config(region_config).map_err(Failure::data)?;
    region.validate().map_err(Failure::data)?;
    Ok((series, region))
}

fn ensure_out_dir(dir: &Path) -> CmdResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::data(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, body: &str) -> CmdResult<()> {
    fs::write(path, body).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))
}

fn cmd_fit(args: FitArgs) -> CmdResult<()> {
    if args.iters == 0 {
        return Err(Failure::flags("--iters must be at least 1"));
    }
    let training = TrainingConfig {
        iterations: args.iters,
        learning_rate: args.lr,
        substeps_per_day: args.substeps,
        hidden: args.hidden.clone(),
        seed: args.seed,
        ..TrainingConfig::default()
    };
    training.validate().map_err(|e| Failure::flags(e))?;
    let integrator = IntegratorConfig {
        scheme: args.integrator,
        substeps_per_day: args.substeps,
    };
    integrator.validate().map_err(|e| Failure::flags(e))?;

    let (series, region) = load_inputs(&args.data, &args.region_config)?;
    let train = if args.test_days > 0 {
        series
            .split_train_test(args.test_days)
            .map_err(Failure::data)?
            .0
    } else {
        series.clone()
    };

    let manifest = RunManifest {
        command: "fit".into(),
        data: args.data.display().to_string(),
        region_config: args.region_config.display().to_string(),
        variant: args.variant,
        method: args.method,
        integrator: integrator.clone(),
        training: training.clone(),
        test_days: args.test_days,
        out: args.out.display().to_string(),
    };

    let started = Instant::now();
    let result = fit(args.variant, args.method, &train, &region, &training)
        .map_err(Failure::from_error)?;
    let wall_time_secs = started.elapsed().as_secs_f64();

    let metrics = if args.test_days > 0 && result.diverged_at.is_none() {
        Some(
            evaluate_on_holdout(
                args.variant,
                &result.params,
                result.network.as_ref(),
                &series,
                &region,
                &integrator,
                args.test_days,
            )
            .map_err(Failure::from_error)?,
        )
    } else {
        None
    };

    ensure_out_dir(&args.out)?;
    let artifact = FitArtifact {
        manifest: manifest.clone(),
        variant: result.variant,
        method: result.method,
        params: result.params,
        network: result.network,
        final_loss: result.final_loss,
        diverged_at: result.diverged_at,
        metrics,
        wall_time_secs,
    };
    let fit_path = args.out.join("fit.json");
    write_json(&fit_path, &artifact)
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", fit_path.display())))?;

    let mut curve = String::new();
    curve.push_str(&manifest_line(&manifest));
    curve.push_str("\niteration,loss\n");
    for (i, loss) in result.loss_curve.iter().enumerate() {
        curve.push_str(&format!("{i},{loss}\n"));
    }
    write_file(&args.out.join("loss_curve.csv"), &curve)?;

    if let Some(iteration) = artifact.diverged_at {
        return Err(Failure::numeric(format!(
            "training diverged at iteration {iteration}; partial artifacts written to {}",
            args.out.display()
        )));
    }
    match &artifact.metrics {
        Some(m) => println!(
            "wrote {} (final_loss {:.6e}, holdout mean mse {:.6e}, mean pearson {})",
            fit_path.display(),
            artifact.final_loss,
            m.mean_mse_ten_thousand,
            m.mean_pearson
                .map(|p| format!("{p:.4}"))
                .unwrap_or_else(|| "undefined".into()),
        ),
        None => println!(
            "wrote {} (final_loss {:.6e})",
            fit_path.display(),
            artifact.final_loss
        ),
    }
    Ok(())
}

/// Resolves an optional CLI override against the path stored in the manifest.
fn resolve(explicit: Option<PathBuf>, from_manifest: &str) -> PathBuf {
    explicit.unwrap_or_else(|| PathBuf::from(from_manifest))
}

fn cmd_evaluate(args: EvaluateArgs) -> CmdResult<()> {
    let artifact = read_fit_artifact(&args.fit).map_err(Failure::data)?;
    if let Some(requested) = args.variant {
        if requested != artifact.variant {
            return Err(Failure::flags(format!(
                "variant mismatch: fit is {}, requested {}",
                artifact.variant, requested
            )));
        }
    }
    let data = resolve(args.data, &artifact.manifest.data);
    let region_config = resolve(args.region_config, &artifact.manifest.region_config);
    let (series, region) = load_inputs(&data, &region_config)?;
    if artifact.manifest.test_days == 0 {
        return Err(Failure::flags(
            "fit was trained without a holdout window (test_days = 0)",
        ));
    }
    let metrics = evaluate_on_holdout(
        artifact.variant,
        &artifact.params,
        artifact.network.as_ref(),
        &series,
        &region,
        &artifact.manifest.integrator,
        artifact.manifest.test_days,
    )
    .map_err(Failure::from_error)?;

    let out_dir = args
        .out
        .unwrap_or_else(|| args.fit.parent().unwrap_or(Path::new(".")).to_path_buf());
    ensure_out_dir(&out_dir)?;
    let report = EvaluationArtifact {
        manifest: artifact.manifest,
        fit: args.fit.display().to_string(),
        metrics,
    };
    let path = out_dir.join("evaluation.json");
    write_json(&path, &report)
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))?;
    println!(
        "wrote {} (mean mse {:.6e}, mean pearson {})",
        path.display(),
        report.metrics.mean_mse_ten_thousand,
        report
            .metrics
            .mean_pearson
            .map(|p| format!("{p:.4}"))
            .unwrap_or_else(|| "undefined".into()),
    );
    Ok(())
}

fn cmd_forecast(args: ForecastArgs) -> CmdResult<()> {
    let artifact = read_fit_artifact(&args.fit).map_err(Failure::data)?;
    let data = resolve(args.data, &artifact.manifest.data);
    let region_config = resolve(args.region_config, &artifact.manifest.region_config);
    let (series, region) = load_inputs(&data, &region_config)?;
    let test_days = artifact.manifest.test_days;
    let train = if test_days > 0 {
        series.split_train_test(test_days).map_err(Failure::data)?.0
    } else {
        series.clone()
    };

    let variant = artifact.variant;
    let integrator = &artifact.manifest.integrator;
    let trajectory = predict_series(
        variant,
        &artifact.params,
        artifact.network.as_ref(),
        &train,
        &region,
        integrator,
    )
    .map_err(Failure::from_error)?;
    let last_state = trajectory.last().expect("trajectory is non-empty");
    let horizon = args.horizon as usize;
    let forecast = integrate(
        variant,
        last_state,
        &artifact.params,
        artifact.network.as_ref(),
        horizon + 1,
        integrator,
    )
    .map_err(Failure::from_error)?;

    let last_day = train.len() - 1;
    let last_date = train.records[last_day].date;
    let mut body = String::new();
    body.push_str(&manifest_line(&artifact.manifest));
    body.push_str("\nday,date");
    for label in variant.labels() {
        body.push(',');
        body.push_str(&label.to_lowercase());
    }
    body.push_str(",infected\n");
    for (k, state) in forecast.iter().enumerate().skip(1) {
        let date = last_date + Days::new(k as u64);
        body.push_str(&format!("{},{}", last_day + k, date));
        for v in &state.values {
            body.push_str(&format!(",{v}"));
        }
        body.push_str(&format!(",{}\n", variant.infected_total(&state.values)));
    }

    let out_dir = args
        .out
        .unwrap_or_else(|| args.fit.parent().unwrap_or(Path::new(".")).to_path_buf());
    ensure_out_dir(&out_dir)?;
    let path = out_dir.join("forecast.csv");
    write_file(&path, &body)?;
    println!("wrote {} ({} days)", path.display(), horizon);
    Ok(())
}

fn cmd_export_rates(args: ExportRatesArgs) -> CmdResult<()> {
    let artifact = read_fit_artifact(&args.fit).map_err(Failure::data)?;
    let network = artifact.network.as_ref().ok_or_else(|| {
        Failure::flags(format!(
            "fit method {} stores no effect network; only dde fits export rates",
            artifact.method
        ))
    })?;
    let data = resolve(args.data, &artifact.manifest.data);
    let region_config = resolve(args.region_config, &artifact.manifest.region_config);
    let (series, region) = load_inputs(&data, &region_config)?;

    let variant = artifact.variant;
    let trajectory = predict_series(
        variant,
        &artifact.params,
        Some(network),
        &series,
        &region,
        &artifact.manifest.integrator,
    )
    .map_err(Failure::from_error)?;

    let beta_star = artifact.params.beta_star;
    let mut body = String::new();
    body.push_str(&manifest_line(&artifact.manifest));
    body.push_str("\nday,date,beta_initial,beta_effective\n");
    for (day, state) in trajectory.iter().enumerate() {
        let input = effect_input(variant, &state.values, region.population);
        let eff = network.eff(&input).map_err(Failure::from_error)?;
        let date = series.records[day].date;
        body.push_str(&format!("{day},{date},{beta_star},{}\n", beta_star * eff));
    }

    let out_dir = args
        .out
        .unwrap_or_else(|| args.fit.parent().unwrap_or(Path::new(".")).to_path_buf());
    ensure_out_dir(&out_dir)?;
    let path = out_dir.join("rates.csv");
    write_file(&path, &body)?;
    println!("wrote {} ({} days)", path.display(), trajectory.len());
    Ok(())
}
