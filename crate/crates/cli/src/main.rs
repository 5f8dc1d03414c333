use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lptime_cli::pipeline::{render, run_pipeline, run_stage, Context, Stage};
use lptime_cli::{CliResult, ConfigArgs};

/// Mid-rank LP analysis of a univariate time series.
#[derive(Parser)]
#[command(name = "lptime", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: ConfigArgs,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Mid-ranks and LP score components of every observation.
    Transform,
    /// Informative quantile function.
    Qiq,
    /// LP moments, tail index and nearest reference distribution.
    Moments,
    /// Lag comoment matrix with BIC smoothing.
    Comoment,
    /// Autocorrelations of every LP component.
    Correlogram,
    /// Serial copula density on a grid.
    Copula,
    /// AutoLPinfor and Granger-Lin divergence by lag.
    Autolpinfor,
    /// Comoments against the time index.
    Nonstat,
    /// Quantile correlation curve with Gaussian reference.
    Quantcorr,
    /// Conditional LPinfor curve.
    Condinfor,
    /// Simulated conditional quantiles.
    Condquant,
    /// Blomqvist beta of the series and each component.
    Blomqvist,
    /// Burg AR spectra of the normalized series and components.
    Spectrum,
    /// Copula spectral density.
    Copspec,
    /// Vector autoregression on LP components.
    Var,
    /// Forecasts from the fitted VAR.
    Forecast,
    /// Every report, written to --out-dir with a manifest.
    Run,
}

impl Command {
    fn stage(self) -> Option<Stage> {
        Some(match self {
            Command::Transform => Stage::Transform,
            Command::Qiq => Stage::Qiq,
            Command::Moments => Stage::Moments,
            Command::Comoment => Stage::Comoment,
            Command::Correlogram => Stage::Correlogram,
            Command::Copula => Stage::Copula,
            Command::Autolpinfor => Stage::Autolpinfor,
            Command::Nonstat => Stage::Nonstat,
            Command::Quantcorr => Stage::Quantcorr,
            Command::Condinfor => Stage::Condinfor,
            Command::Condquant => Stage::Condquant,
            Command::Blomqvist => Stage::Blomqvist,
            Command::Spectrum => Stage::Spectrum,
            Command::Copspec => Stage::Copspec,
            Command::Var => Stage::Var,
            Command::Forecast => Stage::Forecast,
            Command::Run => return None,
        })
    }
}

fn execute(cli: &Cli) -> CliResult<i32> {
    let config = cli.args.resolve()?;
    match cli.command.stage() {
        None => {
            let manifest = run_pipeline(config)?;
            eprintln!(
                "seed {} | {} of {} stages ok",
                manifest.seed.unwrap_or_default(),
                manifest.stages.iter().filter(|s| s.status == "ok").count(),
                manifest.stages.len()
            );
            Ok(manifest.exit_code())
        }
        Some(stage) => {
            let format = config.format;
            let output = config.output.clone();
            let ctx = Context::load(config)?;
            if ctx.seed_generated {
                eprintln!("seed {}", ctx.seed);
            }
            let report = run_stage(stage, &ctx)?;
            lptime_cli::io::write_text(output.as_deref(), &render(&ctx, stage, &report, format)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("lptime: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
