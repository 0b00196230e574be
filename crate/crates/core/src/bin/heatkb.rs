use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use heatkb::engine::EngineParams;
use heatkb::replay::{render, run_replay_file, OutputFormat};
use heatkb::scenario::{gen_scenario, Scenario};
use heatkb::service::{serve, ServiceConfig, DEFAULT_LISTEN, DEFAULT_TIME_SCALE};

const EXIT_INPUT: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "heatkb", version, about = "Heating-up keyboard usage feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay an event log and print one temperature record per period.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Left edge of period 0; defaults to the log's origin directive or
        /// the first event rounded down to a whole period.
        #[arg(long)]
        origin_ms: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print a synthetic event log.
    ///
    /// Periods are 30 minutes starting at t = 0. notification-storm draws
    /// 12 glances per hour lasting 3-15 s; typical-day is quiet for the
    /// first 25% of the span, has 5-25 minute sessions (a quarter of them
    /// with a 1-4 minute call) over the next 45%, then 2 glances per hour.
    Gen {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        periods: u64,
    },
    /// Run the live feedback service.
    Serve {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0)]
        origin_ms: u64,
        /// Simulated seconds per wall-clock second.
        #[arg(long, default_value_t = DEFAULT_TIME_SCALE)]
        time_scale: f64,
        #[arg(long, default_value = DEFAULT_LISTEN)]
        listen: String,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// Sampling period, seconds.
    #[arg(long, default_value_t = 1800.0)]
    period_s: f64,
    /// Notification correction time, seconds.
    #[arg(long, default_value_t = 300.0)]
    notif_s: f64,
    /// Intervals shorter than this many seconds are corrected.
    #[arg(long, default_value_t = 30.0)]
    threshold_s: f64,
    /// Forgetting coefficient, 0 < alpha < 1.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Quantizer strictness exponent, > 0.
    #[arg(long, default_value_t = 1.0)]
    strictness: f64,
    /// Number of temperature levels, 2-8.
    #[arg(long, default_value_t = 5)]
    levels: u8,
}

impl ParamArgs {
    fn build(&self) -> Result<EngineParams, String> {
        let params = EngineParams::from_seconds(
            self.period_s,
            self.notif_s,
            self.threshold_s,
            self.alpha,
            self.strictness,
            self.levels,
        )
        .map_err(|e| e.to_string())?;
        for warning in params.validate().map_err(|e| e.to_string())? {
            eprintln!("warning: {warning}");
        }
        Ok(params)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    TypicalDay,
    Uninterrupted,
    Idle,
    NotificationStorm,
}

impl From<ScenarioArg> for Scenario {
    fn from(arg: ScenarioArg) -> Self {
        match arg {
            ScenarioArg::TypicalDay => Scenario::TypicalDay,
            ScenarioArg::Uninterrupted => Scenario::Uninterrupted,
            ScenarioArg::Idle => Scenario::Idle,
            ScenarioArg::NotificationStorm => Scenario::NotificationStorm,
        }
    }
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Replay { log, params, origin_ms, format } => {
            let params = match params.build() {
                Ok(p) => p,
                Err(e) => return usage_error(e),
            };
            match run_replay_file(&log, &params, origin_ms) {
                Ok(records) => {
                    let format = match format {
                        Format::Csv => OutputFormat::Csv,
                        Format::Jsonl => OutputFormat::Jsonl,
                    };
                    print!("{}", render(&records, format));
                    ExitCode::SUCCESS
                }
                Err(e) if e.is_usage() => usage_error(e),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
        Command::Gen { scenario, seed, periods } => {
            print!("{}", gen_scenario(scenario.into(), seed, periods));
            ExitCode::SUCCESS
        }
        Command::Serve { params, origin_ms, time_scale, listen } => {
            let params = match params.build() {
                Ok(p) => p,
                Err(e) => return usage_error(e),
            };
            let config = ServiceConfig { params, origin_ms, time_scale, listen };
            if let Err(e) = config.validate() {
                return usage_error(e);
            }
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            match runtime.block_on(serve(config)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
    }
}
