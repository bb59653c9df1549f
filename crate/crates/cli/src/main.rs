use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use prequential::rational::{self, Rational};
use prequential::{CheckMode, Forecast};
use prequential_cli::{
    cmd_counterexample, cmd_duality_sweep, cmd_levy_trace, cmd_prob, cmd_test_stream, cmd_value, cmd_verify,
    cmd_ville, cmd_witness, Engine, Exit, Outcome, StrategyChoice, SystemSource,
};

#[derive(Parser)]
#[command(name = "preq", version, about = "Exact upper probabilities and tests for prequential forecasting")]
struct Cli {
    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Game,
    Measure,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Doubling,
    Constant,
    Linear,
    Calibration,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Super,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Upper probability of an event.
    Value {
        #[arg(long)]
        event: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        engine: EngineArg,
        /// Write the measure engine's maximizing forecasting system here.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// The two-step events whose upper probabilities are not strongly subadditive.
    Counterexample {
        /// Use the measure engine instead of the game engine.
        #[arg(long)]
        measure: bool,
    },
    /// Calibration test of a forecast/outcome stream.
    TestStream {
        #[arg(long)]
        stream: PathBuf,
        #[arg(short = 'N', long = "horizon")]
        horizon: usize,
        #[arg(short = 'C', long = "threshold", value_parser = parse_rational)]
        threshold: Rational,
    },
    /// Empirical Ville inequality for a betting strategy.
    Ville {
        /// Forecasting system JSON; defaults to a constant forecast.
        #[arg(long, conflicts_with = "forecast")]
        phi: Option<PathBuf>,
        #[arg(long, value_parser = parse_rational, default_value = "1/2")]
        forecast: Rational,
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        #[arg(long, value_enum, default_value = "doubling")]
        strategy: StrategyArg,
        /// Betting fraction for the linear strategy.
        #[arg(long, value_parser = parse_rational, default_value = "1/2")]
        lambda: Rational,
        /// Threshold of the calibration strategy.
        #[arg(long, value_parser = parse_rational, default_value = "2")]
        calibration_threshold: Rational,
        #[arg(short = 'C', long = "threshold", value_parser = parse_rational)]
        threshold: Rational,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, env = "PREQ_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Compare the engines on seeded random events.
    DualitySweep {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, env = "PREQ_SEED", default_value_t = 0)]
        seed: u64,
        /// Also compare with brute force over forecasts on {0, 1/K, ..., 1}.
        #[arg(long)]
        grid: Option<u32>,
    },
    /// Trace of Lévy's strategy along a stream.
    LevyTrace {
        #[arg(long)]
        event: PathBuf,
        #[arg(short = 'a', long = "threshold", value_parser = parse_rational)]
        threshold: Rational,
        /// Forecast/outcome CSV; defaults to a random member of the event.
        #[arg(long)]
        stream: Option<PathBuf>,
        #[arg(long, env = "PREQ_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Witness superfarthingale of an event as a JSON value table.
    Witness {
        #[arg(long)]
        event: PathBuf,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a value table for the farthingale property.
    Verify {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum, default_value = "super")]
        mode: ModeArg,
    },
    /// Exact and Monte Carlo probability of an event under a forecasting system.
    Prob {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        event: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, env = "PREQ_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Value { event, engine, witness_out } => {
            let engine = match engine {
                EngineArg::Game => Engine::Game,
                EngineArg::Measure => Engine::Measure,
                EngineArg::Both => Engine::Both,
            };
            cmd_value(&event, engine, witness_out.as_deref())
        }
        Command::Counterexample { measure } => cmd_counterexample(measure),
        Command::TestStream { stream, horizon, threshold } => cmd_test_stream(&stream, horizon, &threshold),
        Command::Ville {
            phi,
            forecast,
            horizon,
            strategy,
            lambda,
            calibration_threshold,
            threshold,
            samples,
            seed,
        } => {
            let source = match &phi {
                Some(path) => SystemSource::File(path),
                None => SystemSource::Constant {
                    forecast: Forecast::new(forecast).context("invalid --forecast")?,
                    horizon,
                },
            };
            let choice = match strategy {
                StrategyArg::Doubling => StrategyChoice::Doubling,
                StrategyArg::Constant => StrategyChoice::Constant,
                StrategyArg::Linear => StrategyChoice::Linear(lambda),
                StrategyArg::Calibration => StrategyChoice::Calibration(calibration_threshold),
            };
            cmd_ville(source, &choice, &threshold, samples, seed)
        }
        Command::DualitySweep { count, seed, grid } => cmd_duality_sweep(count, seed, grid),
        Command::LevyTrace { event, threshold, stream, seed } => {
            cmd_levy_trace(&event, &threshold, stream.as_deref(), seed)
        }
        Command::Witness { event, out } => {
            let (outcome, table) = cmd_witness(&event)?;
            match out {
                Some(path) => std::fs::write(&path, table).with_context(|| format!("cannot write {}", path.display()))?,
                None => println!("{table}"),
            }
            Ok(outcome)
        }
        Command::Verify { table, mode } => {
            let mode = match mode {
                ModeArg::Exact => CheckMode::Exact,
                ModeArg::Super => CheckMode::Super,
            };
            cmd_verify(&table, mode)
        }
        Command::Prob { phi, event, samples, seed } => cmd_prob(&phi, &event, samples, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let is_witness_stdout = matches!(&cli.command, Command::Witness { out: None, .. });
    match run(cli.command) {
        Ok(outcome) => {
            let rendered = if json { outcome.report.to_json() } else { outcome.report.to_text() };
            if is_witness_stdout {
                eprintln!("{rendered}");
            } else {
                println!("{rendered}");
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(Exit::InputError as u8)
        }
    }
}
