//! Commands behind the `preq` binary. Each command returns a [`Report`]
//! and an [`Exit`] code; argument parsing lives in `main.rs`.

pub mod report;

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prequential::events::{counterexample_a, counterexample_b};
use prequential::measureprob::{self, GRID_LIMIT};
use prequential::random::{random_member, EventSampler};
use prequential::rational::{self, Rational};
use prequential::strategies::{
    self, check_farthingale, running_bias, AllInOnOne, CalibrationStrategy, CheckMode, ConstantStrategy,
    LinearBet, Strategy,
};
use prequential::{
    exact_event_probability, measure_upper_probability, upper_game_probability, witness_superfarthingale,
    EventUnion, Forecast, ForecastingSystem, LevyStrategy, ValueFunction,
};

pub use report::{Check, Report, Status};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// An internal invariant failed: a bug in the engines.
    Violation = 1,
    /// Unreadable or inconsistent input.
    InputError = 2,
    /// A statistical test rejected the forecasts.
    Rejection = 3,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit: Exit,
}

impl Outcome {
    fn from_checks(report: Report) -> Outcome {
        let exit = if report.all_passed() { Exit::Success } else { Exit::Violation };
        Outcome { report, exit }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Game,
    Measure,
    Both,
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_event(path: &Path, report: &mut Report, key: &str) -> Result<EventUnion> {
    let bytes = read_input(path)?;
    report.input_file(key, &path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).context("event file is not UTF-8")?;
    EventUnion::from_json(&text).with_context(|| format!("cannot parse event file {}", path.display()))
}

fn load_system(path: &Path, report: &mut Report) -> Result<ForecastingSystem> {
    let bytes = read_input(path)?;
    report.input_file("phi", &path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).context("forecasting system file is not UTF-8")?;
    ForecastingSystem::from_json(&text)
        .with_context(|| format!("cannot parse forecasting system {}", path.display()))
}

fn load_stream(path: &Path, report: &mut Report) -> Result<Vec<prequential::Step>> {
    let bytes = read_input(path)?;
    report.input_file("stream", &path.display().to_string(), &bytes);
    strategies::read_stream(bytes.as_slice()).with_context(|| format!("cannot parse stream {}", path.display()))
}

/// Upper probability of an event from one or both engines. With
/// [`Engine::Both`] the two exact values must agree.
pub fn cmd_value(event_path: &Path, engine: Engine, witness_out: Option<&Path>) -> Result<Outcome> {
    let mut report = Report::new("value");
    let event = load_event(event_path, &mut report, "event")?;
    report.input("engine", format!("{engine:?}").to_lowercase());
    let game = matches!(engine, Engine::Game | Engine::Both).then(|| upper_game_probability(&event));
    let measure = matches!(engine, Engine::Measure | Engine::Both).then(|| measure_upper_probability(&event));
    if let Some(g) = &game {
        report.rational("upper_game_probability", g);
    }
    if let Some((m, witness)) = &measure {
        report.rational("upper_measure_probability", m);
        let attained = exact_event_probability(witness, &event)?;
        report.check(
            "witness attains value",
            attained == *m,
            format!("witness probability {} vs value {}", rational::render(&attained), rational::render(m)),
        );
        if let Some(out) = witness_out {
            fs::write(out, witness.to_json()?).with_context(|| format!("cannot write {}", out.display()))?;
            report.input("witness_out", out.display());
        }
    }
    if let (Some(g), Some((m, _))) = (&game, &measure) {
        report.check(
            "game value equals measure value",
            g == m,
            format!("game {} != measure {}", rational::render(g), rational::render(m)),
        );
    }
    Ok(Outcome::from_checks(report))
}

/// Upper probabilities of the built-in events A, B, A∪B, A∩B and the
/// violated strong-subadditivity inequality.
pub fn cmd_counterexample(measure: bool) -> Result<Outcome> {
    let mut report = Report::new("counterexample");
    report.input("engine", if measure { "measure" } else { "game" });
    let a = counterexample_a();
    let b = counterexample_b();
    let value = |e: &EventUnion| {
        if measure {
            measure_upper_probability(e).0
        } else {
            upper_game_probability(e)
        }
    };
    let named = [
        ("A", a.clone(), rational::ratio(1, 2)),
        ("B", b.clone(), rational::ratio(1, 2)),
        ("A_union_B", a.union(&b)?, rational::int(1)),
        ("A_intersect_B", a.intersection(&b)?, rational::ratio(1, 2)),
    ];
    let mut values = Vec::new();
    for (name, event, expected) in &named {
        let v = value(event);
        report.rational(&format!("UpProb({name})"), &v);
        report.check(
            &format!("UpProb({name}) = {}", rational::render(expected)),
            v == *expected,
            format!("got {}", rational::render(&v)),
        );
        values.push(v);
    }
    let lhs = &values[2] + &values[3];
    let rhs = &values[0] + &values[1];
    report.rational("union_plus_intersection", &lhs);
    report.rational("sum_of_parts", &rhs);
    report.check(
        "strong subadditivity violated (3/2 > 1)",
        lhs == rational::ratio(3, 2) && rhs == rational::int(1) && lhs > rhs,
        format!("{} vs {}", rational::render(&lhs), rational::render(&rhs)),
    );
    Ok(Outcome::from_checks(report))
}

/// Finite-horizon calibration test on the first `horizon` steps of a
/// stream. Rejection exits with [`Exit::Rejection`].
pub fn cmd_test_stream(stream_path: &Path, horizon: usize, threshold: &Rational) -> Result<Outcome> {
    let mut report = Report::new("test-stream");
    let stream = load_stream(stream_path, &mut report)?;
    report.input("N", horizon);
    report.input("C", rational::render(threshold));
    if stream.len() < horizon {
        bail!("stream has {} rows, test needs N = {horizon}", stream.len());
    }
    let window = &stream[..horizon];
    let mut strategy = CalibrationStrategy::new(horizon, threshold.clone())?;
    let process = strategies::run_stream(&mut strategy, window)?;
    let state = strategy.state();
    let verdict = state.verdict()?;
    report
        .rational("S_N", state.sum())
        .rational("A_N", state.variance())
        .rational("initial_capital", &process.initial_capital)
        .rational("final_capital", process.final_capital())
        .rational("capital_ratio", &verdict.ratio)
        .float("final_capital_float", rational::to_f64(process.final_capital()))
        .float("mean_bias", running_bias(window).last().copied().unwrap_or(0.0))
        .text("verdict", if verdict.reject { "reject" } else { "no_reject" });
    let floor = rational::int(4) * threshold * threshold;
    report.check(
        "rejection implies capital ratio >= 4C^2",
        !verdict.reject || verdict.ratio >= floor,
        format!("ratio {} below {}", rational::render(&verdict.ratio), rational::render(&floor)),
    );
    let mut outcome = Outcome::from_checks(report);
    if outcome.exit == Exit::Success && verdict.reject {
        outcome.exit = Exit::Rejection;
    }
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyChoice {
    Doubling,
    Constant,
    Linear(Rational),
    Calibration(Rational),
}

#[derive(Clone, Debug)]
enum AnyStrategy {
    Doubling(AllInOnOne),
    Constant(ConstantStrategy),
    Linear(LinearBet),
    Calibration(CalibrationStrategy),
}

impl Strategy for AnyStrategy {
    fn name(&self) -> String {
        match self {
            AnyStrategy::Doubling(s) => s.name(),
            AnyStrategy::Constant(s) => s.name(),
            AnyStrategy::Linear(s) => s.name(),
            AnyStrategy::Calibration(s) => s.name(),
        }
    }

    fn initial_capital(&self) -> Rational {
        match self {
            AnyStrategy::Doubling(s) => s.initial_capital(),
            AnyStrategy::Constant(s) => s.initial_capital(),
            AnyStrategy::Linear(s) => s.initial_capital(),
            AnyStrategy::Calibration(s) => s.initial_capital(),
        }
    }

    fn capital(&self) -> Rational {
        match self {
            AnyStrategy::Doubling(s) => s.capital(),
            AnyStrategy::Constant(s) => s.capital(),
            AnyStrategy::Linear(s) => s.capital(),
            AnyStrategy::Calibration(s) => s.capital(),
        }
    }

    fn horizon(&self) -> Option<usize> {
        match self {
            AnyStrategy::Calibration(s) => s.horizon(),
            _ => None,
        }
    }

    fn step(&mut self, forecast: &Forecast, outcome: prequential::Outcome) -> prequential::Result<Rational> {
        match self {
            AnyStrategy::Doubling(s) => s.step(forecast, outcome),
            AnyStrategy::Constant(s) => s.step(forecast, outcome),
            AnyStrategy::Linear(s) => s.step(forecast, outcome),
            AnyStrategy::Calibration(s) => s.step(forecast, outcome),
        }
    }
}

pub enum SystemSource<'a> {
    File(&'a Path),
    Constant { forecast: Forecast, horizon: usize },
}

/// Empirical check of Ville's inequality for a certified strategy.
pub fn cmd_ville(
    source: SystemSource<'_>,
    choice: &StrategyChoice,
    threshold: &Rational,
    samples: usize,
    seed: u64,
) -> Result<Outcome> {
    let mut report = Report::new("ville");
    report.seed = Some(seed);
    let phi = match source {
        SystemSource::File(path) => load_system(path, &mut report)?,
        SystemSource::Constant { forecast, horizon } => {
            report.input("phi", format!("constant {forecast} over {horizon} steps"));
            ForecastingSystem::constant(horizon, forecast)?
        }
    };
    let strategy = match choice {
        StrategyChoice::Doubling => AnyStrategy::Doubling(AllInOnOne::new(rational::int(1))),
        StrategyChoice::Constant => AnyStrategy::Constant(ConstantStrategy::new(rational::int(1))),
        StrategyChoice::Linear(lambda) => AnyStrategy::Linear(LinearBet::new(lambda.clone(), rational::int(1))?),
        StrategyChoice::Calibration(c) => {
            AnyStrategy::Calibration(CalibrationStrategy::new(phi.horizon(), c.clone())?)
        }
    };
    report.input("strategy", strategy.name());
    report.input("C", rational::render(threshold));
    report.input("samples", samples);
    let ville = strategies::ville_check(&phi, &strategy, threshold, samples, seed)?;
    report
        .float("frequency", ville.frequency)
        .float("bound", ville.bound)
        .text("hits", ville.hits);
    let slack = 4.0 * (ville.bound / samples as f64).sqrt();
    report.check(
        "frequency <= V(0)/C + 4 sqrt(bound/samples)",
        ville.pass,
        format!(
            "frequency {} exceeds {}",
            rational::render_float(ville.frequency),
            rational::render_float(ville.bound + slack)
        ),
    );
    Ok(Outcome::from_checks(report))
}

/// Seeded sweep comparing the two engines (and, with a grid, the
/// brute-force oracle) on random events.
pub fn cmd_duality_sweep(count: usize, seed: u64, grid: Option<u32>) -> Result<Outcome> {
    let mut report = Report::new("duality-sweep");
    report.seed = Some(seed);
    report.input("count", count);
    let sampler = match grid {
        Some(k) => {
            report.input("grid", k);
            EventSampler::on_grid(2, 3, k as i64)
        }
        None => EventSampler::desk_scale(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = Vec::new();
    let mut oracle_runs = 0usize;
    let mut oracle_mismatches = Vec::new();
    for i in 0..count {
        let event = sampler.event(&mut rng);
        let game = upper_game_probability(&event);
        let (measure, witness) = measure_upper_probability(&event);
        let attained = exact_event_probability(&witness, &event)?;
        if game != measure || attained != measure {
            disagreements.push(format!(
                "#{i}: game {} measure {} witness {}",
                rational::render(&game),
                rational::render(&measure),
                rational::render(&attained)
            ));
        }
        if let Some(k) = grid {
            match measureprob::grid_bruteforce(&event, k) {
                Ok(brute) => {
                    oracle_runs += 1;
                    if brute != measure {
                        oracle_mismatches.push(format!("#{i}: grid {} measure {}", rational::render(&brute), rational::render(&measure)));
                    }
                }
                Err(prequential::Error::EnumerationTooLarge { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    report.text("events", count).text("disagreements", disagreements.len());
    report.check("game value = measure value = witness probability", disagreements.is_empty(), disagreements.join("; "));
    if grid.is_some() {
        report.text("grid_oracle_runs", oracle_runs);
        report.text("grid_limit", GRID_LIMIT);
        report.check("grid oracle agrees", oracle_mismatches.is_empty(), oracle_mismatches.join("; "));
    }
    Ok(Outcome::from_checks(report))
}

/// Runs the Lévy strategy over a stream, or over a seeded random member of
/// the event when no stream is given, and reports its trace.
pub fn cmd_levy_trace(event_path: &Path, threshold: &Rational, stream_path: Option<&Path>, seed: u64) -> Result<Outcome> {
    let mut report = Report::new("levy-trace");
    let event = load_event(event_path, &mut report, "event")?;
    report.input("a", rational::render(threshold));
    let stream = match stream_path {
        Some(path) => load_stream(path, &mut report)?,
        None => {
            report.seed = Some(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_member(&event, &mut rng)
                .ok_or_else(|| anyhow!("the event is empty; pass --stream to trace a path"))?
                .steps()
                .to_vec()
        }
    };
    if stream.len() > event.horizon() {
        bail!("stream has {} rows but the event horizon is {}", stream.len(), event.horizon());
    }
    let mut levy = LevyStrategy::new(event.clone(), threshold.clone())?;
    let process = strategies::run_stream(&mut levy, &stream)?;
    for record in levy.trace() {
        let regime = match &record.regime {
            prequential::gameprob::Regime::Waiting => "waiting".to_string(),
            prequential::gameprob::Regime::Riding { base_capital, .. } => {
                format!("riding from {}", rational::render(base_capital))
            }
            prequential::gameprob::Regime::Terminal => "terminal".to_string(),
        };
        report.text(
            &format!("step_{:03}", record.step),
            format!(
                "UpProb(E|x)={} capital={} {regime}",
                rational::render(&record.conditional),
                rational::render(&record.capital)
            ),
        );
    }
    report.rational("final_capital", process.final_capital());
    report.text("switches", format!("{:?}", levy.switches()));
    report.check(
        "capital stays non-negative",
        process.trajectory.iter().all(|c| *c >= rational::zero()),
        "negative capital in trajectory",
    );
    let path = prequential::PrequentialPrefix::new(stream.clone());
    if stream.len() == event.horizon() && event.contains(&path)? && upper_game_probability(&event) < *threshold {
        let target = rational::int(1) / threshold;
        report.check(
            "capital reaches 1/a on a member of the event",
            *process.final_capital() >= target,
            format!("final {} < {}", rational::render(process.final_capital()), rational::render(&target)),
        );
    }
    Ok(Outcome::from_checks(report))
}

/// Exact and Monte Carlo probability of an event under a forecasting
/// system.
pub fn cmd_prob(phi_path: &Path, event_path: &Path, samples: usize, seed: u64) -> Result<Outcome> {
    let mut report = Report::new("prob");
    report.seed = Some(seed);
    let phi = load_system(phi_path, &mut report)?;
    let event = load_event(event_path, &mut report, "event")?;
    report.input("samples", samples);
    let exact = exact_event_probability(&phi, &event)?;
    let upper = upper_game_probability(&event);
    let mc = measureprob::monte_carlo_probability(&phi, &event, samples, seed)?;
    report
        .rational("exact_probability", &exact)
        .rational("upper_game_probability", &upper)
        .float("monte_carlo_estimate", mc.estimate)
        .float("monte_carlo_half_width", mc.half_width);
    report.check(
        "exact probability <= upper probability",
        exact <= upper,
        format!("{} > {}", rational::render(&exact), rational::render(&upper)),
    );
    Ok(Outcome::from_checks(report))
}

/// Witness superfarthingale table of an event, as JSON.
pub fn cmd_witness(event_path: &Path) -> Result<(Outcome, String)> {
    let mut report = Report::new("witness");
    let event = load_event(event_path, &mut report, "event")?;
    let table = witness_superfarthingale(&event);
    let root = table.root_value()?.clone();
    report.rational("root_value", &root).text("nodes", table.values().len());
    let check = check_farthingale(&table, CheckMode::Super)?;
    report.check("table is a superfarthingale", check.passed(), format!("{} violations", check.violations.len()));
    Ok((Outcome::from_checks(report), table.to_json()?))
}

/// Checks a cell-indexed value table against the (super)farthingale
/// property.
pub fn cmd_verify(table_path: &Path, mode: CheckMode) -> Result<Outcome> {
    let mut report = Report::new("verify");
    let bytes = read_input(table_path)?;
    report.input_file("table", &table_path.display().to_string(), &bytes);
    report.input("mode", format!("{mode:?}").to_lowercase());
    let text = String::from_utf8(bytes).context("table file is not UTF-8")?;
    let table = ValueFunction::from_json(&text).context("cannot parse value table")?;
    let check = check_farthingale(&table, mode)?;
    report.text("violations", check.violations.len());
    let detail = check
        .violations
        .iter()
        .take(10)
        .map(|v| {
            format!(
                "node [{}] p={}: value {} vs average {}",
                v.node,
                rational::render(&v.forecast),
                rational::render(&v.value),
                rational::render(&v.average)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    report.check("farthingale property", check.passed(), detail);
    Ok(Outcome::from_checks(report))
}
