//! Betting strategies against forecast streams and the checks that certify
//! them as (super)farthingales.
//!
//! A strategy only ever sees the forecasts and outcomes it is fed, one
//! `(p, y)` pair at a time, so the forecaster's internal rule never reaches
//! it.

use std::io::Read;

use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forecasting::ForecastingSystem;
use crate::gameprob::{CellPath, ValueFunction};
use crate::kernel::mix;
use crate::rational::{self, Rational};
use crate::types::{Forecast, Outcome, Step};

/// A gambler's capital process driven by a forecast/outcome stream.
pub trait Strategy {
    fn name(&self) -> String;

    /// Capital before the first step.
    fn initial_capital(&self) -> Rational;

    /// Capital after the steps consumed so far.
    fn capital(&self) -> Rational;

    /// Number of steps the strategy is defined for, if bounded.
    fn horizon(&self) -> Option<usize> {
        None
    }

    /// Consumes one step and returns the new capital.
    fn step(&mut self, forecast: &Forecast, outcome: Outcome) -> Result<Rational>;
}

// ---------------------------------------------------------------------------
// Elementary strategies

/// Never bets.
#[derive(Clone, Debug)]
pub struct ConstantStrategy {
    capital: Rational,
}

impl ConstantStrategy {
    pub fn new(capital: Rational) -> Self {
        ConstantStrategy { capital }
    }
}

impl Strategy for ConstantStrategy {
    fn name(&self) -> String {
        "constant".into()
    }

    fn initial_capital(&self) -> Rational {
        self.capital.clone()
    }

    fn capital(&self) -> Rational {
        self.capital.clone()
    }

    fn step(&mut self, _: &Forecast, _: Outcome) -> Result<Rational> {
        Ok(self.capital.clone())
    }
}

/// Stakes the whole capital on outcome 1 at the quoted odds: capital is
/// multiplied by `1/p` on a 1 and lost on a 0. A forecast of 0 offers no
/// odds, so the strategy sits that step out. Under fair-coin forecasts this
/// is the doubling strategy.
#[derive(Clone, Debug)]
pub struct AllInOnOne {
    initial: Rational,
    capital: Rational,
}

impl AllInOnOne {
    pub fn new(initial: Rational) -> Self {
        AllInOnOne {
            capital: initial.clone(),
            initial,
        }
    }
}

impl Strategy for AllInOnOne {
    fn name(&self) -> String {
        "doubling".into()
    }

    fn initial_capital(&self) -> Rational {
        self.initial.clone()
    }

    fn capital(&self) -> Rational {
        self.capital.clone()
    }

    fn step(&mut self, forecast: &Forecast, outcome: Outcome) -> Result<Rational> {
        if !forecast.value().is_zero() {
            self.capital = match outcome {
                Outcome::One => &self.capital / forecast.value(),
                Outcome::Zero => Rational::zero(),
            };
        }
        Ok(self.capital.clone())
    }
}

/// Multiplies capital by `1 + λ(y − p)` each step, `|λ| ≤ 1`.
#[derive(Clone, Debug)]
pub struct LinearBet {
    lambda: Rational,
    initial: Rational,
    capital: Rational,
}

impl LinearBet {
    pub fn new(lambda: Rational, initial: Rational) -> Result<Self> {
        if lambda.abs() > Rational::one() {
            return Err(Error::State(format!(
                "bet fraction {} must lie in [-1, 1]",
                rational::render(&lambda)
            )));
        }
        Ok(LinearBet {
            lambda,
            capital: initial.clone(),
            initial,
        })
    }
}

impl Strategy for LinearBet {
    fn name(&self) -> String {
        format!("linear(lambda={})", rational::render(&self.lambda))
    }

    fn initial_capital(&self) -> Rational {
        self.initial.clone()
    }

    fn capital(&self) -> Rational {
        self.capital.clone()
    }

    fn step(&mut self, forecast: &Forecast, outcome: Outcome) -> Result<Rational> {
        let factor = Rational::one() + &self.lambda * (outcome.as_rational() - forecast.value());
        self.capital *= factor;
        Ok(self.capital.clone())
    }
}

// ---------------------------------------------------------------------------
// Calibration test

/// Running statistics of the finite-horizon calibration test.
///
/// `sum` is `S_n = Σ (y_i − p_i)` and `variance` is `A_n = Σ p_i (1 − p_i)`.
/// The capital `(S_n² − A_n + N/4) / (C²N + N/4)` is a non-negative
/// farthingale: conditional on the past, `S²` grows by `p(1−p)` in
/// expectation, which the `A` term cancels, and `A_n ≤ N/4` keeps the
/// numerator non-negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalibrationState {
    horizon: usize,
    threshold: Rational,
    steps: usize,
    sum: Rational,
    variance: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalibrationVerdict {
    pub reject: bool,
    /// Final over initial capital.
    pub ratio: Rational,
}

impl CalibrationState {
    pub fn new(horizon: usize, threshold: Rational) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::State("calibration horizon must be positive".into()));
        }
        if !threshold.is_positive() {
            return Err(Error::State("calibration threshold C must be positive".into()));
        }
        Ok(CalibrationState {
            horizon,
            threshold,
            steps: 0,
            sum: Rational::zero(),
            variance: Rational::zero(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sum(&self) -> &Rational {
        &self.sum
    }

    pub fn variance(&self) -> &Rational {
        &self.variance
    }

    fn quarter_horizon(&self) -> Rational {
        rational::ratio(self.horizon as i64, 4)
    }

    fn denominator(&self) -> Rational {
        &self.threshold * &self.threshold * rational::int(self.horizon as i64) + self.quarter_horizon()
    }

    pub fn capital(&self) -> Rational {
        (&self.sum * &self.sum - &self.variance + self.quarter_horizon()) / self.denominator()
    }

    /// Capital at `n = 0`, equal to `1 / (4C² + 1)`.
    pub fn initial_capital(&self) -> Rational {
        self.quarter_horizon() / self.denominator()
    }

    pub fn step(&self, forecast: &Forecast, outcome: Outcome) -> Result<(CalibrationState, Rational)> {
        if self.steps >= self.horizon {
            return Err(Error::HorizonExceeded {
                length: self.steps + 1,
                horizon: self.horizon,
            });
        }
        let p = forecast.value();
        let mut next = self.clone();
        next.steps += 1;
        next.sum += outcome.as_rational() - p;
        next.variance += p * (Rational::one() - p);
        let capital = next.capital();
        Ok((next, capital))
    }

    /// Rejects iff `|S_N| ≥ C·√N`, tested exactly as `S_N² ≥ C²N`. A
    /// rejection always comes with a capital ratio of at least `4C²`.
    pub fn verdict(&self) -> Result<CalibrationVerdict> {
        if self.steps != self.horizon {
            return Err(Error::State(format!(
                "verdict needs {} steps, only {} consumed",
                self.horizon, self.steps
            )));
        }
        let bar = &self.threshold * &self.threshold * rational::int(self.horizon as i64);
        Ok(CalibrationVerdict {
            reject: &self.sum * &self.sum >= bar,
            ratio: self.capital() / self.initial_capital(),
        })
    }
}

/// The calibration test as a [`Strategy`].
#[derive(Clone, Debug)]
pub struct CalibrationStrategy {
    state: CalibrationState,
}

impl CalibrationStrategy {
    pub fn new(horizon: usize, threshold: Rational) -> Result<Self> {
        Ok(CalibrationStrategy {
            state: CalibrationState::new(horizon, threshold)?,
        })
    }

    pub fn state(&self) -> &CalibrationState {
        &self.state
    }
}

impl Strategy for CalibrationStrategy {
    fn name(&self) -> String {
        format!(
            "calibration(N={}, C={})",
            self.state.horizon,
            rational::render(&self.state.threshold)
        )
    }

    fn initial_capital(&self) -> Rational {
        self.state.initial_capital()
    }

    fn capital(&self) -> Rational {
        self.state.capital()
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.state.horizon)
    }

    fn step(&mut self, forecast: &Forecast, outcome: Outcome) -> Result<Rational> {
        let (next, capital) = self.state.step(forecast, outcome)?;
        self.state = next;
        Ok(capital)
    }
}

// ---------------------------------------------------------------------------
// Streams

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapitalProcess {
    pub initial_capital: Rational,
    /// Capital after each consumed step.
    pub trajectory: Vec<Rational>,
}

impl CapitalProcess {
    pub fn final_capital(&self) -> &Rational {
        self.trajectory.last().unwrap_or(&self.initial_capital)
    }
}

pub fn run_stream<S: Strategy + ?Sized>(strategy: &mut S, stream: &[Step]) -> Result<CapitalProcess> {
    if let Some(horizon) = strategy.horizon() {
        if stream.len() > horizon {
            return Err(Error::HorizonExceeded {
                length: stream.len(),
                horizon,
            });
        }
    }
    let initial_capital = strategy.initial_capital();
    let trajectory = stream
        .iter()
        .map(|(p, y)| strategy.step(p, *y))
        .collect::<Result<Vec<_>>>()?;
    Ok(CapitalProcess {
        initial_capital,
        trajectory,
    })
}

/// Running averages `(1/n) Σ_{i≤n} (y_i − p_i)`, a diagnostic for the
/// long-run unbiasedness of the forecasts. No verdict is attached.
pub fn running_bias(stream: &[Step]) -> Vec<f64> {
    let mut sum = Rational::zero();
    stream
        .iter()
        .enumerate()
        .map(|(i, (p, y))| {
            sum += y.as_rational() - p.value();
            rational::to_f64(&sum) / (i + 1) as f64
        })
        .collect()
}

/// Reads the `p,y` CSV stream format. `p` may be a decimal or `num/den`.
/// Rows are numbered from 1 after the header.
pub fn read_stream<R: Read>(reader: R) -> Result<Vec<Step>> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "p" || &headers[1] != "y" {
        return Err(Error::Row {
            row: 0,
            message: format!("expected header \"p,y\", found {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut stream = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        let parse = || -> Result<Step> { Ok((record[0].parse()?, record[1].parse()?)) };
        stream.push(parse().map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?);
    }
    Ok(stream)
}

pub fn write_stream<W: std::io::Write>(writer: W, stream: &[Step]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["p", "y"])?;
    for (p, y) in stream {
        csv.write_record([p.to_string(), y.to_string()])?;
    }
    csv.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Farthingale checks

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// `V(x) = (1−p)·V(x,p,0) + p·V(x,p,1)`
    Exact,
    /// `V(x) ≥ (1−p)·V(x,p,0) + p·V(x,p,1)`
    Super,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: String,
    pub forecast: Rational,
    pub value: Rational,
    pub average: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarthingaleCheck {
    pub violations: Vec<Violation>,
}

impl FarthingaleCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn violates(mode: CheckMode, value: &Rational, average: &Rational) -> bool {
    match mode {
        CheckMode::Exact => value != average,
        CheckMode::Super => value < average,
    }
}

/// Checks the (super)farthingale inequality of a cell-indexed table at both
/// endpoints of every cell of every interior node. The average is linear in
/// the forecast within a cell, so the two endpoints settle the whole cell.
pub fn check_farthingale(table: &ValueFunction, mode: CheckMode) -> Result<FarthingaleCheck> {
    let mut violations = Vec::new();
    let mut frontier = vec![CellPath::root()];
    while let Some(node) = frontier.pop() {
        let value = table.get(&node)?;
        if node.len() == table.horizon() {
            continue;
        }
        let partition = &table.partitions()[node.len()];
        for (c, cell) in partition.cells().iter().enumerate() {
            let zero_child = node.child(c, Outcome::Zero);
            let one_child = node.child(c, Outcome::One);
            let if_zero = table.get(&zero_child)?;
            let if_one = table.get(&one_child)?;
            let endpoints = if cell.is_point() { vec![&cell.lo] } else { vec![&cell.lo, &cell.hi] };
            for p in endpoints {
                let average = mix(p, if_zero, if_one);
                if violates(mode, value, &average) {
                    violations.push(Violation {
                        node: node.to_string(),
                        forecast: p.clone(),
                        value: value.clone(),
                        average,
                    });
                }
            }
            frontier.push(zero_child);
            frontier.push(one_child);
        }
    }
    violations.sort_by(|a, b| (&a.node, &a.forecast).cmp(&(&b.node, &b.forecast)));
    Ok(FarthingaleCheck { violations })
}

/// Probe forecasts used when checking a stream-driven strategy.
///
/// Every strategy in this crate has a one-step average that is a polynomial
/// of degree at most 3 in the forecast, so four distinct probes decide the
/// farthingale identity at a node; the actual forecast is added on top.
pub fn default_probes() -> Vec<Forecast> {
    [(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)]
        .iter()
        .map(|&(n, d)| Forecast::ratio(n, d).expect("probe in [0,1]"))
        .collect()
}

fn check_node<S: Strategy + Clone>(
    strategy: &S,
    node: &str,
    probes: &[Forecast],
    mode: CheckMode,
    violations: &mut Vec<Violation>,
) -> Result<()> {
    let value = strategy.capital();
    if value.is_negative() {
        violations.push(Violation {
            node: node.to_string(),
            forecast: Rational::zero(),
            value: value.clone(),
            average: Rational::zero(),
        });
    }
    for p in probes {
        let mut outcomes = [Rational::zero(), Rational::zero()];
        for y in Outcome::BOTH {
            let mut branch = strategy.clone();
            let next = branch.step(p, y)?;
            if next.is_negative() {
                violations.push(Violation {
                    node: format!("{node}|{p},{y}"),
                    forecast: p.value().clone(),
                    value: next.clone(),
                    average: Rational::zero(),
                });
            }
            outcomes[y.bit() as usize] = next;
        }
        let average = mix(p.value(), &outcomes[0], &outcomes[1]);
        if violates(mode, &value, &average) {
            violations.push(Violation {
                node: node.to_string(),
                forecast: p.value().clone(),
                value: value.clone(),
                average,
            });
        }
    }
    Ok(())
}

/// Checks a strategy's capital process at every node along `stream`, at the
/// probe forecasts plus the forecast actually played there, and checks that
/// capital stays non-negative.
pub fn check_process<S: Strategy + Clone>(
    strategy: &S,
    stream: &[Step],
    probes: &[Forecast],
    mode: CheckMode,
) -> Result<FarthingaleCheck> {
    let mut violations = Vec::new();
    let mut current = strategy.clone();
    let mut node = String::new();
    for (i, (p, y)) in stream.iter().enumerate() {
        let mut local: Vec<Forecast> = probes.to_vec();
        if !local.contains(p) {
            local.push(p.clone());
        }
        check_node(&current, &node, &local, mode, &mut violations)?;
        current.step(p, *y)?;
        if i > 0 {
            node.push(';');
        }
        node.push_str(&format!("{p},{y}"));
    }
    if current.capital().is_negative() {
        violations.push(Violation {
            node,
            forecast: Rational::zero(),
            value: current.capital(),
            average: Rational::zero(),
        });
    }
    Ok(FarthingaleCheck { violations })
}

/// Checks a strategy on the complete probe tree of the given depth.
pub fn check_tree<S: Strategy + Clone>(
    strategy: &S,
    depth: usize,
    probes: &[Forecast],
    mode: CheckMode,
) -> Result<FarthingaleCheck> {
    fn walk<S: Strategy + Clone>(
        s: &S,
        node: String,
        depth: usize,
        probes: &[Forecast],
        mode: CheckMode,
        out: &mut Vec<Violation>,
    ) -> Result<()> {
        if depth == 0 {
            return Ok(());
        }
        check_node(s, &node, probes, mode, out)?;
        for p in probes {
            for y in Outcome::BOTH {
                let mut child = s.clone();
                child.step(p, y)?;
                let name = if node.is_empty() { format!("{p},{y}") } else { format!("{node};{p},{y}") };
                walk(&child, name, depth - 1, probes, mode, out)?;
            }
        }
        Ok(())
    }
    let mut violations = Vec::new();
    walk(strategy, String::new(), depth, probes, mode, &mut violations)?;
    Ok(FarthingaleCheck { violations })
}

// ---------------------------------------------------------------------------
// Ville's inequality

#[derive(Clone, Debug, PartialEq)]
pub struct VilleReport {
    pub samples: usize,
    pub hits: usize,
    /// Fraction of sampled paths on which capital reached the threshold.
    pub frequency: f64,
    /// Initial capital over the threshold.
    pub bound: f64,
    pub pass: bool,
}

/// Estimates the probability, under `phi`, that the strategy's capital ever
/// reaches `threshold` within `phi`'s horizon, and compares it with the
/// bound `V(Λ)/C`. PASS iff `frequency ≤ bound + 4·sqrt(bound/samples)`.
///
/// Sample `i` uses seed `seed + i` (wrapping). Every sampled path is also
/// used to certify the strategy: the superfarthingale inequality is checked
/// at each visited node for the default probes and the played forecast, and
/// any violation aborts with [`Error::Uncertified`].
pub fn ville_check<S>(
    phi: &ForecastingSystem,
    strategy: &S,
    threshold: &Rational,
    samples: usize,
    seed: u64,
) -> Result<VilleReport>
where
    S: Strategy + Clone + Sync,
{
    if samples == 0 {
        return Err(Error::State("ville_check needs at least one sample".into()));
    }
    if !threshold.is_positive() {
        return Err(Error::State("threshold must be positive".into()));
    }
    let horizon = strategy.horizon().map_or(phi.horizon(), |h| h.min(phi.horizon()));
    let probes = default_probes();
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let omega = phi.sample_outcomes(horizon, seed.wrapping_add(i as u64))?;
            let path = phi.induced_path(&omega)?;
            let check = check_process(strategy, path.steps(), &probes, CheckMode::Super)?;
            if let Some(v) = check.violations.first() {
                return Err(Error::Uncertified(format!(
                    "{} at node [{}], forecast {}: value {} < average {}",
                    strategy.name(),
                    v.node,
                    rational::render(&v.forecast),
                    rational::render(&v.value),
                    rational::render(&v.average)
                )));
            }
            let mut s = strategy.clone();
            let mut reached = s.capital() >= *threshold;
            for (p, y) in path.steps() {
                if reached {
                    break;
                }
                reached = s.step(p, *y)? >= *threshold;
            }
            Ok(reached)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&hit| hit)
        .count();
    let frequency = hits as f64 / samples as f64;
    let bound = rational::to_f64(&(strategy.initial_capital() / threshold));
    let pass = frequency <= bound + 4.0 * (bound / samples as f64).sqrt();
    Ok(VilleReport {
        samples,
        hits,
        frequency,
        bound,
        pass,
    })
}

/// Draws a stream from `phi` and returns its forecast/outcome pairs.
pub fn sample_stream(phi: &ForecastingSystem, n: usize, seed: u64) -> Result<Vec<Step>> {
    let omega = phi.sample_outcomes(n, seed)?;
    Ok(phi.induced_path(&omega)?.steps().to_vec())
}

/// `n` steps of a forecaster that always says `forecast`, with outcomes drawn
/// exactly as [`ForecastingSystem::sample_outcomes`] would, but without a
/// table, so `n` may be large.
pub fn sample_constant_stream(forecast: &Forecast, n: usize, seed: u64) -> Vec<Step> {
    use rand::Rng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let p = rational::to_f64(forecast.value());
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (forecast.clone(), if u < p { Outcome::One } else { Outcome::Zero })
        })
        .collect()
}

/// Random streams with forecasts on a small grid, for property tests.
pub fn random_stream(len: usize, denominator: u32, seed: u64) -> Vec<Step> {
    use rand::Rng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let num = rng.random_range(0..=denominator);
            let p = Forecast::ratio(num as i64, denominator as i64).expect("grid forecast");
            let y = if rng.random_bool(0.5) { Outcome::One } else { Outcome::Zero };
            (p, y)
        })
        .collect()
}
