//! Measure-theoretic side: the probability, under a forecasting system, that
//! its induced path lands in an event, and the maximum of that probability
//! over all forecasting systems.
//!
//! Box-union events pull back to finite unions of cylinders in outcome
//! space, so every probability here is an exact finite sum and no outer
//! measure is needed.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::{admitting_boxes, BoxSet, EventUnion, ForecastPartition};
use crate::forecasting::ForecastingSystem;
use crate::kernel;
use crate::rational::{self, Rational};
use crate::types::{BinaryHistory, Forecast, Outcome, PrequentialPrefix};

/// `Prob_φ{ω : ω^φ ∈ E}` by recursion over outcome histories, pruning
/// histories whose induced path already left every box.
pub fn exact_event_probability(phi: &ForecastingSystem, event: &EventUnion) -> Result<Rational> {
    if phi.horizon() < event.horizon() {
        return Err(Error::Arity {
            expected: event.horizon(),
            found: phi.horizon(),
        });
    }
    fn descend(
        phi: &ForecastingSystem,
        event: &EventUnion,
        history: &BinaryHistory,
        path: &mut PrequentialPrefix,
        weight: &Rational,
    ) -> Result<Rational> {
        if weight.is_zero() || !event.admits_prefix(path)? {
            return Ok(Rational::zero());
        }
        if history.len() == event.horizon() {
            return Ok(if event.contains(path)? { weight.clone() } else { Rational::zero() });
        }
        let forecast = phi.forecast(history)?.clone();
        let mut total = Rational::zero();
        for y in Outcome::BOTH {
            let mut child_path = path.clone();
            child_path.push(forecast.clone(), y);
            let child_weight = weight * forecast.probability_of(y);
            total += descend(phi, event, &history.child(y), &mut child_path, &child_weight)?;
        }
        Ok(total)
    }
    descend(
        phi,
        event,
        &BinaryHistory::empty(),
        &mut PrequentialPrefix::empty(),
        &Rational::one(),
    )
}

/// Dynamic programme over outcome histories. The state after a history is
/// the set of boxes its induced path still satisfies, which is all the
/// future depends on; values are memoized per (depth, state).
struct OutcomeTreeDp<'a> {
    event: &'a EventUnion,
    partitions: Vec<ForecastPartition>,
    // admitting[step][cell][y]
    admitting: Vec<Vec<[BoxSet; 2]>>,
    memo: HashMap<(usize, BoxSet), kernel::CellMax>,
}

impl<'a> OutcomeTreeDp<'a> {
    fn new(event: &'a EventUnion) -> Self {
        let partitions = event.partitions();
        let admitting = partitions
            .iter()
            .enumerate()
            .map(|(step, part)| {
                part.cells()
                    .iter()
                    .map(|cell| Outcome::BOTH.map(|y| admitting_boxes(event, step, cell, y)))
                    .collect()
            })
            .collect();
        OutcomeTreeDp {
            event,
            partitions,
            admitting,
            memo: HashMap::new(),
        }
    }

    fn value(&mut self, depth: usize, alive: &BoxSet) -> Rational {
        if alive.is_empty() {
            return Rational::zero();
        }
        if depth == self.event.horizon() {
            return Rational::one();
        }
        self.choice(depth, alive).value
    }

    fn choice(&mut self, depth: usize, alive: &BoxSet) -> kernel::CellMax {
        let key = (depth, alive.clone());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let cells = self.partitions[depth].cells().len();
        let mut children = Vec::with_capacity(cells);
        for c in 0..cells {
            let zero = alive.and(&self.admitting[depth][c][0]);
            let one = alive.and(&self.admitting[depth][c][1]);
            children.push((self.value(depth + 1, &zero), self.value(depth + 1, &one)));
        }
        let best = kernel::maximize(self.partitions[depth].cells(), &children);
        self.memo.insert(key, best.clone());
        best
    }

    fn next_alive(&self, depth: usize, alive: &BoxSet, forecast: &Rational, y: Outcome) -> BoxSet {
        let cell = self.partitions[depth]
            .cell_index(forecast)
            .expect("partitions cover [0,1]");
        alive.and(&self.admitting[depth][cell][y.bit() as usize])
    }
}

/// Upper measure-theoretic probability and a forecasting system attaining
/// it. At every history the witness plays the smallest maximizing forecast
/// for the boxes its own induced path still satisfies.
pub fn measure_upper_probability(event: &EventUnion) -> (Rational, ForecastingSystem) {
    let mut dp = OutcomeTreeDp::new(event);
    let root = BoxSet::all(event.boxes().len());
    let value = dp.value(0, &root);

    let mut table = BTreeMap::new();
    let mut frontier = vec![(BinaryHistory::empty(), root)];
    while let Some((history, alive)) = frontier.pop() {
        let depth = history.len();
        let forecast = if alive.is_empty() {
            Rational::zero()
        } else {
            dp.choice(depth, &alive).argmax
        };
        if depth + 1 < event.horizon() {
            for y in Outcome::BOTH {
                let next = dp.next_alive(depth, &alive, &forecast, y);
                frontier.push((history.child(y), next));
            }
        }
        table.insert(history, Forecast::new(forecast).expect("maximizers lie in [0,1]"));
    }
    let witness = ForecastingSystem::from_table(event.horizon(), table)
        .expect("witness covers every history below the horizon");
    (value, witness)
}

/// Refuse grid enumerations above this many forecasting systems.
pub const GRID_LIMIT: u128 = 10_000_000;

/// Maximum of [`exact_event_probability`] over every forecasting system
/// whose forecasts all lie on the grid `{0, 1/k, ..., 1}`.
pub fn grid_bruteforce(event: &EventUnion, k: u32) -> Result<Rational> {
    if k == 0 {
        return Err(Error::State("grid resolution k must be positive".into()));
    }
    let histories: Vec<BinaryHistory> = (0..event.horizon()).flat_map(BinaryHistory::all_of_length).collect();
    let radix = k as u128 + 1;
    let count = u32::try_from(histories.len())
        .ok()
        .and_then(|n| radix.checked_pow(n))
        .unwrap_or(u128::MAX);
    if count > GRID_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: GRID_LIMIT,
        });
    }
    let grid: Vec<Forecast> = (0..=k)
        .map(|i| Forecast::new(rational::ratio(i as i64, k as i64)).expect("grid point in [0,1]"))
        .collect();
    let best = (0..count as u64)
        .into_par_iter()
        .map(|code| {
            let mut rest = code;
            let table = histories
                .iter()
                .map(|h| {
                    let digit = (rest % radix as u64) as usize;
                    rest /= radix as u64;
                    (h.clone(), grid[digit].clone())
                })
                .collect();
            let phi = ForecastingSystem::from_table(event.horizon(), table)?;
            exact_event_probability(&phi, event)
        })
        .try_reduce(Rational::zero, |a, b| Ok(a.max(b)))?;
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    /// `4·sqrt(estimate·(1−estimate)/samples)`.
    pub half_width: f64,
    pub samples: usize,
}

/// Fraction of sampled outcome sequences whose induced path lies in the
/// event. Sample `i` uses seed `seed + i` (wrapping).
pub fn monte_carlo_probability(
    phi: &ForecastingSystem,
    event: &EventUnion,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::State("Monte Carlo needs at least one sample".into()));
    }
    if phi.horizon() < event.horizon() {
        return Err(Error::Arity {
            expected: event.horizon(),
            found: phi.horizon(),
        });
    }
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let omega = phi.sample_outcomes(event.horizon(), seed.wrapping_add(i as u64))?;
            Ok(event.contains(&phi.induced_path(&omega)?)? as usize)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let estimate = hits as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        estimate,
        half_width: 4.0 * (estimate * (1.0 - estimate) / samples as f64).sqrt(),
        samples,
    })
}
