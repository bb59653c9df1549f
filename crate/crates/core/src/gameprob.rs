//! Upper game-theoretic probability by backward induction on the
//! prequential tree.
//!
//! Nodes of the tree are cell-paths: for every step taken so far, the index
//! of the forecast's cell in that step's [`ForecastPartition`] and the
//! outcome. The value at a full-length node is 1 if the node lies inside the
//! event and 0 otherwise; an interior node takes the supremum over forecasts
//! of the forecast-weighted average of its two successors. The root value is
//! the least initial capital of a non-negative superfarthingale that reaches
//! 1 on every path of the event.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Cell, EventUnion, ForecastPartition};
use crate::kernel::{self, CellMax};
use crate::rational::{self, Rational};
use crate::strategies::Strategy;
use crate::types::{Forecast, Outcome, PrequentialPrefix};

/// A node of the partition-refined prequential tree.
///
/// Text form: one `cell:bit` pair per step, comma separated; the root is
/// the empty string.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellPath(Vec<(usize, Outcome)>);

impl CellPath {
    pub fn root() -> Self {
        CellPath(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[(usize, Outcome)] {
        &self.0
    }

    pub fn child(&self, cell: usize, y: Outcome) -> CellPath {
        let mut steps = self.0.clone();
        steps.push((cell, y));
        CellPath(steps)
    }
}

impl fmt::Display for CellPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (cell, y)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{cell}:{y}")?;
        }
        Ok(())
    }
}

impl FromStr for CellPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(CellPath::root());
        }
        s.split(',')
            .map(|part| {
                let err = || Error::Parse {
                    what: "cell path",
                    input: s.to_string(),
                };
                let (cell, bit) = part.split_once(':').ok_or_else(err)?;
                Ok((cell.parse().map_err(|_| err())?, bit.parse()?))
            })
            .collect::<Result<Vec<_>>>()
            .map(CellPath)
    }
}

/// A value per node of the cell-refined tree, together with the partitions
/// that give cell indices their meaning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueFunction {
    horizon: usize,
    partitions: Vec<ForecastPartition>,
    values: BTreeMap<CellPath, Rational>,
}

impl ValueFunction {
    pub fn new(
        partitions: Vec<ForecastPartition>,
        values: BTreeMap<CellPath, Rational>,
    ) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::State("a value function needs a positive horizon".into()));
        }
        for path in values.keys() {
            if path.len() > partitions.len() {
                return Err(Error::HorizonExceeded {
                    length: path.len(),
                    horizon: partitions.len(),
                });
            }
            for (i, (cell, _)) in path.steps().iter().enumerate() {
                if *cell >= partitions[i].len() {
                    return Err(Error::State(format!("node {path} names a missing cell")));
                }
            }
        }
        Ok(ValueFunction {
            horizon: partitions.len(),
            partitions,
            values,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn partitions(&self) -> &[ForecastPartition] {
        &self.partitions
    }

    pub fn values(&self) -> &BTreeMap<CellPath, Rational> {
        &self.values
    }

    pub fn get(&self, path: &CellPath) -> Result<&Rational> {
        self.values
            .get(path)
            .ok_or_else(|| Error::IncompleteTable(path.to_string()))
    }

    pub fn root_value(&self) -> Result<&Rational> {
        self.get(&CellPath::root())
    }

    /// The node containing a concrete prefix.
    pub fn locate(&self, prefix: &PrequentialPrefix) -> Result<CellPath> {
        locate(&self.partitions, prefix)
    }

    pub fn value_at(&self, prefix: &PrequentialPrefix) -> Result<&Rational> {
        self.get(&self.locate(prefix)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ValueFunctionFile {
            horizon: self.horizon,
            partitions: self
                .partitions
                .iter()
                .map(|p| p.cells().iter().map(Cell::to_string).collect())
                .collect(),
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.to_string(), rational::render(v)))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ValueFunctionFile = serde_json::from_str(text)?;
        let partitions = file
            .partitions
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|c| c.parse::<Cell>())
                    .collect::<Result<Vec<_>>>()
                    .and_then(ForecastPartition::from_cells)
            })
            .collect::<Result<Vec<_>>>()?;
        if partitions.len() != file.horizon {
            return Err(Error::Arity {
                expected: file.horizon,
                found: partitions.len(),
            });
        }
        let values = file
            .values
            .iter()
            .map(|(k, v)| Ok((k.parse::<CellPath>()?, rational::parse(v)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        ValueFunction::new(partitions, values)
    }
}

#[derive(Serialize, Deserialize)]
struct ValueFunctionFile {
    horizon: usize,
    partitions: Vec<Vec<String>>,
    values: BTreeMap<String, String>,
}

fn locate(partitions: &[ForecastPartition], prefix: &PrequentialPrefix) -> Result<CellPath> {
    if prefix.len() > partitions.len() {
        return Err(Error::HorizonExceeded {
            length: prefix.len(),
            horizon: partitions.len(),
        });
    }
    let steps = prefix
        .steps()
        .iter()
        .zip(partitions)
        .map(|((p, y), part)| {
            let cell = part.cell_index(p.value()).expect("partitions cover [0,1]");
            (cell, *y)
        })
        .collect();
    Ok(CellPath(steps))
}

/// Backward induction over cell-paths for one event.
///
/// Membership of a node is decided by asking the event about a
/// representative prefix (one forecast per visited cell); nodes no box can
/// extend are worth 0 and are not expanded.
pub struct GameTree<'a> {
    event: &'a EventUnion,
    partitions: Vec<ForecastPartition>,
}

impl<'a> GameTree<'a> {
    pub fn new(event: &'a EventUnion) -> Self {
        GameTree {
            event,
            partitions: event.partitions(),
        }
    }

    pub fn partitions(&self) -> &[ForecastPartition] {
        &self.partitions
    }

    fn representative(&self, path: &CellPath) -> PrequentialPrefix {
        PrequentialPrefix::new(
            path.steps()
                .iter()
                .enumerate()
                .map(|(i, &(cell, y))| (self.partitions[i].cells()[cell].representative(), y))
                .collect(),
        )
    }

    fn is_alive(&self, path: &CellPath) -> bool {
        self.event
            .admits_prefix(&self.representative(path))
            .expect("paths never exceed the horizon")
    }

    /// Value of the node `path`.
    pub fn value(&self, path: &CellPath) -> Rational {
        if !self.is_alive(path) {
            return Rational::zero();
        }
        if path.len() == self.event.horizon() {
            return Rational::one();
        }
        self.best_move(path).value
    }

    fn best_move(&self, path: &CellPath) -> CellMax {
        let cells = self.partitions[path.len()].cells();
        // Sibling subtrees are independent; exact values make the merge
        // order irrelevant.
        let children: Vec<(Rational, Rational)> = (0..cells.len())
            .into_par_iter()
            .map(|c| {
                (
                    self.value(&path.child(c, Outcome::Zero)),
                    self.value(&path.child(c, Outcome::One)),
                )
            })
            .collect();
        kernel::maximize(cells, &children)
    }

    fn fill(&self, path: CellPath, table: &mut BTreeMap<CellPath, Rational>) -> Rational {
        if !self.is_alive(&path) {
            self.fill_zero(path, table);
            return Rational::zero();
        }
        if path.len() == self.event.horizon() {
            table.insert(path, Rational::one());
            return Rational::one();
        }
        let cells = self.partitions[path.len()].cells();
        let children: Vec<(Rational, Rational)> = (0..cells.len())
            .map(|c| {
                (
                    self.fill(path.child(c, Outcome::Zero), table),
                    self.fill(path.child(c, Outcome::One), table),
                )
            })
            .collect();
        let value = kernel::maximize(cells, &children).value;
        table.insert(path, value.clone());
        value
    }

    fn fill_zero(&self, path: CellPath, table: &mut BTreeMap<CellPath, Rational>) {
        if path.len() < self.event.horizon() {
            for c in 0..self.partitions[path.len()].len() {
                for y in Outcome::BOTH {
                    self.fill_zero(path.child(c, y), table);
                }
            }
        }
        table.insert(path, Rational::zero());
    }
}

/// Upper game-theoretic probability of `event`.
pub fn upper_game_probability(event: &EventUnion) -> Rational {
    GameTree::new(event).value(&CellPath::root())
}

/// Conditional upper probability of `event` given that `prefix` has been
/// played. At full length this is the membership indicator.
pub fn conditional_upper_probability(
    event: &EventUnion,
    prefix: &PrequentialPrefix,
) -> Result<Rational> {
    let tree = GameTree::new(event);
    let path = locate(tree.partitions(), prefix)?;
    Ok(tree.value(&path))
}

/// The full table of conditional upper probabilities: a superfarthingale
/// whose root is the upper probability and whose leaves are the event's
/// indicator.
pub fn witness_superfarthingale(event: &EventUnion) -> ValueFunction {
    let tree = GameTree::new(event);
    let mut table = BTreeMap::new();
    tree.fill(CellPath::root(), &mut table);
    ValueFunction {
        horizon: event.horizon(),
        partitions: tree.partitions,
        values: table,
    }
}

/// Smallest forecast attaining the supremum at `prefix`.
pub fn optimal_forecast_at(event: &EventUnion, prefix: &PrequentialPrefix) -> Result<Forecast> {
    if prefix.len() >= event.horizon() {
        return Err(Error::HorizonExceeded {
            length: prefix.len() + 1,
            horizon: event.horizon(),
        });
    }
    let tree = GameTree::new(event);
    let path = locate(tree.partitions(), prefix)?;
    Forecast::new(tree.best_move(&path).argmax)
}

// ---------------------------------------------------------------------------
// Lévy zero-one law strategy

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Capital frozen while the conditional upper probability stays >= a.
    Waiting,
    /// Capital tracks `base_capital · U(x) / base_value`, where `U` is the
    /// conditional upper probability and `base_value` its value at the
    /// switch point. A zero `base_value` means the ride is
    /// `base_capital · (1 + U(x)/a)` instead.
    Riding {
        base_capital: Rational,
        base_value: Rational,
    },
    /// The event horizon has been consumed; capital is frozen.
    Terminal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevyRecord {
    pub step: usize,
    pub conditional: Rational,
    pub capital: Rational,
    pub regime: Regime,
}

/// Regime-switching strategy whose capital grows by a factor above `1/a`
/// each time the conditional upper probability of the event dips below `a`
/// and then recovers to 1.
///
/// If the conditional value at a switch point is 0 while the event is still
/// reachable, the table of conditional values starts at 0 and reaches 1 on
/// the event, so `c·(1 + U/a)` is a superfarthingale from `c` that reaches
/// `c/a` there. If the event is no longer reachable the capital stays
/// frozen.
#[derive(Clone, Debug)]
pub struct LevyStrategy {
    event: EventUnion,
    threshold: Rational,
    capital: Rational,
    regime: Regime,
    prefix: PrequentialPrefix,
    milestones: Vec<Rational>,
    switches: Vec<usize>,
    trace: Vec<LevyRecord>,
}

impl LevyStrategy {
    pub fn new(event: EventUnion, threshold: Rational) -> Result<Self> {
        if threshold <= Rational::zero() || threshold >= Rational::one() {
            return Err(Error::State(format!(
                "threshold {} must lie strictly between 0 and 1",
                rational::render(&threshold)
            )));
        }
        let mut strategy = LevyStrategy {
            event,
            threshold,
            capital: Rational::one(),
            regime: Regime::Waiting,
            prefix: PrequentialPrefix::empty(),
            milestones: Vec::new(),
            switches: Vec::new(),
            trace: Vec::new(),
        };
        let conditional = upper_game_probability(&strategy.event);
        strategy.maybe_switch(&conditional);
        strategy.record(conditional);
        Ok(strategy)
    }

    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    /// Capital values `s_1, s_2, ...` at which a ride ended.
    pub fn milestones(&self) -> &[Rational] {
        &self.milestones
    }

    /// Steps `N_1, N_2, ...` at which a ride started.
    pub fn switches(&self) -> &[usize] {
        &self.switches
    }

    pub fn trace(&self) -> &[LevyRecord] {
        &self.trace
    }

    fn maybe_switch(&mut self, conditional: &Rational) {
        let reachable = || {
            self.event
                .admits_prefix(&self.prefix)
                .expect("prefix within horizon")
        };
        if self.regime == Regime::Waiting
            && *conditional < self.threshold
            && (!conditional.is_zero() || reachable())
        {
            self.regime = Regime::Riding {
                base_capital: self.capital.clone(),
                base_value: conditional.clone(),
            };
            self.switches.push(self.prefix.len());
        }
    }

    fn record(&mut self, conditional: Rational) {
        self.trace.push(LevyRecord {
            step: self.prefix.len(),
            conditional,
            capital: self.capital.clone(),
            regime: self.regime.clone(),
        });
    }
}

impl Strategy for LevyStrategy {
    fn name(&self) -> String {
        format!("levy(a={})", rational::render(&self.threshold))
    }

    fn initial_capital(&self) -> Rational {
        Rational::one()
    }

    fn capital(&self) -> Rational {
        self.capital.clone()
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.event.horizon())
    }

    fn step(&mut self, forecast: &Forecast, outcome: Outcome) -> Result<Rational> {
        if self.prefix.len() >= self.event.horizon() {
            self.regime = Regime::Terminal;
            return Ok(self.capital.clone());
        }
        self.prefix.push(forecast.clone(), outcome);
        let conditional = conditional_upper_probability(&self.event, &self.prefix)?;
        if let Regime::Riding { base_capital, base_value } = &self.regime {
            self.capital = if base_value.is_zero() {
                base_capital * (Rational::one() + &conditional / &self.threshold)
            } else {
                base_capital * &conditional / base_value
            };
            if self.capital >= base_capital / &self.threshold {
                self.milestones.push(self.capital.clone());
                self.regime = Regime::Waiting;
            }
        }
        self.maybe_switch(&conditional);
        self.record(conditional);
        Ok(self.capital.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{counterexample_a, counterexample_b, BoxStep, EventBox, Interval, OutcomeConstraint};
    use crate::rational::{int, ratio};

    fn prefix(steps: &[(i64, i64, u8)]) -> PrequentialPrefix {
        PrequentialPrefix::from_ratios(steps).unwrap()
    }

    #[test]
    fn counterexample_values() {
        let a = counterexample_a();
        let b = counterexample_b();
        assert_eq!(upper_game_probability(&a), ratio(1, 2));
        assert_eq!(upper_game_probability(&b), ratio(1, 2));
        assert_eq!(upper_game_probability(&a.union(&b).unwrap()), int(1));
        assert_eq!(upper_game_probability(&a.intersection(&b).unwrap()), ratio(1, 2));
    }

    #[test]
    fn trivial_events() {
        assert_eq!(upper_game_probability(&EventUnion::full(1).unwrap()), int(1));
        assert_eq!(upper_game_probability(&EventUnion::empty(1).unwrap()), int(0));
    }

    #[test]
    fn half_interval_with_required_one() {
        let event = EventUnion::new(
            1,
            vec![EventBox::new(vec![BoxStep::new(
                Interval::new(int(0), ratio(1, 2)).unwrap(),
                OutcomeConstraint::Exactly(Outcome::One),
            )])
            .unwrap()],
        )
        .unwrap();
        assert_eq!(upper_game_probability(&event), ratio(1, 2));
    }

    #[test]
    fn conditional_values_on_counterexample() {
        let a = counterexample_a();
        assert_eq!(conditional_upper_probability(&a, &prefix(&[(1, 2, 0)])).unwrap(), int(1));
        assert_eq!(conditional_upper_probability(&a, &prefix(&[(0, 1, 1)])).unwrap(), int(0));
        assert_eq!(
            conditional_upper_probability(&a, &prefix(&[(0, 1, 0), (1, 2, 0)])).unwrap(),
            int(1)
        );
        assert!(conditional_upper_probability(&a, &prefix(&[(0, 1, 0), (1, 2, 0), (0, 1, 0)])).is_err());
    }

    #[test]
    fn witness_table_of_counterexample() {
        let a = counterexample_a();
        let w = witness_superfarthingale(&a);
        assert_eq!(w.root_value().unwrap(), &ratio(1, 2));
        // first-step cells: [0,0], (0,1/2), [1/2,1/2], (1/2,1]
        assert_eq!(w.get(&"2:0".parse().unwrap()).unwrap(), &int(1));
        assert_eq!(w.get(&"0:0".parse().unwrap()).unwrap(), &ratio(1, 2));
        assert_eq!(w.value_at(&prefix(&[(1, 2, 0)])).unwrap(), &int(1));
    }

    #[test]
    fn witness_of_empty_event_is_zero() {
        let w = witness_superfarthingale(&EventUnion::empty(2).unwrap());
        assert!(w.values().values().all(Zero::is_zero));
        // 1 root + 2 level-1 nodes + 4 level-2 nodes over trivial partitions
        assert_eq!(w.values().len(), 7);
    }

    #[test]
    fn optimal_forecasts() {
        let a = counterexample_a();
        let ab = a.union(&counterexample_b()).unwrap();
        assert_eq!(optimal_forecast_at(&a, &PrequentialPrefix::empty()).unwrap(), Forecast::zero());
        assert_eq!(optimal_forecast_at(&ab, &PrequentialPrefix::empty()).unwrap(), Forecast::half());
        let full = EventUnion::full(3).unwrap();
        assert_eq!(optimal_forecast_at(&full, &prefix(&[(1, 3, 1)])).unwrap(), Forecast::zero());
        assert!(optimal_forecast_at(&a, &prefix(&[(0, 1, 0), (1, 2, 0)])).is_err());
    }

    #[test]
    fn cell_path_text() {
        let path: CellPath = "0:1,3:0".parse().unwrap();
        assert_eq!(path.to_string(), "0:1,3:0");
        assert_eq!("".parse::<CellPath>().unwrap(), CellPath::root());
        assert!("0-1".parse::<CellPath>().is_err());
    }

    #[test]
    fn value_function_json_round_trip() {
        let w = witness_superfarthingale(&counterexample_a());
        let back = ValueFunction::from_json(&w.to_json().unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn levy_rides_the_witness_along_a_member() {
        let mut levy = LevyStrategy::new(counterexample_a(), ratio(3, 4)).unwrap();
        assert_eq!(levy.switches(), &[0]);
        for (p, y) in prefix(&[(0, 1, 0), (1, 2, 0)]).steps() {
            levy.step(p, *y).unwrap();
        }
        assert_eq!(levy.capital(), int(2));
        assert!(levy.capital() >= ratio(4, 3));
        assert_eq!(levy.milestones(), &[int(2)]);
    }

    #[test]
    fn levy_keeps_capital_after_early_resolution() {
        let mut levy = LevyStrategy::new(counterexample_a(), ratio(3, 4)).unwrap();
        let mut capitals = vec![];
        for (p, y) in prefix(&[(1, 2, 0), (0, 1, 0)]).steps() {
            capitals.push(levy.step(p, *y).unwrap());
        }
        assert_eq!(capitals, [int(2), int(2)]);
        assert_eq!(levy.regime(), &Regime::Waiting);
        // horizon consumed: frozen
        assert_eq!(levy.step(&Forecast::half(), Outcome::One).unwrap(), int(2));
        assert_eq!(levy.regime(), &Regime::Terminal);
    }

    #[test]
    fn levy_on_empty_event_stays_at_one() {
        let mut levy = LevyStrategy::new(EventUnion::empty(2).unwrap(), ratio(1, 2)).unwrap();
        for (p, y) in prefix(&[(1, 3, 1), (0, 1, 0)]).steps() {
            assert_eq!(levy.step(p, *y).unwrap(), int(1));
        }
        assert!(levy.switches().is_empty());
    }

    #[test]
    fn levy_grows_on_null_but_reachable_events() {
        // outcome 1 after forecast 0: upper probability 0, yet reachable
        let event = EventUnion::new(1, vec![EventBox::point(&[(0, 1, 1)]).unwrap()]).unwrap();
        assert_eq!(upper_game_probability(&event), int(0));
        let mut levy = LevyStrategy::new(event, ratio(1, 2)).unwrap();
        assert_eq!(levy.switches(), &[0]);
        assert_eq!(levy.step(&Forecast::zero(), Outcome::One).unwrap(), int(3));
    }

    #[test]
    fn levy_threshold_is_validated() {
        assert!(LevyStrategy::new(counterexample_a(), int(1)).is_err());
        assert!(LevyStrategy::new(counterexample_a(), int(0)).is_err());
    }
}
