//! Compact prequential events at a fixed horizon.
//!
//! An event is a finite union of closed boxes. A box constrains the forecast
//! of every step to a closed rational interval and the outcome to a bit or a
//! wildcard. An event of horizon `N` stands for its cylinder extension: an
//! infinite path belongs to it iff its first `N` steps do.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::types::{Forecast, Outcome, PrequentialPrefix};

/// Closed interval `[lo, hi]` inside `[0,1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo < Rational::zero() || hi > Rational::one() || lo > hi {
            return Err(Error::InvalidInterval {
                lo: rational::render(&lo),
                hi: rational::render(&hi),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(p: Rational) -> Result<Self> {
        Self::new(p.clone(), p)
    }

    pub fn unit() -> Self {
        Interval {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn contains(&self, p: &Rational) -> bool {
        &self.lo <= p && p <= &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

/// Outcome requirement of one box step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutcomeConstraint {
    Exactly(Outcome),
    Any,
}

impl OutcomeConstraint {
    pub fn admits(self, y: Outcome) -> bool {
        match self {
            OutcomeConstraint::Any => true,
            OutcomeConstraint::Exactly(bit) => bit == y,
        }
    }

    fn merge(self, other: OutcomeConstraint) -> Option<OutcomeConstraint> {
        match (self, other) {
            (OutcomeConstraint::Any, c) | (c, OutcomeConstraint::Any) => Some(c),
            (OutcomeConstraint::Exactly(a), OutcomeConstraint::Exactly(b)) => {
                (a == b).then_some(self)
            }
        }
    }

    fn is_subset_of(self, other: OutcomeConstraint) -> bool {
        other == OutcomeConstraint::Any || self == other
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxStep {
    pub forecast: Interval,
    pub outcome: OutcomeConstraint,
}

impl BoxStep {
    pub fn new(forecast: Interval, outcome: OutcomeConstraint) -> Self {
        BoxStep { forecast, outcome }
    }

    pub fn admits(&self, p: &Forecast, y: Outcome) -> bool {
        self.forecast.contains(p.value()) && self.outcome.admits(y)
    }
}

/// A product of closed step constraints; all boxes of one event share its
/// horizon.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventBox {
    steps: Vec<BoxStep>,
}

impl EventBox {
    pub fn new(steps: Vec<BoxStep>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::State("a box needs at least one step".into()));
        }
        Ok(EventBox { steps })
    }

    /// The single path given as `(num, den, bit)` triples.
    pub fn point(steps: &[(i64, i64, u8)]) -> Result<Self> {
        steps
            .iter()
            .map(|&(num, den, bit)| {
                Ok(BoxStep::new(
                    Interval::point(rational::ratio(num, den))?,
                    OutcomeConstraint::Exactly(Outcome::from_bit(bit)?),
                ))
            })
            .collect::<Result<Vec<_>>>()
            .and_then(Self::new)
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[BoxStep] {
        &self.steps
    }

    /// Whether every step of `prefix` (which may be shorter than the box)
    /// satisfies the corresponding constraint.
    pub fn admits_prefix(&self, prefix: &PrequentialPrefix) -> bool {
        prefix
            .steps()
            .iter()
            .zip(&self.steps)
            .all(|((p, y), step)| step.admits(p, *y))
    }

    pub fn intersect(&self, other: &EventBox) -> Option<EventBox> {
        self.steps
            .iter()
            .zip(&other.steps)
            .map(|(a, b)| {
                Some(BoxStep::new(
                    a.forecast.intersect(&b.forecast)?,
                    a.outcome.merge(b.outcome)?,
                ))
            })
            .collect::<Option<Vec<_>>>()
            .map(|steps| EventBox { steps })
    }

    pub fn is_subset_of(&self, other: &EventBox) -> bool {
        self.steps.iter().zip(&other.steps).all(|(a, b)| {
            a.forecast.is_subset_of(&b.forecast) && a.outcome.is_subset_of(b.outcome)
        })
    }
}

/// A finite union of boxes of a common horizon. No boxes means the empty
/// event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventUnion {
    horizon: usize,
    boxes: Vec<EventBox>,
}

impl EventUnion {
    pub fn new(horizon: usize, boxes: Vec<EventBox>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::State("event horizon must be positive".into()));
        }
        if let Some(b) = boxes.iter().find(|b| b.horizon() != horizon) {
            return Err(Error::Arity {
                expected: horizon,
                found: b.horizon(),
            });
        }
        Ok(EventUnion { horizon, boxes })
    }

    pub fn empty(horizon: usize) -> Result<Self> {
        Self::new(horizon, Vec::new())
    }

    /// Every path: one box with `[0,1]` forecasts and wildcard outcomes.
    pub fn full(horizon: usize) -> Result<Self> {
        let step = BoxStep::new(Interval::unit(), OutcomeConstraint::Any);
        Self::new(horizon, vec![EventBox::new(vec![step; horizon])?])
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn boxes(&self) -> &[EventBox] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, prefix: &PrequentialPrefix) -> Result<bool> {
        if prefix.len() != self.horizon {
            return Err(Error::Arity {
                expected: self.horizon,
                found: prefix.len(),
            });
        }
        Ok(self.boxes.iter().any(|b| b.admits_prefix(prefix)))
    }

    /// Whether some member of the event extends `prefix`.
    pub fn admits_prefix(&self, prefix: &PrequentialPrefix) -> Result<bool> {
        if prefix.len() > self.horizon {
            return Err(Error::HorizonExceeded {
                length: prefix.len(),
                horizon: self.horizon,
            });
        }
        Ok(self.boxes.iter().any(|b| b.admits_prefix(prefix)))
    }

    fn check_horizon(&self, other: &EventUnion) -> Result<()> {
        if self.horizon != other.horizon {
            return Err(Error::Arity {
                expected: self.horizon,
                found: other.horizon,
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &EventUnion) -> Result<EventUnion> {
        self.check_horizon(other)?;
        let boxes = self.boxes.iter().chain(&other.boxes).cloned().collect();
        Ok(EventUnion {
            horizon: self.horizon,
            boxes,
        })
    }

    pub fn intersection(&self, other: &EventUnion) -> Result<EventUnion> {
        self.check_horizon(other)?;
        let mut boxes: Vec<EventBox> = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                if let Some(ab) = a.intersect(b) {
                    if !boxes.contains(&ab) {
                        boxes.push(ab);
                    }
                }
            }
        }
        Ok(EventUnion {
            horizon: self.horizon,
            boxes,
        })
    }

    /// Sufficient test for `self ⊆ other`: every box of `self` sits inside
    /// a single box of `other`.
    pub fn is_boxwise_subset_of(&self, other: &EventUnion) -> bool {
        self.horizon == other.horizon
            && self
                .boxes
                .iter()
                .all(|a| other.boxes.iter().any(|b| a.is_subset_of(b)))
    }

    /// Partition of `[0,1]` for the forecast at `step` (zero-based) into
    /// maximal intervals on which every box's step interval test is
    /// constant.
    pub fn forecast_partition(&self, step: usize) -> Result<ForecastPartition> {
        if step >= self.horizon {
            return Err(Error::HorizonExceeded {
                length: step + 1,
                horizon: self.horizon,
            });
        }
        let intervals: Vec<&Interval> = self.boxes.iter().map(|b| &b.steps[step].forecast).collect();
        Ok(ForecastPartition::from_intervals(&intervals))
    }

    pub fn partitions(&self) -> Vec<ForecastPartition> {
        (0..self.horizon)
            .map(|i| self.forecast_partition(i).expect("step below horizon"))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&EventFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EventFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// One maximal interval of a [`ForecastPartition`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub lo: Rational,
    pub lo_closed: bool,
    pub hi: Rational,
    pub hi_closed: bool,
}

impl Cell {
    pub fn point(p: Rational) -> Cell {
        Cell {
            lo: p.clone(),
            lo_closed: true,
            hi: p,
            hi_closed: true,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, p: &Rational) -> bool {
        let above = if self.lo_closed { p >= &self.lo } else { p > &self.lo };
        let below = if self.hi_closed { p <= &self.hi } else { p < &self.hi };
        above && below
    }

    /// A forecast inside the cell: the point itself, or the midpoint.
    pub fn representative(&self) -> Forecast {
        let mid = (&self.lo + &self.hi) / rational::int(2);
        Forecast::new(mid).expect("cells lie in [0,1]")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            rational::render(&self.lo),
            rational::render(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl std::str::FromStr for Cell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Cell> {
        let err = || Error::Parse {
            what: "cell",
            input: s.to_string(),
        };
        let s = s.trim();
        let lo_closed = match s.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(err()),
        };
        let hi_closed = match s.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(err()),
        };
        let inner = &s[1..s.len() - 1];
        let (lo, hi) = inner.split_once(',').ok_or_else(err)?;
        Ok(Cell {
            lo: rational::parse(lo)?,
            lo_closed,
            hi: rational::parse(hi)?,
            hi_closed,
        })
    }
}

/// Ordered cells covering `[0,1]` exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForecastPartition {
    breakpoints: Vec<Rational>,
    cells: Vec<Cell>,
}

impl ForecastPartition {
    pub fn trivial() -> Self {
        Self::from_intervals(&[])
    }

    pub fn from_intervals(intervals: &[&Interval]) -> Self {
        let mut breakpoints = vec![Rational::zero(), Rational::one()];
        for iv in intervals {
            breakpoints.push(iv.lo.clone());
            breakpoints.push(iv.hi.clone());
        }
        breakpoints.sort();
        breakpoints.dedup();

        // Alternate points and open gaps, then merge neighbours whose
        // membership pattern agrees.
        let mut elementary = Vec::with_capacity(2 * breakpoints.len());
        for (i, b) in breakpoints.iter().enumerate() {
            elementary.push(Cell::point(b.clone()));
            if let Some(next) = breakpoints.get(i + 1) {
                elementary.push(Cell {
                    lo: b.clone(),
                    lo_closed: false,
                    hi: next.clone(),
                    hi_closed: false,
                });
            }
        }
        let signature = |cell: &Cell| -> Vec<bool> {
            let probe = cell.representative();
            intervals.iter().map(|iv| iv.contains(probe.value())).collect()
        };
        let mut cells: Vec<Cell> = Vec::new();
        let mut last_sig: Option<Vec<bool>> = None;
        for cell in elementary {
            let sig = signature(&cell);
            match (cells.last_mut(), &last_sig) {
                (Some(prev), Some(prev_sig)) if *prev_sig == sig => {
                    prev.hi = cell.hi;
                    prev.hi_closed = cell.hi_closed;
                }
                _ => {
                    cells.push(cell);
                    last_sig = Some(sig);
                }
            }
        }
        ForecastPartition { breakpoints, cells }
    }

    /// Rebuilds a partition from explicit cells, checking that they tile
    /// `[0,1]` in order.
    pub fn from_cells(cells: Vec<Cell>) -> Result<Self> {
        let err = |why: &str| Error::State(format!("cells do not tile [0,1]: {why}"));
        let first = cells.first().ok_or_else(|| err("no cells"))?;
        if !first.lo.is_zero() || !first.lo_closed {
            return Err(err("first cell must start at a closed 0"));
        }
        let last = cells.last().expect("non-empty");
        if !last.hi.is_one() || !last.hi_closed {
            return Err(err("last cell must end at a closed 1"));
        }
        for cell in &cells {
            if cell.lo > cell.hi || (cell.is_point() && !(cell.lo_closed && cell.hi_closed)) {
                return Err(err("malformed cell"));
            }
        }
        for pair in cells.windows(2) {
            if pair[0].hi != pair[1].lo || pair[0].hi_closed == pair[1].lo_closed {
                return Err(err("gap or overlap between neighbouring cells"));
            }
        }
        let mut breakpoints: Vec<Rational> =
            cells.iter().flat_map(|c| [c.lo.clone(), c.hi.clone()]).collect();
        breakpoints.dedup();
        Ok(ForecastPartition { breakpoints, cells })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_index(&self, p: &Rational) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(p))
    }
}

/// Set of box indices, stored as a bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxSet(Vec<u64>);

impl BoxSet {
    pub fn none(len: usize) -> Self {
        BoxSet(vec![0; len.div_ceil(64)])
    }

    pub fn all(len: usize) -> Self {
        let mut set = Self::none(len);
        for i in 0..len {
            set.insert(i);
        }
        set
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn and(&self, other: &BoxSet) -> BoxSet {
        BoxSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
}

/// The boxes whose step-`step` constraint admits every forecast in `cell`
/// together with outcome `y`.
pub fn admitting_boxes(event: &EventUnion, step: usize, cell: &Cell, y: Outcome) -> BoxSet {
    let probe = cell.representative();
    let mut set = BoxSet::none(event.boxes.len());
    for (i, b) in event.boxes.iter().enumerate() {
        if b.steps[step].admits(&probe, y) {
            set.insert(i);
        }
    }
    set
}

// ---------------------------------------------------------------------------
// JSON file format

#[derive(Serialize, Deserialize)]
struct EventFile {
    horizon: usize,
    boxes: Vec<BoxFile>,
}

#[derive(Serialize, Deserialize)]
struct BoxFile {
    steps: Vec<StepFile>,
}

#[derive(Serialize, Deserialize)]
struct StepFile {
    p: [String; 2],
    y: OutcomeField,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OutcomeField {
    Bit(u8),
    Wildcard(String),
}

impl From<&EventUnion> for EventFile {
    fn from(event: &EventUnion) -> Self {
        let boxes = event
            .boxes
            .iter()
            .map(|b| BoxFile {
                steps: b
                    .steps
                    .iter()
                    .map(|s| StepFile {
                        p: [rational::render(&s.forecast.lo), rational::render(&s.forecast.hi)],
                        y: match s.outcome {
                            OutcomeConstraint::Any => OutcomeField::Wildcard("*".into()),
                            OutcomeConstraint::Exactly(y) => OutcomeField::Bit(y.bit()),
                        },
                    })
                    .collect(),
            })
            .collect();
        EventFile {
            horizon: event.horizon,
            boxes,
        }
    }
}

impl TryFrom<EventFile> for EventUnion {
    type Error = Error;

    fn try_from(file: EventFile) -> Result<Self> {
        let boxes = file
            .boxes
            .into_iter()
            .map(|b| {
                let steps = b
                    .steps
                    .into_iter()
                    .map(|s| {
                        let forecast =
                            Interval::new(rational::parse(&s.p[0])?, rational::parse(&s.p[1])?)?;
                        let outcome = match s.y {
                            OutcomeField::Bit(bit) => OutcomeConstraint::Exactly(Outcome::from_bit(bit)?),
                            OutcomeField::Wildcard(w) if w == "*" => OutcomeConstraint::Any,
                            OutcomeField::Wildcard(w) => {
                                return Err(Error::Parse {
                                    what: "outcome constraint",
                                    input: w,
                                })
                            }
                        };
                        Ok(BoxStep::new(forecast, outcome))
                    })
                    .collect::<Result<Vec<_>>>()?;
                EventBox::new(steps)
            })
            .collect::<Result<Vec<_>>>()?;
        EventUnion::new(file.horizon, boxes)
    }
}

// ---------------------------------------------------------------------------
// Built-in events

/// `A = {(0,0,1/2,0), (1/2,0,0,0)}`, one half of the strict-subadditivity
/// counterexample.
pub fn counterexample_a() -> EventUnion {
    EventUnion::new(
        2,
        vec![
            EventBox::point(&[(0, 1, 0), (1, 2, 0)]).expect("valid point"),
            EventBox::point(&[(1, 2, 0), (0, 1, 0)]).expect("valid point"),
        ],
    )
    .expect("horizon 2")
}

/// `B = {(0,0,1/2,0), (1/2,1,0,0)}`.
pub fn counterexample_b() -> EventUnion {
    EventUnion::new(
        2,
        vec![
            EventBox::point(&[(0, 1, 0), (1, 2, 0)]).expect("valid point"),
            EventBox::point(&[(1, 2, 1), (0, 1, 0)]).expect("valid point"),
        ],
    )
    .expect("horizon 2")
}

// ---------------------------------------------------------------------------
// Rasterized predicate events

/// Inner and outer box approximations of a predicate event.
///
/// These are bounds, not exact representations: a grid box goes into
/// `inner` when the predicate holds at every sampled point of the box and
/// into `outer` when it holds at any sampled point. The sampled points are
/// the endpoints and midpoint of each grid interval. When the predicate's
/// truth on every grid box is decided by those samples, the event is
/// sandwiched between `inner` and `outer`.
#[derive(Clone, Debug)]
pub struct RasterizedEvent {
    pub inner: EventUnion,
    pub outer: EventUnion,
}

pub fn rasterize(
    horizon: usize,
    breakpoints: &[Rational],
    predicate: impl Fn(&PrequentialPrefix) -> bool,
) -> Result<RasterizedEvent> {
    let mut grid = breakpoints.to_vec();
    grid.push(Rational::zero());
    grid.push(Rational::one());
    grid.sort();
    grid.dedup();
    if grid.first().is_some_and(|b| *b < Rational::zero())
        || grid.last().is_some_and(|b| *b > Rational::one())
    {
        return Err(Error::State("breakpoints must lie in [0,1]".into()));
    }
    let intervals: Vec<Interval> = grid
        .windows(2)
        .map(|w| Interval::new(w[0].clone(), w[1].clone()))
        .collect::<Result<_>>()?;
    let samples: Vec<Vec<Forecast>> = intervals
        .iter()
        .map(|iv| {
            let mid = (&iv.lo + &iv.hi) / rational::int(2);
            [iv.lo.clone(), mid, iv.hi.clone()]
                .into_iter()
                .map(|p| Forecast::new(p).expect("grid in [0,1]"))
                .collect()
        })
        .collect();

    let mut inner = Vec::new();
    let mut outer = Vec::new();
    let choices = intervals.len() * 2;
    let total = choices.checked_pow(horizon as u32).ok_or(Error::EnumerationTooLarge {
        count: u128::MAX,
        limit: 1_000_000,
    })?;
    if total > 1_000_000 {
        return Err(Error::EnumerationTooLarge {
            count: total as u128,
            limit: 1_000_000,
        });
    }
    for code in 0..total {
        let mut rest = code;
        let mut picks = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            picks.push((rest / 2 % intervals.len(), if rest % 2 == 0 { Outcome::Zero } else { Outcome::One }));
            rest /= choices;
        }
        let mut all = true;
        let mut any = false;
        let mut sample_ix = vec![0usize; horizon];
        'corners: loop {
            let prefix = PrequentialPrefix::new(
                picks
                    .iter()
                    .zip(&sample_ix)
                    .map(|(&(iv, y), &s)| (samples[iv][s].clone(), y))
                    .collect(),
            );
            if predicate(&prefix) {
                any = true;
            } else {
                all = false;
            }
            for slot in sample_ix.iter_mut() {
                *slot += 1;
                if *slot < 3 {
                    continue 'corners;
                }
                *slot = 0;
            }
            break;
        }
        let make_box = || {
            EventBox::new(
                picks
                    .iter()
                    .map(|&(iv, y)| BoxStep::new(intervals[iv].clone(), OutcomeConstraint::Exactly(y)))
                    .collect(),
            )
        };
        if all {
            inner.push(make_box()?);
        }
        if any {
            outer.push(make_box()?);
        }
    }
    Ok(RasterizedEvent {
        inner: EventUnion::new(horizon, inner)?,
        outer: EventUnion::new(horizon, outer)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn prefix(steps: &[(i64, i64, u8)]) -> PrequentialPrefix {
        PrequentialPrefix::from_ratios(steps).unwrap()
    }

    #[test]
    fn counterexample_membership() {
        let a = counterexample_a();
        assert!(a.contains(&prefix(&[(0, 1, 0), (1, 2, 0)])).unwrap());
        assert!(!a.contains(&prefix(&[(1, 2, 0), (0, 1, 1)])).unwrap());
        assert!(!EventUnion::empty(2).unwrap().contains(&prefix(&[(0, 1, 0), (1, 2, 0)])).unwrap());
    }

    #[test]
    fn contains_checks_arity() {
        let err = counterexample_a().contains(&prefix(&[(0, 1, 0)])).unwrap_err();
        assert!(matches!(err, Error::Arity { expected: 2, found: 1 }));
    }

    #[test]
    fn partition_of_counterexample_first_step() {
        let part = counterexample_a().forecast_partition(0).unwrap();
        assert_eq!(part.breakpoints(), &[ratio(0, 1), ratio(1, 2), ratio(1, 1)]);
        let cells: Vec<String> = part.cells().iter().map(|c| c.to_string()).collect();
        assert_eq!(cells, ["[0/1,0/1]", "(0/1,1/2)", "[1/2,1/2]", "(1/2,1/1]"]);
    }

    #[test]
    fn trivial_partitions() {
        let full = EventUnion::full(1).unwrap().forecast_partition(0).unwrap();
        assert_eq!(full.cells().len(), 1);
        assert_eq!(full.cells()[0].to_string(), "[0/1,1/1]");
        assert_eq!(full.breakpoints(), &[ratio(0, 1), ratio(1, 1)]);
        let empty = EventUnion::empty(1).unwrap().forecast_partition(0).unwrap();
        assert_eq!(empty.cells().len(), 1);
        assert_eq!(empty, ForecastPartition::trivial());
    }

    #[test]
    fn partition_merges_constant_runs() {
        let iv = Interval::new(ratio(1, 2), ratio(1, 1)).unwrap();
        let part = ForecastPartition::from_intervals(&[&iv]);
        let cells: Vec<String> = part.cells().iter().map(|c| c.to_string()).collect();
        assert_eq!(cells, ["[0/1,1/2)", "[1/2,1/1]"]);
        assert_eq!(part.cell_index(&ratio(1, 4)), Some(0));
        assert_eq!(part.cell_index(&ratio(1, 2)), Some(1));
    }

    #[test]
    fn intersection_of_counterexample_events() {
        let ab = counterexample_a().intersection(&counterexample_b()).unwrap();
        assert_eq!(ab.boxes(), &[EventBox::point(&[(0, 1, 0), (1, 2, 0)]).unwrap()]);
    }

    #[test]
    fn union_with_empty_is_identity() {
        let a = counterexample_a();
        assert_eq!(a.union(&EventUnion::empty(2).unwrap()).unwrap(), a);
    }

    #[test]
    fn incompatible_bits_drop_the_pair() {
        let zero = EventUnion::new(1, vec![EventBox::point(&[(1, 2, 0)]).unwrap()]).unwrap();
        let one = EventUnion::new(1, vec![EventBox::point(&[(1, 2, 1)]).unwrap()]).unwrap();
        assert!(zero.intersection(&one).unwrap().is_empty());
    }

    #[test]
    fn set_ops_reject_horizon_mismatch() {
        let a = counterexample_a();
        let one = EventUnion::full(1).unwrap();
        assert!(matches!(a.union(&one), Err(Error::Arity { .. })));
        assert!(matches!(a.intersection(&one), Err(Error::Arity { .. })));
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(ratio(1, 2), ratio(1, 4)).is_err());
        assert!(Interval::new(ratio(-1, 2), ratio(1, 4)).is_err());
        assert!(Interval::new(ratio(1, 2), ratio(3, 2)).is_err());
    }

    #[test]
    fn json_format() {
        let text = r#"{"horizon": 2, "boxes": [
            {"steps": [{"p": ["0", "1/2"], "y": 1}, {"p": ["1/4", "1/4"], "y": "*"}]}
        ]}"#;
        let event = EventUnion::from_json(text).unwrap();
        assert_eq!(event.horizon(), 2);
        assert_eq!(event.boxes()[0].steps()[1].outcome, OutcomeConstraint::Any);
        assert_eq!(EventUnion::from_json(&event.to_json().unwrap()).unwrap(), event);
        let bad = r#"{"horizon": 1, "boxes": [{"steps": [{"p": ["0", "1"], "y": "x"}]}]}"#;
        assert!(EventUnion::from_json(bad).is_err());
        let short = r#"{"horizon": 2, "boxes": [{"steps": [{"p": ["0", "1"], "y": 0}]}]}"#;
        assert!(matches!(EventUnion::from_json(short), Err(Error::Arity { .. })));
    }

    #[test]
    fn cell_text_round_trip() {
        for text in ["[0/1,1/2)", "(1/2,1/1]", "[1/3,1/3]"] {
            assert_eq!(text.parse::<Cell>().unwrap().to_string(), text);
        }
    }

    #[test]
    fn rasterized_bounds_sandwich_a_threshold_event() {
        // "first forecast at least 1/2 and first outcome 1"
        let raster = rasterize(1, &[ratio(1, 2)], |x| {
            let (p, y) = &x.steps()[0];
            *p.value() >= ratio(1, 2) && *y == Outcome::One
        })
        .unwrap();
        assert_eq!(raster.inner.boxes().len(), 1);
        assert_eq!(raster.outer.boxes().len(), 2);
        assert!(raster.inner.is_boxwise_subset_of(&raster.outer));
    }
}
