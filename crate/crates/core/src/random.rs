//! Seeded generators for events, forecasting systems and event members,
//! used by the duality sweeps and the property suites.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::events::{BoxStep, EventBox, EventUnion, Interval, OutcomeConstraint};
use crate::forecasting::ForecastingSystem;
use crate::rational::{self, Rational};
use crate::types::{Forecast, Outcome, PrequentialPrefix};

/// Shape of randomly generated events.
#[derive(Clone, Debug)]
pub struct EventSampler {
    pub max_horizon: usize,
    pub max_boxes: usize,
    /// Interval endpoints are drawn from these values.
    pub endpoints: Vec<Rational>,
    /// Probability that a step interval collapses to a point.
    pub point_probability: f64,
    /// Probability that a step leaves the outcome free.
    pub wildcard_probability: f64,
}

/// All fractions in `[0,1]` with denominator at most `max_den`, sorted.
pub fn fractions_up_to(max_den: i64) -> Vec<Rational> {
    let mut all: Vec<Rational> = (1..=max_den)
        .flat_map(|d| (0..=d).map(move |n| rational::ratio(n, d)))
        .collect();
    all.sort();
    all.dedup();
    all
}

impl EventSampler {
    /// Horizon ≤ 3, at most 3 boxes, endpoints with denominators ≤ 8.
    pub fn desk_scale() -> Self {
        EventSampler {
            max_horizon: 3,
            max_boxes: 3,
            endpoints: fractions_up_to(8),
            point_probability: 0.3,
            wildcard_probability: 0.3,
        }
    }

    /// Horizon exactly `horizon`, endpoints on `{0, 1/k, ..., 1}`.
    pub fn on_grid(horizon: usize, max_boxes: usize, k: i64) -> Self {
        EventSampler {
            max_horizon: horizon,
            max_boxes,
            endpoints: (0..=k).map(|i| rational::ratio(i, k)).collect(),
            point_probability: 0.3,
            wildcard_probability: 0.3,
        }
    }

    pub fn interval<R: Rng + ?Sized>(&self, rng: &mut R) -> Interval {
        let a = self.endpoints.choose(rng).expect("endpoints").clone();
        if rng.random_bool(self.point_probability) {
            return Interval::point(a).expect("endpoint in [0,1]");
        }
        let b = self.endpoints.choose(rng).expect("endpoints").clone();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Interval::new(lo, hi).expect("endpoints in [0,1]")
    }

    pub fn outcome_constraint<R: Rng + ?Sized>(&self, rng: &mut R) -> OutcomeConstraint {
        if rng.random_bool(self.wildcard_probability) {
            OutcomeConstraint::Any
        } else if rng.random_bool(0.5) {
            OutcomeConstraint::Exactly(Outcome::One)
        } else {
            OutcomeConstraint::Exactly(Outcome::Zero)
        }
    }

    pub fn event_box<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> EventBox {
        EventBox::new(
            (0..horizon)
                .map(|_| BoxStep::new(self.interval(rng), self.outcome_constraint(rng)))
                .collect(),
        )
        .expect("positive horizon")
    }

    /// An event with a uniformly drawn horizon in `1..=max_horizon` and
    /// `1..=max_boxes` boxes.
    pub fn event<R: Rng + ?Sized>(&self, rng: &mut R) -> EventUnion {
        let horizon = rng.random_range(1..=self.max_horizon);
        self.event_with_horizon(horizon, rng)
    }

    pub fn event_with_horizon<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> EventUnion {
        let count = rng.random_range(1..=self.max_boxes);
        let boxes = (0..count).map(|_| self.event_box(horizon, rng)).collect();
        EventUnion::new(horizon, boxes).expect("boxes share the horizon")
    }

    /// A forecasting system whose forecasts are drawn from the endpoint set,
    /// so that they regularly hit box boundaries.
    pub fn forecasting_system<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> ForecastingSystem {
        ForecastingSystem::from_fn(horizon, |_| {
            Forecast::new(self.endpoints.choose(rng).expect("endpoints").clone()).expect("endpoint in [0,1]")
        })
        .expect("positive horizon")
    }
}

/// A path of the event: a random box, with each forecast drawn from the
/// box's interval endpoints and midpoint and each free outcome drawn
/// uniformly. `None` for the empty event.
pub fn random_member<R: Rng + ?Sized>(event: &EventUnion, rng: &mut R) -> Option<PrequentialPrefix> {
    let chosen = event.boxes().choose(rng)?;
    let steps = chosen
        .steps()
        .iter()
        .map(|step| {
            let lo = step.forecast.lo().clone();
            let hi = step.forecast.hi().clone();
            let mid = (&lo + &hi) / rational::int(2);
            let p = [lo, mid, hi].choose(rng).expect("three candidates").clone();
            let y = match step.outcome {
                OutcomeConstraint::Exactly(y) => y,
                OutcomeConstraint::Any => {
                    if rng.random_bool(0.5) {
                        Outcome::One
                    } else {
                        Outcome::Zero
                    }
                }
            };
            (Forecast::new(p).expect("interval in [0,1]"), y)
        })
        .collect();
    Some(PrequentialPrefix::new(steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn desk_scale_events_respect_limits() {
        let sampler = EventSampler::desk_scale();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let e = sampler.event(&mut rng);
            assert!((1..=3).contains(&e.horizon()));
            assert!((1..=3).contains(&e.boxes().len()));
            for b in e.boxes() {
                for s in b.steps() {
                    assert!(*s.forecast.lo().denom() <= 8.into());
                }
            }
        }
    }

    #[test]
    fn members_belong_to_their_event() {
        let sampler = EventSampler::desk_scale();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let e = sampler.event(&mut rng);
            let x = random_member(&e, &mut rng).unwrap();
            assert!(e.contains(&x).unwrap());
        }
        assert!(random_member(&EventUnion::empty(1).unwrap(), &mut rng).is_none());
    }

    #[test]
    fn fraction_table() {
        let f = fractions_up_to(4);
        assert_eq!(f.len(), 7); // 0, 1/4, 1/3, 1/2, 2/3, 3/4, 1
    }
}
