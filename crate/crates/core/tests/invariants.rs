use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prequential::random::{random_member, EventSampler};
use prequential::rational::{self, Rational};
use prequential::{BinaryHistory, EventUnion, Forecast, ForecastingSystem, Outcome, PrequentialPrefix};

fn system(seed: u64, horizon: usize) -> ForecastingSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EventSampler::desk_scale().forecasting_system(horizon, &mut rng)
}

fn history(bits: &[bool]) -> BinaryHistory {
    BinaryHistory::new(bits.iter().map(|&b| if b { Outcome::One } else { Outcome::Zero }).collect())
}

fn event_pair(seed: u64) -> (EventUnion, EventUnion) {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = sampler.event(&mut rng);
    let b = sampler.event_with_horizon(a.horizon(), &mut rng);
    (a, b)
}

/// Paths drawn near the two events' box boundaries and uniformly on a grid.
fn probe_paths(a: &EventUnion, b: &EventUnion, seed: u64) -> Vec<PrequentialPrefix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut paths = Vec::new();
    for _ in 0..8 {
        paths.extend(random_member(a, &mut rng));
        paths.extend(random_member(b, &mut rng));
    }
    let grid = ForecastingSystem::from_fn(a.horizon(), |_| Forecast::half()).unwrap();
    for omega in BinaryHistory::all_of_length(a.horizon()) {
        paths.push(grid.induced_path(&omega).unwrap());
    }
    paths
}

proptest! {
    #[test]
    fn cylinder_mass_splits_between_children(seed in any::<u64>(), bits in prop::collection::vec(any::<bool>(), 0..3)) {
        let phi = system(seed, 3);
        let x = history(&bits);
        let parent = phi.cylinder_probability(&x).unwrap();
        let children: Rational = Outcome::BOTH
            .iter()
            .map(|&y| phi.cylinder_probability(&x.child(y)).unwrap())
            .sum();
        prop_assert_eq!(parent, children);
    }

    #[test]
    fn induced_paths_preserve_length_and_prefixes(seed in any::<u64>(), bits in prop::collection::vec(any::<bool>(), 0..=3)) {
        let phi = system(seed, 3);
        let omega = history(&bits);
        let path = phi.induced_path(&omega).unwrap();
        prop_assert_eq!(path.len(), omega.len());
        prop_assert_eq!(path.outcomes(), omega.clone());
        for m in 0..=omega.len() {
            let shorter = phi.induced_path(&omega.prefix(m)).unwrap();
            prop_assert!(shorter.is_prefix_of(&path));
        }
    }

    #[test]
    fn set_operations_match_pointwise_logic(seed in any::<u64>()) {
        let (a, b) = event_pair(seed);
        let union = a.union(&b).unwrap();
        let meet = a.intersection(&b).unwrap();
        for x in probe_paths(&a, &b, seed ^ 0x5eed) {
            let (in_a, in_b) = (a.contains(&x).unwrap(), b.contains(&x).unwrap());
            prop_assert_eq!(union.contains(&x).unwrap(), in_a || in_b);
            prop_assert_eq!(meet.contains(&x).unwrap(), in_a && in_b);
        }
    }

    #[test]
    fn partition_cells_have_constant_membership(seed in any::<u64>(), num in 0i64..=48, other in 0i64..=48) {
        let (event, _) = event_pair(seed);
        let p = rational::ratio(num, 48);
        let q = rational::ratio(other, 48);
        for step in 0..event.horizon() {
            let partition = event.forecast_partition(step).unwrap();
            if partition.cell_index(&p) == partition.cell_index(&q) {
                for b in event.boxes() {
                    let iv = &b.steps()[step].forecast;
                    prop_assert_eq!(iv.contains(&p), iv.contains(&q));
                }
            }
        }
    }
}

#[test]
fn partitions_tile_the_unit_interval() {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let event = sampler.event(&mut rng);
        for step in 0..event.horizon() {
            let partition = event.forecast_partition(step).unwrap();
            let rebuilt = prequential::ForecastPartition::from_cells(partition.cells().to_vec()).unwrap();
            assert_eq!(rebuilt.cells(), partition.cells());
            for b in event.boxes() {
                let iv = &b.steps()[step].forecast;
                assert!(partition.breakpoints().contains(iv.lo()));
                assert!(partition.breakpoints().contains(iv.hi()));
            }
        }
    }
}

#[test]
fn constant_forecasts_sample_near_their_mean() {
    for (num, den) in [(1, 10), (1, 2), (7, 8)] {
        let c = rational::ratio(num, den);
        let phi = ForecastingSystem::constant(1, Forecast::new(c.clone()).unwrap()).unwrap();
        let n = 10_000u64;
        let ones = (0..n)
            .filter(|&s| phi.sample_outcomes(1, s).unwrap().bits()[0] == Outcome::One)
            .count();
        let mean = ones as f64 / n as f64;
        let c = rational::to_f64(&c);
        let tolerance = 4.0 * (c * (1.0 - c) / n as f64).sqrt();
        assert!((mean - c).abs() <= tolerance, "c={c} mean={mean}");
    }
}
