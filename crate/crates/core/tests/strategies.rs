use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prequential::random::{random_member, EventSampler};
use prequential::rational::{int, ratio, Rational};
use prequential::strategies::{
    check_process, default_probes, random_stream, run_stream, ville_check, AllInOnOne, CalibrationState,
    CalibrationStrategy, ConstantStrategy, LinearBet,
};
use prequential::{
    conditional_upper_probability, upper_game_probability, CheckMode, Error, Forecast, ForecastingSystem,
    LevyStrategy, Outcome, Step, Strategy,
};

#[test]
fn calibration_numerator_is_never_negative() {
    for seed in 0..200 {
        let stream = random_stream(20, 8, seed);
        let mut state = CalibrationState::new(20, ratio(1, 3)).unwrap();
        for (p, y) in &stream {
            let (next, capital) = state.step(p, *y).unwrap();
            assert!(capital >= int(0));
            assert!(next.variance() <= &ratio(20, 4));
            state = next;
        }
    }
}

#[test]
fn rejections_come_with_a_large_capital_ratio() {
    // Forecasts biased low against mostly-one outcomes push |S| over C·√N.
    let mut rejected = 0;
    for seed in 0..200u64 {
        let mut stream = random_stream(16, 4, seed);
        for (i, step) in stream.iter_mut().enumerate() {
            if i % 4 != 0 {
                step.1 = Outcome::One;
            }
        }
        let c = ratio(1, 2);
        let mut s = CalibrationStrategy::new(16, c.clone()).unwrap();
        run_stream(&mut s, &stream).unwrap();
        let verdict = s.state().verdict().unwrap();
        if verdict.reject {
            rejected += 1;
            assert!(verdict.ratio >= int(4) * &c * &c);
        }
    }
    assert!(rejected > 20, "only {rejected} streams hit the rejection region");
}

#[test]
fn fair_coin_doubling_reaches_four_a_quarter_of_the_time() {
    let phi = ForecastingSystem::constant(2, Forecast::half()).unwrap();
    let report = ville_check(&phi, &AllInOnOne::new(int(1)), &int(4), 10_000, 1).unwrap();
    assert!((0.23..=0.27).contains(&report.frequency), "{report:?}");
    assert_eq!(report.bound, 0.25);
    assert!(report.pass);
}

/// Claims a 10% gain every round no matter what happens.
#[derive(Clone)]
struct Inflated {
    capital: Rational,
}

impl Strategy for Inflated {
    fn name(&self) -> String {
        "inflated".into()
    }
    fn initial_capital(&self) -> Rational {
        int(1)
    }
    fn capital(&self) -> Rational {
        self.capital.clone()
    }
    fn step(&mut self, _: &Forecast, _: Outcome) -> prequential::Result<Rational> {
        self.capital *= ratio(11, 10);
        Ok(self.capital.clone())
    }
}

#[test]
fn inflated_strategies_are_refused() {
    let phi = ForecastingSystem::constant(3, Forecast::half()).unwrap();
    let err = ville_check(&phi, &Inflated { capital: int(1) }, &int(2), 100, 0).unwrap_err();
    assert!(matches!(err, Error::Uncertified(_)), "{err}");
}

#[test]
fn certified_strategies_obey_ville() {
    let phi = ForecastingSystem::from_fn(6, |h| {
        if h.len() % 2 == 0 { Forecast::ratio(1, 3).unwrap() } else { Forecast::ratio(3, 4).unwrap() }
    })
    .unwrap();
    for c in [int(2), int(4), int(8)] {
        let checks = [
            ville_check(&phi, &AllInOnOne::new(int(1)), &c, 4_000, 10),
            ville_check(&phi, &LinearBet::new(int(1), int(1)).unwrap(), &c, 4_000, 11),
            ville_check(&phi, &CalibrationStrategy::new(6, ratio(1, 2)).unwrap(), &c, 4_000, 12),
        ];
        for report in checks {
            let report = report.unwrap();
            assert!(report.pass, "{report:?}");
        }
    }
}

/// Records everything a strategy is shown.
#[derive(Clone)]
struct Recorder {
    seen: Arc<Mutex<Vec<Step>>>,
}

impl Strategy for Recorder {
    fn name(&self) -> String {
        "recorder".into()
    }
    fn initial_capital(&self) -> Rational {
        int(1)
    }
    fn capital(&self) -> Rational {
        int(1)
    }
    fn step(&mut self, forecast: &Forecast, outcome: Outcome) -> prequential::Result<Rational> {
        self.seen.lock().unwrap().push((forecast.clone(), outcome));
        Ok(int(1))
    }
}

#[test]
fn strategies_only_see_forecasts_and_outcomes() {
    let phi = ForecastingSystem::from_fn(5, |h| Forecast::ratio(h.len() as i64 + 1, 7).unwrap()).unwrap();
    let omega = phi.sample_outcomes(5, 3).unwrap();
    let stream = phi.induced_path(&omega).unwrap().steps().to_vec();
    let mut recorder = Recorder { seen: Arc::default() };
    run_stream(&mut recorder, &stream).unwrap();
    assert_eq!(*recorder.seen.lock().unwrap(), stream);
}

#[test]
fn levy_capital_grows_along_members_of_unlikely_events() {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let threshold = ratio(3, 4);
    let mut checked = 0;
    while checked < 20 {
        let event = sampler.event(&mut rng);
        if upper_game_probability(&event) >= threshold {
            continue;
        }
        let member = random_member(&event, &mut rng).unwrap();
        let mut levy = LevyStrategy::new(event.clone(), threshold.clone()).unwrap();
        let process = run_stream(&mut levy, member.steps()).unwrap();
        assert!(process.trajectory.iter().all(|c| *c >= int(0)));
        assert!(*process.final_capital() >= int(1) / &threshold);
        assert_eq!(conditional_upper_probability(&event, &member).unwrap(), int(1));
        let check = check_process(&LevyStrategy::new(event, threshold.clone()).unwrap(), member.steps(), &default_probes(), CheckMode::Super).unwrap();
        assert!(check.passed(), "{:?}", check.violations.first());
        checked += 1;
    }
}

#[test]
fn constant_strategy_never_hits() {
    let phi = ForecastingSystem::constant(4, Forecast::ratio(1, 5).unwrap()).unwrap();
    let report = ville_check(&phi, &ConstantStrategy::new(int(1)), &int(2), 1_000, 0).unwrap();
    assert_eq!(report.frequency, 0.0);
}
