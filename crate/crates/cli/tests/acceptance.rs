//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p prequential-cli --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::{Duration, Instant};

use prequential::events::{BoxStep, OutcomeConstraint};
use prequential::measureprob::grid_bruteforce;
use prequential::random::{random_member, EventSampler};
use prequential::rational::{self, int, ratio, Rational};
use prequential::strategies::{
    check_farthingale, check_process, default_probes, random_stream, run_stream, ville_check, AllInOnOne,
    CalibrationStrategy, LinearBet,
};
use prequential::{
    conditional_upper_probability, exact_event_probability, measure_upper_probability, upper_game_probability,
    witness_superfarthingale, CheckMode, EventBox, EventUnion, Forecast, ForecastingSystem, Interval,
    LevyStrategy, Outcome,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let elapsed = started.elapsed();
    if elapsed < limit {
        Ok(elapsed)
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn preq(args: &[&str]) -> (i32, serde_json::Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_preq"))
        .args(args)
        .arg("--json")
        .output()
        .expect("preq runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap_or(-1), report)
}

fn counterexample_exactness() -> Verdict {
    let started = Instant::now();
    let (code, report) = preq(&["counterexample"]);
    let elapsed = within(Duration::from_secs(1), started)?;
    let results = &report["results"];
    let expected = [
        ("UpProb(A)", "1/2"),
        ("UpProb(B)", "1/2"),
        ("UpProb(A_union_B)", "1/1"),
        ("UpProb(A_intersect_B)", "1/2"),
        ("union_plus_intersection", "3/2"),
        ("sum_of_parts", "1/1"),
    ];
    for (key, value) in expected {
        if results[key] != value {
            return Err(format!("{key} = {}, expected {value}", results[key]));
        }
    }
    if code != 0 {
        return Err(format!("exit code {code}"));
    }
    Ok(format!("1 + 1/2 > 1/2 + 1/2 in {elapsed:.2?}"))
}

fn duality_at_desk_scale() -> Verdict {
    let started = Instant::now();
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let event = sampler.event(&mut rng);
        let game = upper_game_probability(&event);
        let (measure, _) = measure_upper_probability(&event);
        if game != measure {
            return Err(format!(
                "event #{i}: game {} != measure {}",
                rational::render(&game),
                rational::render(&measure)
            ));
        }
    }
    let elapsed = within(Duration::from_secs(60), started)?;
    Ok(format!("200 events equal in {elapsed:.2?}"))
}

fn one_sided_bound() -> Verdict {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..200 {
        let event = sampler.event(&mut rng);
        let phi = sampler.forecasting_system(event.horizon(), &mut rng);
        let exact = exact_event_probability(&phi, &event).map_err(|e| e.to_string())?;
        let upper = upper_game_probability(&event);
        if exact > upper {
            return Err(format!("pair #{i}: {} > {}", rational::render(&exact), rational::render(&upper)));
        }
    }
    Ok("200 pairs".into())
}

fn oracle_agreement() -> Verdict {
    let started = Instant::now();
    let sampler = EventSampler::on_grid(2, 3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..50 {
        let event = sampler.event_with_horizon(2, &mut rng);
        let brute = grid_bruteforce(&event, 4).map_err(|e| e.to_string())?;
        let (measure, _) = measure_upper_probability(&event);
        if brute != measure {
            return Err(format!("event #{i}: grid {} != measure {}", rational::render(&brute), rational::render(&measure)));
        }
    }
    let elapsed = within(Duration::from_secs(120), started)?;
    Ok(format!("50 events equal in {elapsed:.2?}"))
}

fn ville_inequality() -> Verdict {
    let fair = ForecastingSystem::constant(2, Forecast::half()).map_err(|e| e.to_string())?;
    let doubling = ville_check(&fair, &AllInOnOne::new(int(1)), &int(4), 10_000, 5).map_err(|e| e.to_string())?;
    if !(0.23..=0.27).contains(&doubling.frequency) {
        return Err(format!("doubling frequency {} outside [0.23, 0.27]", doubling.frequency));
    }
    let phi = ForecastingSystem::from_fn(6, |h| {
        if h.len() % 2 == 0 { Forecast::ratio(1, 3).unwrap() } else { Forecast::ratio(3, 4).unwrap() }
    })
    .map_err(|e| e.to_string())?;
    for c in [int(2), int(4), int(8)] {
        let reports = [
            ville_check(&phi, &AllInOnOne::new(int(1)), &c, 4_000, 10),
            ville_check(&phi, &LinearBet::new(int(1), int(1)).unwrap(), &c, 4_000, 11),
            ville_check(&phi, &CalibrationStrategy::new(6, ratio(1, 2)).unwrap(), &c, 4_000, 12),
        ];
        for report in reports {
            let report = report.map_err(|e| e.to_string())?;
            if !report.pass {
                return Err(format!("C = {}: frequency {} vs bound {}", rational::render(&c), report.frequency, report.bound));
            }
        }
    }
    Ok(format!("doubling frequency {}, 3x3 matrix certified", doubling.frequency))
}

fn superfarthingale_law() -> Verdict {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for i in 0..100 {
        let event = sampler.event(&mut rng);
        let table = witness_superfarthingale(&event);
        let check = check_farthingale(&table, CheckMode::Super).map_err(|e| e.to_string())?;
        if let Some(v) = check.violations.first() {
            return Err(format!("event #{i}: node [{}] p={}", v.node, rational::render(&v.forecast)));
        }
    }
    Ok("100 tables".into())
}

fn calibration_witness() -> Verdict {
    let probes = default_probes();
    for seed in 0..100 {
        let stream = random_stream(12, 6, seed);
        let strategy = CalibrationStrategy::new(12, ratio(1, 2)).map_err(|e| e.to_string())?;
        let check = check_process(&strategy, &stream, &probes, CheckMode::Exact).map_err(|e| e.to_string())?;
        if !check.passed() {
            return Err(format!("stream seed {seed}: {:?}", check.violations.first()));
        }
    }
    let fixture: Vec<_> = (0..100).map(|_| (Forecast::zero(), Outcome::One)).collect();
    let mut strategy = CalibrationStrategy::new(100, int(1)).map_err(|e| e.to_string())?;
    let process = run_stream(&mut strategy, &fixture).map_err(|e| e.to_string())?;
    let verdict = strategy.state().verdict().map_err(|e| e.to_string())?;
    if *process.final_capital() != ratio(401, 5) || verdict.ratio != int(401) || !verdict.reject {
        return Err(format!(
            "final {} ratio {} reject {}",
            rational::render(process.final_capital()),
            rational::render(&verdict.ratio),
            verdict.reject
        ));
    }
    Ok("100 streams exact; fixture 401/5, ratio 401 >= 4".into())
}

fn capacity_continuity() -> Verdict {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for family in 0..40 {
        let horizon = rng.random_range(1..=3);
        let mut current = EventUnion::empty(horizon).map_err(|e| e.to_string())?;
        let mut previous = int(0);
        for _ in 0..4 {
            current = current.union(&sampler.event_with_horizon(horizon, &mut rng)).map_err(|e| e.to_string())?;
            let value = upper_game_probability(&current);
            if value < previous {
                return Err(format!("increasing family #{family} lost value"));
            }
            previous = value;
        }
    }
    for horizon in 1..=3 {
        for step in 0..horizon {
            let shrinking = |hi: Rational| {
                let steps = (0..horizon)
                    .map(|i| {
                        if i == step {
                            BoxStep::new(Interval::new(int(0), hi.clone()).unwrap(), OutcomeConstraint::Exactly(Outcome::One))
                        } else {
                            BoxStep::new(Interval::unit(), OutcomeConstraint::Any)
                        }
                    })
                    .collect();
                EventUnion::new(horizon, vec![EventBox::new(steps).unwrap()]).unwrap()
            };
            for k in 2..=12 {
                let value = upper_game_probability(&shrinking(ratio(1, 2) + ratio(1, k)));
                if value != ratio(1, 2) + ratio(1, k) {
                    return Err(format!("box [0, 1/2 + 1/{k}] at step {step} has value {}", rational::render(&value)));
                }
            }
            if upper_game_probability(&shrinking(ratio(1, 2))) != ratio(1, 2) {
                return Err(format!("limit box at step {step} of {horizon}"));
            }
        }
    }
    Ok("40 increasing families, 6 decreasing box sequences".into())
}

fn levy_strategy() -> Verdict {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let threshold = ratio(2, 3);
    let mut checked = 0;
    while checked < 50 {
        let event = sampler.event(&mut rng);
        if upper_game_probability(&event) >= threshold {
            continue;
        }
        let Some(member) = random_member(&event, &mut rng) else { continue };
        let mut levy = LevyStrategy::new(event.clone(), threshold.clone()).map_err(|e| e.to_string())?;
        let process = run_stream(&mut levy, member.steps()).map_err(|e| e.to_string())?;
        if *process.final_capital() < int(1) / &threshold {
            return Err(format!("member {member}: capital {}", rational::render(process.final_capital())));
        }
        if conditional_upper_probability(&event, &member).map_err(|e| e.to_string())? != int(1) {
            return Err(format!("member {member}: conditional value below 1"));
        }
        checked += 1;
    }
    Ok("50 members reach 1/a".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("counterexample exactness", counterexample_exactness),
        ("duality at desk scale", duality_at_desk_scale),
        ("one-sided bound", one_sided_bound),
        ("grid oracle agreement", oracle_agreement),
        ("Ville's inequality", ville_inequality),
        ("superfarthingale law", superfarthingale_law),
        ("calibration witness", calibration_witness),
        ("capacity continuity", capacity_continuity),
        ("Lévy strategy", levy_strategy),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
