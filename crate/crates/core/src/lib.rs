//! Exact finite-horizon prequential probability.
//!
//! Two independent engines compute the upper probability of a compact
//! prequential event (a finite union of closed boxes at a fixed horizon):
//!
//! * [`gameprob`] runs backward induction on the prequential tree and yields
//!   the least initial capital of a non-negative superfarthingale reaching 1
//!   on the event, together with a witness table and optimal forecasts;
//! * [`measureprob`] maximizes, over forecasting systems, the probability
//!   that the induced forecast/outcome path lands in the event, and returns
//!   a maximizing forecasting system.
//!
//! The two values coincide on every event; [`measureprob::grid_bruteforce`]
//! and [`measureprob::monte_carlo_probability`] provide further independent
//! checks. [`strategies`] holds betting strategies for testing forecast
//! streams, including the finite-horizon calibration test and Ville's
//! inequality check.

pub mod error;
pub mod events;
pub mod forecasting;
pub mod gameprob;
pub mod kernel;
pub mod measureprob;
pub mod random;
pub mod rational;
pub mod strategies;
pub mod types;

pub use error::{Error, Result};
pub use events::{counterexample_a, counterexample_b, EventBox, EventUnion, ForecastPartition, Interval};
pub use forecasting::ForecastingSystem;
pub use gameprob::{
    conditional_upper_probability, optimal_forecast_at, upper_game_probability,
    witness_superfarthingale, CellPath, LevyStrategy, ValueFunction,
};
pub use measureprob::{
    exact_event_probability, grid_bruteforce, measure_upper_probability, monte_carlo_probability,
};
pub use rational::Rational;
pub use strategies::{CapitalProcess, CheckMode, Strategy};
pub use types::{BinaryHistory, Forecast, Outcome, PrequentialPrefix, Step};
