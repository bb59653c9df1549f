//! Finite-horizon forecasting systems and the measure they induce on
//! outcome sequences.
//!
//! A forecasting system maps every outcome history of length `< horizon` to
//! a forecast. It induces a probability measure on `{0,1}^horizon` through
//! the product of its one-step forecasts, and it turns an outcome sequence
//! into a prequential path by interleaving its forecasts with the outcomes.
//!
//! # Sampling
//!
//! [`ForecastingSystem::sample_outcomes`] seeds a ChaCha8 generator
//! (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`) and, for each step, draws
//! `u = rng.random::<f64>()` uniform on `[0,1)` and emits `1` iff
//! `u < p` where `p` is the current forecast converted to `f64`. Forecast 1
//! therefore always yields `1` and forecast 0 always yields `0`.

use std::collections::BTreeMap;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::types::{BinaryHistory, Forecast, Outcome, PrequentialPrefix};

/// Largest horizon [`ForecastingSystem::from_fn`] will tabulate.
pub const MAX_TABULATED_HORIZON: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForecastingSystem {
    horizon: usize,
    table: BTreeMap<BinaryHistory, Forecast>,
}

impl ForecastingSystem {
    /// Builds a system from an explicit table, which must cover every
    /// history of length `0..horizon` and nothing else.
    pub fn from_table(horizon: usize, table: BTreeMap<BinaryHistory, Forecast>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::State("forecasting system horizon must be positive".into()));
        }
        for n in 0..horizon {
            for history in BinaryHistory::all_of_length(n) {
                if !table.contains_key(&history) {
                    return Err(Error::MissingHistory(history.to_string()));
                }
            }
        }
        if let Some(extra) = table.keys().find(|h| h.len() >= horizon) {
            return Err(Error::HorizonExceeded {
                length: extra.len(),
                horizon,
            });
        }
        Ok(ForecastingSystem { horizon, table })
    }

    /// Tabulates `f` over every history below the horizon. Refuses
    /// horizons above [`MAX_TABULATED_HORIZON`].
    pub fn from_fn(horizon: usize, mut f: impl FnMut(&BinaryHistory) -> Forecast) -> Result<Self> {
        if horizon > MAX_TABULATED_HORIZON {
            return Err(Error::EnumerationTooLarge {
                count: 1u128.checked_shl(horizon as u32).unwrap_or(u128::MAX),
                limit: 1u128 << MAX_TABULATED_HORIZON,
            });
        }
        let table = (0..horizon)
            .flat_map(BinaryHistory::all_of_length)
            .map(|h| {
                let p = f(&h);
                (h, p)
            })
            .collect();
        Self::from_table(horizon, table)
    }

    pub fn constant(horizon: usize, forecast: Forecast) -> Result<Self> {
        Self::from_fn(horizon, |_| forecast.clone())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn table(&self) -> &BTreeMap<BinaryHistory, Forecast> {
        &self.table
    }

    pub fn forecast(&self, history: &BinaryHistory) -> Result<&Forecast> {
        self.table.get(history).ok_or(Error::HorizonExceeded {
            length: history.len(),
            horizon: self.horizon,
        })
    }

    fn check_length(&self, length: usize) -> Result<()> {
        if length > self.horizon {
            return Err(Error::HorizonExceeded {
                length,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Interleaves the system's forecasts with `omega`: the i-th step is
    /// `(phi(y_1..y_{i-1}), y_i)`.
    pub fn induced_path(&self, omega: &BinaryHistory) -> Result<PrequentialPrefix> {
        self.check_length(omega.len())?;
        let mut path = PrequentialPrefix::empty();
        for (i, &y) in omega.bits().iter().enumerate() {
            let p = self.forecast(&omega.prefix(i))?.clone();
            path.push(p, y);
        }
        Ok(path)
    }

    /// Measure of the cylinder of sequences extending `x`.
    pub fn cylinder_probability(&self, x: &BinaryHistory) -> Result<Rational> {
        self.check_length(x.len())?;
        let mut prob = Rational::one();
        for (i, &y) in x.bits().iter().enumerate() {
            prob *= self.forecast(&x.prefix(i))?.probability_of(y);
        }
        Ok(prob)
    }

    /// Draws `n` outcomes sequentially from the induced measure. See the
    /// module docs for the exact generator contract.
    pub fn sample_outcomes(&self, n: usize, seed: u64) -> Result<BinaryHistory> {
        self.check_length(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut history = BinaryHistory::empty();
        for _ in 0..n {
            let p = rational::to_f64(self.forecast(&history)?.value());
            let u: f64 = rng.random();
            let y = if u < p { Outcome::One } else { Outcome::Zero };
            history = history.child(y);
        }
        Ok(history)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ForecastingSystemFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ForecastingSystemFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// On-disk form: `{"horizon": N, "table": {"<bits>": "num/den", ...}}`.
#[derive(Serialize, Deserialize)]
struct ForecastingSystemFile {
    horizon: usize,
    table: BTreeMap<String, String>,
}

impl From<&ForecastingSystem> for ForecastingSystemFile {
    fn from(phi: &ForecastingSystem) -> Self {
        // Keys sort as strings, which puts "" first and keeps output stable.
        let table = phi
            .table
            .iter()
            .map(|(h, p)| (h.to_string(), p.to_string()))
            .collect();
        ForecastingSystemFile {
            horizon: phi.horizon,
            table,
        }
    }
}

impl TryFrom<ForecastingSystemFile> for ForecastingSystem {
    type Error = Error;

    fn try_from(file: ForecastingSystemFile) -> Result<Self> {
        let table = file
            .table
            .iter()
            .map(|(k, v)| Ok((k.parse::<BinaryHistory>()?, v.parse::<Forecast>()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        ForecastingSystem::from_table(file.horizon, table)
    }
}
