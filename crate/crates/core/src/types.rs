//! Forecasts, outcomes and the two kinds of finite histories.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A probability that the next outcome is 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Forecast(Rational);

impl Forecast {
    pub fn new(value: Rational) -> Result<Self> {
        if value < Rational::zero() || value > Rational::one() {
            return Err(Error::InvalidForecast(rational::render(&value)));
        }
        Ok(Forecast(value))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        Self::new(rational::ratio(num, den))
    }

    pub fn zero() -> Self {
        Forecast(Rational::zero())
    }

    pub fn one() -> Self {
        Forecast(Rational::one())
    }

    pub fn half() -> Self {
        Forecast(rational::ratio(1, 2))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }

    /// Probability this forecast assigns to `outcome`.
    pub fn probability_of(&self, outcome: Outcome) -> Rational {
        match outcome {
            Outcome::One => self.0.clone(),
            Outcome::Zero => Rational::one() - &self.0,
        }
    }
}

impl fmt::Display for Forecast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational::render(&self.0))
    }
}

impl FromStr for Forecast {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Forecast::new(rational::parse(s)?)
    }
}

impl TryFrom<String> for Forecast {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Forecast> for String {
    fn from(f: Forecast) -> String {
        f.to_string()
    }
}

/// A binary outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Outcome::Zero),
            1 => Ok(Outcome::One),
            _ => Err(Error::Parse {
                what: "outcome",
                input: bit.to_string(),
            }),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }

    pub fn as_rational(self) -> Rational {
        rational::int(self.bit() as i64)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Outcome::Zero),
            "1" => Ok(Outcome::One),
            other => Err(Error::Parse {
                what: "outcome",
                input: other.to_string(),
            }),
        }
    }
}

/// One round of the forecasting protocol.
pub type Step = (Forecast, Outcome);

/// A finite forecast/outcome sequence `(p_1, y_1, ..., p_n, y_n)`.
///
/// The empty prefix is the root of the prequential tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PrequentialPrefix {
    steps: Vec<Step>,
}

impl PrequentialPrefix {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(steps: Vec<Step>) -> Self {
        PrequentialPrefix { steps }
    }

    /// Builds a prefix from interleaved `(p, y)` literals, e.g.
    /// `[(0, 1, 0), (1, 2, 1)]` for `(0, 0, 1/2, 1)` as (num, den, bit).
    pub fn from_ratios(steps: &[(i64, i64, u8)]) -> Result<Self> {
        steps
            .iter()
            .map(|&(num, den, bit)| Ok((Forecast::ratio(num, den)?, Outcome::from_bit(bit)?)))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn push(&mut self, forecast: Forecast, outcome: Outcome) {
        self.steps.push((forecast, outcome));
    }

    /// The first `n` steps (all of them when `n >= len`).
    pub fn truncate_to(&self, n: usize) -> PrequentialPrefix {
        PrequentialPrefix {
            steps: self.steps[..n.min(self.steps.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &PrequentialPrefix) -> bool {
        other.steps.starts_with(&self.steps)
    }

    /// The outcome history obtained by forgetting the forecasts.
    pub fn outcomes(&self) -> BinaryHistory {
        BinaryHistory::new(self.steps.iter().map(|(_, y)| *y).collect())
    }
}

impl fmt::Display for PrequentialPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (p, y)) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}, {y}")?;
        }
        f.write_str(")")
    }
}

/// A finite binary outcome history. Displayed as a bit string; the empty
/// history renders as `""`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryHistory {
    bits: Vec<Outcome>,
}

impl BinaryHistory {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(bits: Vec<Outcome>) -> Self {
        BinaryHistory { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[Outcome] {
        &self.bits
    }

    pub fn prefix(&self, n: usize) -> BinaryHistory {
        BinaryHistory::new(self.bits[..n].to_vec())
    }

    pub fn child(&self, outcome: Outcome) -> BinaryHistory {
        let mut bits = self.bits.clone();
        bits.push(outcome);
        BinaryHistory { bits }
    }

    /// All histories of length exactly `n`, in lexicographic order.
    pub fn all_of_length(n: usize) -> Vec<BinaryHistory> {
        let mut level = vec![BinaryHistory::empty()];
        for _ in 0..n {
            level = level
                .iter()
                .flat_map(|h| Outcome::BOTH.map(|y| h.child(y)))
                .collect();
        }
        level
    }
}

impl fmt::Display for BinaryHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in &self.bits {
            write!(f, "{bit}")?;
        }
        Ok(())
    }
}

impl FromStr for BinaryHistory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(Outcome::Zero),
                '1' => Ok(Outcome::One),
                _ => Err(Error::Parse {
                    what: "binary history",
                    input: s.to_string(),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(BinaryHistory::new)
    }
}
