use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon exceeded: length {length} is beyond horizon {horizon}")]
    HorizonExceeded { length: usize, horizon: usize },

    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("forecast {0} lies outside [0,1]")]
    InvalidForecast(String),

    #[error("interval [{lo}, {hi}] is not a closed subinterval of [0,1]")]
    InvalidInterval { lo: String, hi: String },

    #[error("could not parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("forecasting system table is missing history {0:?}")]
    MissingHistory(String),

    #[error("value table is incomplete: no entry for node {0:?}")]
    IncompleteTable(String),

    #[error("enumerating {count} forecasting systems exceeds the limit of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("invalid state: {0}")]
    State(String),

    #[error("strategy failed certification: {0}")]
    Uncertified(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
