use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid index ({i}, {j}) out of range for side {n_side}")]
    Index { i: usize, j: usize, n_side: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid grid side {0}: must be 2^m - 1 with m >= 1")]
    InvalidGrid(usize),

    #[error("triplet ({row}, {col}) outside a {rows}x{cols} matrix")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("duplicate triplet at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("backtracking exceeded {max_doublings} doublings; last estimate L = {last_lipschitz}")]
    Backtracking { max_doublings: usize, last_lipschitz: f64 },

    #[error("bracket [{lo}, {hi}] does not contain the minimizer")]
    Bracket { lo: f64, hi: f64 },

    #[error("grid side {n_side} cannot support {levels} levels")]
    TooDeep { n_side: usize, levels: usize },

    #[error("trace is missing `{0}`")]
    MissingTraceField(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
