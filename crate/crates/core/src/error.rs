use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An input parameter violates an admissibility constraint.
    #[error("parameter error: {0}")]
    Param(String),
    /// A structural constraint on a tuple or field is violated.
    #[error("constraint error: {0}")]
    Constraint(String),
    /// A grid is too small to represent the field without aliasing.
    #[error("aliasing error: grid size {m} is below the minimum {min}")]
    Aliasing { m: usize, min: usize },
    /// An enumeration would visit more tuples than the configured budget.
    #[error("budget exceeded: {needed} tuple visits requested, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    /// The time integrator produced a non-finite state.
    #[error("integration blowup at t = {t}")]
    Integration { t: f64 },
    /// A Monte Carlo estimator had no usable samples.
    #[error("degenerate estimate: {0}")]
    Degenerate(String),
    /// Malformed serialized data.
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with [`Error::BudgetExceeded`] when `needed > budget`.
pub fn check_budget(needed: u64, budget: u64) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}
