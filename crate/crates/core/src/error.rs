use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its declared invariant.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The parameters lie outside the regime in which the quantity is defined
    /// (for example E <= 1, where the prey-free state (0,1) is unstable).
    #[error("regime error: {0}")]
    Regime(String),

    /// An argument lies outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The scalar steady-state quadratic has no real roots (h < h1(E)).
    #[error("no real roots: h = {h} is below h1(E) = {h1} for E = {e}")]
    NoRealRoots { e: f64, h: f64, h1: f64 },

    /// A bracketing root search did not see a sign change.
    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The PDE solver produced a non-finite value.
    #[error("numerical blow-up at t = {t}: node {node} holds {value}")]
    NumericalBlowup { t: f64, node: usize, value: f64 },

    /// The PDE solver produced a negative density beyond the clamp window.
    #[error("negative density {value} at node {node}, t = {t}")]
    NegativeDensity { t: f64, node: usize, value: f64 },

    /// Inconsistent simulation or sweep configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

/// Rejects E <= 1, where (0,1) is unstable and the thresholds are undefined.
pub(crate) fn require_bistable_encounter(e: f64) -> Result<()> {
    if e.is_finite() && e > 1.0 {
        Ok(())
    } else {
        Err(Error::Regime(format!(
            "E = {e} <= 1: the prey-free state (0,1) is unstable and no extinction threshold exists"
        )))
    }
}
