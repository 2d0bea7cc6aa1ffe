use thiserror::Error;

use crate::fluctuation::ModeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("two-mode squeeze needs two distinct modes, got {0} twice")]
    InvalidPair(ModeId),

    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("parameter `{name}` out of range: {reason}")]
    OutOfRange { name: &'static str, reason: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("step size {dt} violates dt*g <= {bound} (g = {g})")]
    StepTooLarge { dt: f64, g: f64, bound: f64 },

    #[error("reservoir of {0} modes exceeds the dense propagator cap of {cap}", cap = crate::reservoir::MAX_DENSE_MODES)]
    ReservoirTooLarge(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    finite(name, value)?;
    if value < 0.0 {
        return Err(Error::OutOfRange {
            name,
            reason: format!("expected >= 0, got {value}"),
        });
    }
    Ok(value)
}
