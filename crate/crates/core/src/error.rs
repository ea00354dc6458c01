use alloc::string::String;

use crate::model::Side;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch: {what} has {found} entries, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("node index {index} out of range for {side} force of size {size}")]
    NodeOutOfRange { side: Side, index: usize, size: usize },

    #[error("self loop at node {0}")]
    SelfLoop(usize),

    #[error("asymmetric manoeuvre matrix at ({0}, {1})")]
    Asymmetric(usize, usize),

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("infeasible link count: requested {requested}, at most {capacity} available")]
    Infeasible { requested: usize, capacity: usize },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("critical value not bracketed: both ends of [{lo}, {hi}] give the same outcome")]
    Unbracketed { lo: f64, hi: f64 },
}

impl ModelError {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
