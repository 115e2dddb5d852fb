// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the model, transform and exact-solution layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A field evaluation hit a pole or a vanishing denominator.
    #[error("singular evaluation at x = {x}")]
    SingularEvaluation { x: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    /// A transform precondition on the flux constants failed.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    /// The inverse Gambier map needs a field that is not identically zero.
    #[error("field E vanishes identically; use the Airy seed constructor instead")]
    IdenticallyZeroField,
    #[error("the Airy combination F vanishes on [0, 1] near x = {x}")]
    PoleOnInterval { x: f64 },
    #[error("inconsistent data: {0}")]
    Consistency(String),
    #[error("argument {s} outside the supported range |s| <= {limit}")]
    Range { s: f64, limit: f64 },
    #[error("no regular grid point could be evaluated")]
    AllSingular,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("transform chain depth {depth} exceeds the cap {cap}")]
    DepthExceeded { depth: usize, cap: usize },
}
