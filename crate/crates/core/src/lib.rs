// SPDX-License-Identifier: Apache-2.0

//! Steady one-dimensional two-ion electrodiffusion across a liquid junction.
//!
//! The dimensionless slab system on `0 < x < 1` is
//!
//! ```text
//! c₊′ =  E c₊ + A₊
//! c₋′ = −E c₋ + A₋
//! λ² E′ = c₊ − c₋
//! ```
//!
//! with constant flux parameters `A±`. The field `E` satisfies a scaled
//! Painlevé II equation, and the solution set carries a discrete group of
//! transformations (conjugation, reflection, Bäcklund and Gambier maps).
//!
//! Modules:
//!
//! * [`model`]: parameters, solution states and residual operators.
//! * [`transforms`]: the solution group and flux-quantization ladders.
//! * [`exact`]: closed-form seeds and reservoir profiles.
//! * [`airy`]: real Airy functions used by the Airy seed.
//! * [`bvp`]: collocation solver for the three boundary-condition families.
//! * [`analysis`]: positivity scans and sign checks.
//! * [`verify`]: property suites exposed to the command line.

// `!(a > b)` comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod analysis;
pub mod bvp;
mod error;
pub mod exact;
pub mod model;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use model::{FieldValues, ModelParams, Provenance, SolutionState};
