// SPDX-License-Identifier: Apache-2.0

//! Optional TOML config files. Keys are the long flag names with `-`
//! replaced by `_`; a flag given on the command line wins over the file.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

/// Options that can come from both flags and a config file.
pub trait Layered: Sized + Default + DeserializeOwned {
    /// Fills every unset field of `self` from `lower`.
    fn over(self, lower: Self) -> Self;
}

pub fn load<T: Layered>(flags: T, path: Option<&Path>) -> Result<T> {
    let Some(path) = path else { return Ok(flags) };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let file: T = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    Ok(flags.over(file))
}

/// Implements [`Layered`] by taking each listed field from the upper layer
/// when it is set.
macro_rules! layered {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl $crate::config::Layered for $ty {
            fn over(self, lower: Self) -> Self {
                Self { $($field: self.$field.or(lower.$field)),* }
            }
        }
    };
}
pub(crate) use layered;
