// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use electrodiffusion::exact::{ReservoirMode, ReservoirProfile, Side};
use electrodiffusion::verify::{reservoir_identities, ReservoirDefects};
use serde::{Deserialize, Serialize};

use crate::config::{self, layered};
use crate::output::{artifact_paths, num, Document, Run};
use crate::Outcome;

pub const SCHEMA: &str = "electrodiffusion.reservoir.v1";

pub const HEADER: [&str; 5] = ["x", "c_plus", "c_minus", "E", "phi"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Linearized,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirOptions {
    /// Which reservoir: left (x <= 0) or right (x >= 1) [default: left]
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    /// Exact Poisson-Boltzmann profile or its linearization [default: exact]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Far-field concentration [default: 1/3]
    #[arg(long)]
    pub cinf: Option<f64>,
    /// Debye parameter of the slab [default: 0.7]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Profile amplitude; the potential at the face in linearized mode [default: 0.2]
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    /// Interface c+ (use with --c-minus-face instead of --amplitude)
    #[arg(long)]
    pub c_plus_face: Option<f64>,
    /// Interface c-
    #[arg(long)]
    pub c_minus_face: Option<f64>,
    /// Sampled depth in Debye lengths [default: 10]
    #[arg(long)]
    pub extent: Option<f64>,
    /// Sample count [default: 201]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output prefix; writes <out>.json and <out>.csv [default: reservoir]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

layered!(ReservoirOptions { side, mode, cinf, lambda, amplitude, c_plus_face, c_minus_face, extent, samples, out });

#[derive(Debug, Args)]
pub struct ReservoirArgs {
    #[command(flatten)]
    pub opts: ReservoirOptions,
    /// TOML file with defaults for any of the options above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReservoirConfig {
    pub profile: ReservoirProfile,
    pub extent: f64,
    pub samples: usize,
    pub out: PathBuf,
}

impl ReservoirOptions {
    pub fn resolve(self) -> Result<ReservoirConfig> {
        let side = match self.side.unwrap_or(SideArg::Left) {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        };
        let mode = self.mode.unwrap_or(ModeArg::Exact);
        let (c, lambda) = (self.cinf.unwrap_or(1.0 / 3.0), self.lambda.unwrap_or(0.7));
        let profile = match (self.c_plus_face, self.c_minus_face, self.amplitude) {
            (Some(cp), Some(cm), None) => match mode {
                ModeArg::Exact => ReservoirProfile::exact_from_interface(side, cp, cm, c, lambda)?,
                ModeArg::Linearized => ReservoirProfile::linearized_from_interface(side, cp, cm, c, lambda)?,
            },
            (None, None, amp) => {
                let amp = amp.unwrap_or(0.2);
                match mode {
                    ModeArg::Exact => ReservoirProfile::exact(side, c, amp, lambda)?,
                    ModeArg::Linearized => ReservoirProfile::linearized(side, c, amp, lambda)?,
                }
            }
            _ => bail!("give either --amplitude or both --c-plus-face and --c-minus-face"),
        };
        let extent = self.extent.unwrap_or(10.0);
        let samples = self.samples.unwrap_or(201);
        if extent.is_nan() || extent <= 0.0 || samples < 2 {
            bail!("--extent must be positive and --samples at least 2");
        }
        Ok(ReservoirConfig { profile, extent, samples, out: self.out.unwrap_or_else(|| "reservoir".into()) })
    }
}

#[derive(Serialize)]
struct ReservoirResult {
    lambda0: f64,
    small_amplitude: bool,
    /// Interface identities, exact mode only.
    identities: Option<ReservoirDefects>,
}

pub fn run(args: ReservoirArgs) -> Result<Outcome> {
    let mut run = Run::start(args.config.as_deref());
    let cfg = config::load(args.opts, args.config.as_deref())?.resolve()?;
    let r = &cfg.profile;
    let face = r.interface();
    let depth = cfg.extent * r.lambda0;
    let outward = if r.side == Side::Left { -1.0 } else { 1.0 };
    let mut rows = Vec::with_capacity(cfg.samples);
    for k in 0..cfg.samples {
        // Ordered by increasing x on both sides.
        let t = k as f64 / (cfg.samples - 1) as f64;
        let x = if r.side == Side::Left { face - depth * (1.0 - t) } else { face + outward * depth * t };
        let p = r.eval(x)?;
        rows.push(vec![num(x), num(p.c_plus), num(p.c_minus), num(p.e), num(p.phi)]);
    }
    let (json, csv) = artifact_paths(&cfg.out);
    run.csv(&csv, &HEADER, rows)?;
    let identities = match r.mode {
        ReservoirMode::Exact => Some(reservoir_identities(r)?),
        ReservoirMode::Linearized => None,
    };
    let result = ReservoirResult { lambda0: r.lambda0, small_amplitude: r.is_small_amplitude(), identities };
    run.json(&json, &Document { schema: SCHEMA, config: &cfg, result: &result })?;
    run.finish(&json)?;
    Ok(Outcome::Success)
}
