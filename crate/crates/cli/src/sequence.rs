// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use electrodiffusion::exact::{planck_seed, PlanckSeedParams};
use electrodiffusion::model::closed_grid;
use electrodiffusion::transforms::{backlund_power, generate_sequence, SequenceReport};
use electrodiffusion::{ModelParams, SolutionState};
use serde::{Deserialize, Serialize};

use crate::config::{self, layered};
use crate::output::{artifact_paths, file_name, num, with_suffix, Document, Run};
use crate::solve::{SolveResult, PROFILE_HEADER};
use crate::Outcome;

pub const SCHEMA: &str = "electrodiffusion.sequence.v1";

pub const LADDER_HEADER: [&str; 7] = ["n", "A_plus", "A_minus", "j", "min_cplus", "min_cminus", "positive"];

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceOptions {
    /// `planck`, or the JSON document written by `solve` [default: planck]
    #[arg(long)]
    pub seed: Option<String>,
    /// Planck seed concentration at x = 0 [default: 1/3]
    #[arg(long)]
    pub c0: Option<f64>,
    /// Planck seed slope A [default: 1/3]
    #[arg(long = "A", id = "A")]
    #[serde(rename = "A")]
    pub a: Option<f64>,
    /// Planck seed lambda^2 [default: 0.01]
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Planck seed cation diffusivity fraction [default: 0.5]
    #[arg(long)]
    pub alpha_plus: Option<f64>,
    /// Lowest Bäcklund index [default: -8]
    #[arg(long, allow_hyphen_values = true)]
    pub n_min: Option<i64>,
    /// Highest Bäcklund index [default: 8]
    #[arg(long, allow_hyphen_values = true)]
    pub n_max: Option<i64>,
    /// Positivity scan points on [0, 1] [default: 1001]
    #[arg(long)]
    pub scan: Option<usize>,
    /// Also write one profile CSV per member
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub profiles: Option<bool>,
    /// Points per profile CSV [default: 201]
    #[arg(long)]
    pub profile_points: Option<usize>,
    /// Output prefix; writes <out>.json and <out>.csv [default: sequence]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

layered!(SequenceOptions { seed, c0, a, lambda2, alpha_plus, n_min, n_max, scan, profiles, profile_points, out });

#[derive(Debug, Args)]
pub struct SequenceArgs {
    #[command(flatten)]
    pub opts: SequenceOptions,
    /// TOML file with defaults for any of the options above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedConfig {
    Planck { c0: f64, a: f64, lambda2: f64, params: ModelParams },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceConfig {
    pub seed: SeedConfig,
    pub n_min: i64,
    pub n_max: i64,
    pub scan: usize,
    pub profile_points: Option<usize>,
    pub out: PathBuf,
}

impl SequenceOptions {
    pub fn resolve(self) -> Result<SequenceConfig> {
        let seed = match self.seed.as_deref().unwrap_or("planck") {
            "planck" => {
                let lambda2 = self.lambda2.unwrap_or(0.01);
                let params = ModelParams::from_lambda_squared(lambda2, self.alpha_plus.unwrap_or(0.5))?;
                let (c0, a) = (self.c0.unwrap_or(1.0 / 3.0), self.a.unwrap_or(1.0 / 3.0));
                PlanckSeedParams { c0, a }.validate()?;
                SeedConfig::Planck { c0, a, lambda2, params }
            }
            path => {
                if self.c0.is_some() || self.a.is_some() || self.lambda2.is_some() || self.alpha_plus.is_some() {
                    bail!("--c0, --A, --lambda2 and --alpha-plus describe the Planck seed; a file seed carries its own");
                }
                SeedConfig::File { path: path.into() }
            }
        };
        let (n_min, n_max) = (self.n_min.unwrap_or(-8), self.n_max.unwrap_or(8));
        if n_min > 0 || n_max < 0 {
            bail!("the index range [{n_min}, {n_max}] must contain 0");
        }
        let scan = self.scan.unwrap_or(1001);
        if scan < 2 {
            bail!("--scan needs at least 2 points");
        }
        let profile_points = match self.profiles.unwrap_or(false) {
            true => Some(self.profile_points.unwrap_or(201).max(2)),
            false => None,
        };
        Ok(SequenceConfig { seed, n_min, n_max, scan, profile_points, out: self.out.unwrap_or_else(|| "sequence".into()) })
    }
}

#[derive(Deserialize)]
struct SolveDocument {
    schema: String,
    result: SolveResult,
}

fn load_seed(seed: &SeedConfig) -> Result<SolutionState> {
    match seed {
        SeedConfig::Planck { c0, a, params, .. } => Ok(planck_seed(PlanckSeedParams { c0: *c0, a: *a }, *params)?),
        SeedConfig::File { path } => {
            let text = fs::read_to_string(path).with_context(|| format!("reading seed {}", path.display()))?;
            let doc: SolveDocument =
                serde_json::from_str(&text).with_context(|| format!("parsing seed {}", path.display()))?;
            if doc.schema != crate::solve::SCHEMA {
                bail!("seed file has schema '{}', expected '{}'", doc.schema, crate::solve::SCHEMA);
            }
            if !doc.result.converged {
                bail!("seed file holds a non-converged solution");
            }
            Ok(doc.result.to_mesh()?.to_state())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SequenceResult<'a> {
    pub seed_a_plus: f64,
    pub seed_a_minus: f64,
    pub params: ModelParams,
    /// Largest `N` with every member `|n| ≤ N` positive.
    pub positive_radius: Option<i64>,
    pub positive_count: usize,
    pub report: &'a SequenceReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub profile_files: Vec<String>,
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn run(args: SequenceArgs) -> Result<Outcome> {
    let mut run = Run::start(args.config.as_deref());
    let cfg = config::load(args.opts, args.config.as_deref())?.resolve()?;
    let seed = load_seed(&cfg.seed)?;
    let report = generate_sequence(&seed, cfg.n_min, cfg.n_max, cfg.scan)?;
    let (json, csv) = artifact_paths(&cfg.out);
    let rows = report.entries.iter().map(|e| {
        vec![
            e.n.to_string(),
            num(e.a_plus),
            num(e.a_minus),
            num(e.j),
            opt(e.min_c_plus),
            opt(e.min_c_minus),
            e.positive.to_string(),
        ]
    });
    run.csv(&csv, &LADDER_HEADER, rows)?;
    let mut profile_files = Vec::new();
    if let Some(points) = cfg.profile_points {
        for n in cfg.n_min..=cfg.n_max {
            let path = with_suffix(&csv, &format!("_n{n}"));
            let rows = match backlund_power(&seed, n) {
                Ok(member) => closed_grid(points)
                    .into_iter()
                    .filter_map(|x| member.eval(x).ok().map(|f| vec![num(x), num(f.c_plus), num(f.c_minus), num(f.e)]))
                    .collect(),
                Err(e) => {
                    eprintln!("warning: member {n} could not be constructed: {e}");
                    Vec::new()
                }
            };
            run.csv(&path, &PROFILE_HEADER, rows)?;
            profile_files.push(file_name(&path));
        }
    }
    let result = SequenceResult {
        seed_a_plus: seed.a_plus(),
        seed_a_minus: seed.a_minus(),
        params: *seed.params(),
        positive_radius: report.positive_radius(),
        positive_count: report.entries.iter().filter(|e| e.positive).count(),
        report: &report,
        profile_files,
    };
    run.json(&json, &Document { schema: SCHEMA, config: &cfg, result: &result })?;
    run.finish(&json)?;
    Ok(Outcome::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planck_defaults() {
        let cfg = SequenceOptions::default().resolve().unwrap();
        assert_eq!((cfg.n_min, cfg.n_max, cfg.scan), (-8, 8, 1001));
        assert!(matches!(cfg.seed, SeedConfig::Planck { lambda2, .. } if lambda2 == 0.01));
    }

    #[test]
    fn range_must_contain_zero() {
        let o = SequenceOptions { n_min: Some(1), n_max: Some(3), ..Default::default() };
        assert!(o.resolve().is_err());
    }

    #[test]
    fn file_seed_rejects_planck_flags() {
        let o = SequenceOptions { seed: Some("x.json".into()), c0: Some(0.2), ..Default::default() };
        assert!(o.resolve().is_err());
    }

    #[test]
    fn config_key_for_slope_is_capital_a() {
        let o: SequenceOptions = toml::from_str("A = 0.25\nn_min = -2").unwrap();
        assert_eq!((o.a, o.n_min), (Some(0.25), Some(-2)));
    }
}
