// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use electrodiffusion::bvp::{
    assemble_full_domain, solve, BoundarySpec, Diagnostics, MeshSolution, Monotonicity, ProfilePoint, SolveError,
    SolverConfig,
};
use electrodiffusion::exact::{debye_length, ReservoirProfile};
use electrodiffusion::model::{current_density, invariants_of, InvariantPair};
use electrodiffusion::ModelParams;
use serde::{Deserialize, Serialize};

use crate::config::{self, layered};
use crate::output::{artifact_paths, file_name, num, with_suffix, Document, Run};
use crate::Outcome;

pub const SCHEMA: &str = "electrodiffusion.solve.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Neutral,
    Radiation,
    Exact,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    /// Boundary-condition family [default: neutral]
    #[arg(long, value_enum)]
    pub bc: Option<Bc>,
    /// Concentration at x = 0 (neutral) [default: 1/3]
    #[arg(long)]
    pub c0: Option<f64>,
    /// Concentration at x = 1 (neutral) [default: 2/3]
    #[arg(long)]
    pub c1: Option<f64>,
    /// Left reservoir concentration (radiation, exact) [default: 1/3]
    #[arg(long)]
    pub cinf_left: Option<f64>,
    /// Right reservoir concentration (radiation, exact) [default: 2/3]
    #[arg(long)]
    pub cinf_right: Option<f64>,
    /// Debye parameter [default: 0.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Cation diffusivity fraction, alpha- = 1 - alpha+ [default: 0.5]
    #[arg(long)]
    pub alpha_plus: Option<f64>,
    /// Prescribed current density [default: 0]
    #[arg(long)]
    pub j0: Option<f64>,
    /// Mesh intervals [default: 400]
    #[arg(long)]
    pub mesh: Option<usize>,
    /// Newton residual tolerance [default: 1e-10]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Newton iterations per stage [default: 50]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Fall back to continuation in lambda [default: true]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub continuation: Option<bool>,
    /// Also write the reservoir profiles on both sides
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub full_domain: Option<bool>,
    /// Left end of the full-domain plot [default: -10 Debye lengths]
    #[arg(long, allow_hyphen_values = true)]
    pub x_left: Option<f64>,
    /// Right end of the full-domain plot [default: 1 + 10 Debye lengths]
    #[arg(long)]
    pub x_right: Option<f64>,
    /// Samples per reservoir [default: 201]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output prefix; writes <out>.json and <out>.csv [default: solution]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

layered!(SolveOptions {
    bc, c0, c1, cinf_left, cinf_right, lambda, alpha_plus, j0, mesh, tol, max_iter, continuation, full_domain,
    x_left, x_right, samples, out
});

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub opts: SolveOptions,
    /// TOML file with defaults for any of the options above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullDomainRange {
    pub x_left: f64,
    pub x_right: f64,
    pub samples: usize,
}

/// Effective configuration echoed into the output document.
#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    pub bc: Bc,
    pub spec: BoundarySpec,
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub full_domain: Option<FullDomainRange>,
    pub out: PathBuf,
}

impl SolveOptions {
    pub fn resolve(self) -> Result<SolveConfig> {
        let bc = self.bc.unwrap_or(Bc::Neutral);
        let j0 = self.j0.unwrap_or(0.0);
        let spec = match bc {
            Bc::Neutral => {
                if self.cinf_left.is_some() || self.cinf_right.is_some() {
                    bail!("--cinf-left/--cinf-right apply to the reservoir families, use --c0/--c1 with --bc neutral");
                }
                BoundarySpec::ChargeNeutral { c0: self.c0.unwrap_or(1.0 / 3.0), c1: self.c1.unwrap_or(2.0 / 3.0), j0 }
            }
            Bc::Radiation | Bc::Exact => {
                if self.c0.is_some() || self.c1.is_some() {
                    bail!("--c0/--c1 apply to --bc neutral, use --cinf-left/--cinf-right for reservoir families");
                }
                let (c_minus_inf, c_plus_inf) = (self.cinf_left.unwrap_or(1.0 / 3.0), self.cinf_right.unwrap_or(2.0 / 3.0));
                if bc == Bc::Radiation {
                    BoundarySpec::Radiation { c_minus_inf, c_plus_inf, j0 }
                } else {
                    BoundarySpec::ExactReservoir { c_minus_inf, c_plus_inf, j0 }
                }
            }
        };
        let normalized = spec.validate()?;
        if !normalized {
            eprintln!("warning: c0 + c1 != 1, the data is not normalized");
        }
        let params = ModelParams::with_alpha_plus(self.lambda.unwrap_or(0.5), self.alpha_plus.unwrap_or(0.5))?;
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            mesh_size: self.mesh.unwrap_or(defaults.mesh_size),
            tol: self.tol.unwrap_or(defaults.tol),
            max_iter: self.max_iter.unwrap_or(defaults.max_iter),
            continuation: self.continuation.unwrap_or(defaults.continuation),
            ..defaults
        };
        solver.validate()?;
        let full_domain = if self.full_domain.unwrap_or(false) {
            let (l, r) = spec.face_concentrations();
            if bc == Bc::Neutral {
                bail!("--full-domain needs --bc radiation or --bc exact");
            }
            let range = FullDomainRange {
                x_left: self.x_left.unwrap_or(-10.0 * debye_length(params.lambda, l)),
                x_right: self.x_right.unwrap_or(1.0 + 10.0 * debye_length(params.lambda, r)),
                samples: self.samples.unwrap_or(201),
            };
            if !(range.x_left < 0.0 && range.x_right > 1.0 && range.samples >= 2) {
                bail!("full-domain range needs x-left < 0, x-right > 1 and at least 2 samples");
            }
            Some(range)
        } else {
            None
        };
        Ok(SolveConfig { bc, spec, params, solver, full_domain, out: self.out.unwrap_or_else(|| "solution".into()) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshArrays {
    pub x: Vec<f64>,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub e: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullDomainSummary {
    pub range: FullDomainRange,
    /// Largest field jump at `x = 0` and `x = 1`.
    pub jumps: [f64; 2],
    pub left_reservoir: ReservoirProfile,
    pub right_reservoir: ReservoirProfile,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub converged: bool,
    pub spec: BoundarySpec,
    pub params: ModelParams,
    pub a_plus: f64,
    pub a_minus: f64,
    pub j: f64,
    /// `None` when the first integral could not be evaluated.
    pub invariants: Option<InvariantPair>,
    pub field_monotonicity: Monotonicity,
    pub min_c_plus: f64,
    pub min_c_minus: f64,
    pub diagnostics: Option<Diagnostics>,
    pub mesh: MeshArrays,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_domain: Option<FullDomainSummary>,
}

impl SolveResult {
    pub fn new(m: &MeshSolution, spec: BoundarySpec, converged: bool) -> Self {
        let s = m.to_state();
        let (min_c_plus, min_c_minus) = m.min_concentrations();
        Self {
            converged,
            spec,
            params: *m.params(),
            a_plus: m.a_plus(),
            a_minus: m.a_minus(),
            j: current_density(&s),
            invariants: invariants_of(&s).ok(),
            field_monotonicity: m.field_monotonicity(),
            min_c_plus,
            min_c_minus,
            diagnostics: m.diagnostics().cloned(),
            mesh: MeshArrays {
                x: m.mesh().to_vec(),
                c_plus: m.c_plus().to_vec(),
                c_minus: m.c_minus().to_vec(),
                e: m.e().to_vec(),
            },
            full_domain: None,
        }
    }

    pub fn to_mesh(&self) -> electrodiffusion::Result<MeshSolution> {
        MeshSolution::from_nodes(
            self.mesh.x.clone(),
            self.mesh.c_plus.clone(),
            self.mesh.c_minus.clone(),
            self.mesh.e.clone(),
            self.a_plus,
            self.a_minus,
            self.params,
            Some(self.spec),
        )
    }
}

pub const PROFILE_HEADER: [&str; 4] = ["x", "c_plus", "c_minus", "E"];

fn profile_rows(points: &[ProfilePoint]) -> Vec<Vec<String>> {
    points.iter().map(|p| vec![num(p.x), num(p.c_plus), num(p.c_minus), num(p.e)]).collect()
}

pub fn run(args: SolveArgs) -> Result<Outcome> {
    let mut run = Run::start(args.config.as_deref());
    let cfg = config::load(args.opts, args.config.as_deref())?.resolve()?;
    let (mesh, converged) = match solve(&cfg.spec, &cfg.params, &cfg.solver) {
        Ok(m) => (m, true),
        Err(SolveError::NonConvergence { diagnostics, last }) => {
            eprintln!(
                "error: Newton iteration did not converge: residual {:.3e} after {} iterations; writing the last iterate",
                diagnostics.residual_norm, diagnostics.iterations
            );
            (*last, false)
        }
        Err(e @ SolveError::SingularJacobian { .. }) => {
            eprintln!("error: {e}");
            return Ok(Outcome::NonConvergence);
        }
        Err(SolveError::InvalidSpec(e)) => return Err(e.into()),
    };
    let mut result = SolveResult::new(&mesh, cfg.spec, converged);
    let (json, csv) = artifact_paths(&cfg.out);
    write_slab(&mut run, &csv, &mesh)?;
    if let (Some(range), true) = (cfg.full_domain, converged) {
        result.full_domain = Some(write_full_domain(&mut run, &cfg.out, &mesh, range)?);
    }
    if let Some(d) = &result.diagnostics {
        if d.negative_concentration {
            eprintln!("warning: the solution has a negative concentration at some node");
        }
    }
    run.json(&json, &Document { schema: SCHEMA, config: &cfg, result: &result })?;
    run.finish(&json)?;
    Ok(if converged { Outcome::Success } else { Outcome::NonConvergence })
}

fn write_slab(run: &mut Run, path: &Path, m: &MeshSolution) -> Result<()> {
    let rows = (0..m.mesh().len()).map(|k| {
        let f = m.node(k);
        vec![num(m.mesh()[k]), num(f.c_plus), num(f.c_minus), num(f.e)]
    });
    run.csv(path, &PROFILE_HEADER, rows)
}

fn write_full_domain(run: &mut Run, out: &Path, m: &MeshSolution, range: FullDomainRange) -> Result<FullDomainSummary> {
    let full = assemble_full_domain(m, range.x_left, range.x_right, range.samples)?;
    let csv = out.with_extension("csv");
    let mut files = Vec::new();
    for (suffix, points) in [("_left", &full.left), ("_slab", &full.slab), ("_right", &full.right)] {
        let path = with_suffix(&csv, suffix);
        run.csv(&path, &PROFILE_HEADER, profile_rows(points))?;
        files.push(file_name(&path));
    }
    Ok(FullDomainSummary {
        range,
        jumps: full.jumps,
        left_reservoir: full.left_reservoir,
        right_reservoir: full.right_reservoir,
        files,
    })
}
