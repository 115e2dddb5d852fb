// SPDX-License-Identifier: Apache-2.0

//! Two-point boundary-value solver for the slab.
//!
//! The unknown flux constants are carried as two extra components with
//! `A±′ = 0`, giving the autonomous five-component system
//! `y = (c₊, c₋, E, A₊, A₋)`, `y′ = f(y)`. It is discretized by
//! Hermite–Simpson (three-stage Lobatto IIIA) collocation on a uniform
//! mesh and solved by damped Newton iteration with a banded Jacobian.

mod banded;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

pub use banded::{BandLu, BandMatrix, ZeroPivot};

use crate::exact::{debye_length, exact_endpoint_with_slope, ReservoirProfile, Side};
use crate::model::{pressure_of, FieldEvaluator, FieldValues, ModelParams, Provenance, SolutionState};
use crate::{Error, Result};

/// Number of components of the extended system.
pub const COMPONENTS: usize = 5;

/// Tolerance on `c₋∞ + c₊∞ = 1` (and on the optional `c₀ + c₁ = 1`).
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Continuity tolerance used when stitching reservoirs to a slab.
pub const INTERFACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BoundarySpec {
    /// `c₊ = c₋ = c₀` at `x = 0`, `c₊ = c₋ = c₁` at `x = 1`, `j = j₀`.
    ChargeNeutral { c0: f64, c1: f64, j0: f64 },
    /// Linearized reservoir matching at both faces, `j = j₀`.
    Radiation { c_minus_inf: f64, c_plus_inf: f64, j0: f64 },
    /// Exact Poisson–Boltzmann reservoir matching at both faces, `j = j₀`.
    ExactReservoir { c_minus_inf: f64, c_plus_inf: f64, j0: f64 },
}

impl BoundarySpec {
    /// Checks the data. Returns whether charge-neutral data is normalized
    /// to `c₀ + c₁ = 1` (always `true` for the reservoir families, where
    /// normalization is required).
    pub fn validate(&self) -> Result<bool> {
        match *self {
            BoundarySpec::ChargeNeutral { c0, c1, j0 } => {
                if !(c0 > 0.0 && c0 <= c1 && c1.is_finite() && j0.is_finite()) {
                    return Err(Error::Domain(format!("charge-neutral data needs 0 < c0 <= c1, got c0 = {c0}, c1 = {c1}")));
                }
                Ok((c0 + c1 - 1.0).abs() <= NORMALIZATION_TOL)
            }
            BoundarySpec::Radiation { c_minus_inf: l, c_plus_inf: r, j0 }
            | BoundarySpec::ExactReservoir { c_minus_inf: l, c_plus_inf: r, j0 } => {
                if !(l > 0.0 && l <= r && r.is_finite() && j0.is_finite()) {
                    return Err(Error::Domain(format!(
                        "reservoir data needs 0 < c_-inf <= c_+inf, got {l} and {r}"
                    )));
                }
                if (l + r - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::Domain(format!("reservoir concentrations must sum to 1, got {}", l + r)));
                }
                Ok(true)
            }
        }
    }

    /// Face concentrations used for the initial guess.
    pub fn face_concentrations(&self) -> (f64, f64) {
        match *self {
            BoundarySpec::ChargeNeutral { c0, c1, .. } => (c0, c1),
            BoundarySpec::Radiation { c_minus_inf, c_plus_inf, .. }
            | BoundarySpec::ExactReservoir { c_minus_inf, c_plus_inf, .. } => (c_minus_inf, c_plus_inf),
        }
    }

    pub fn j0(&self) -> f64 {
        match *self {
            BoundarySpec::ChargeNeutral { j0, .. }
            | BoundarySpec::Radiation { j0, .. }
            | BoundarySpec::ExactReservoir { j0, .. } => j0,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            BoundarySpec::ChargeNeutral { .. } => "charge_neutral",
            BoundarySpec::Radiation { .. } => "radiation",
            BoundarySpec::ExactReservoir { .. } => "exact_reservoir",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of mesh intervals.
    pub mesh_size: usize,
    /// Max-norm tolerance on the collocation and boundary residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed per Newton step in the line search.
    pub max_halvings: usize,
    /// Fall back to continuation in `λ` when the direct solve fails.
    pub continuation: bool,
    pub continuation_steps: usize,
    /// Continuation starts at this multiple of the target `λ`.
    pub continuation_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mesh_size: 400,
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 8,
            continuation: true,
            continuation_steps: 8,
            continuation_factor: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mesh_size < 16 {
            return Err(Error::Domain(format!("mesh size must be at least 16, got {}", self.mesh_size)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Domain("tolerance and iteration limit must be positive".into()));
        }
        if self.continuation && !(self.continuation_factor > 1.0 && self.continuation_steps > 0) {
            return Err(Error::Domain("continuation needs a factor > 1 and at least one step".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub converged: bool,
    /// Newton iterations, summed over continuation stages.
    pub iterations: usize,
    pub residual_norm: f64,
    /// `λ` stages used; 0 for a direct solve.
    pub continuation_stages: usize,
    pub initial_guess: String,
    /// Some node has a negative concentration.
    pub negative_concentration: bool,
    pub mesh_size: usize,
}

#[derive(Debug, Clone, ThisError)]
pub enum SolveError {
    #[error("Newton iteration did not converge (residual {:.3e} after {} iterations)", .diagnostics.residual_norm, .diagnostics.iterations)]
    NonConvergence { diagnostics: Diagnostics, last: Box<MeshSolution> },
    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("invalid problem: {0}")]
    InvalidSpec(#[from] Error),
}

/// A slab solution stored on a mesh, interpolated by piecewise cubic
/// Hermite polynomials whose node slopes are the ODE right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSolution {
    mesh: Vec<f64>,
    c_plus: Vec<f64>,
    c_minus: Vec<f64>,
    e: Vec<f64>,
    a_plus: f64,
    a_minus: f64,
    params: ModelParams,
    spec: Option<BoundarySpec>,
    diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    StrictlyIncreasing,
    StrictlyDecreasing,
    NonMonotone,
}

impl MeshSolution {
    /// Wraps node data from any source. The mesh must start at 0, end at 1
    /// and increase strictly.
    #[allow(clippy::too_many_arguments)]
    pub fn from_nodes(
        mesh: Vec<f64>,
        c_plus: Vec<f64>,
        c_minus: Vec<f64>,
        e: Vec<f64>,
        a_plus: f64,
        a_minus: f64,
        params: ModelParams,
        spec: Option<BoundarySpec>,
    ) -> Result<Self> {
        let n = mesh.len();
        if n < 2 || c_plus.len() != n || c_minus.len() != n || e.len() != n {
            return Err(Error::Domain("mesh and node arrays must have equal length >= 2".into()));
        }
        if mesh[0] != 0.0 || mesh[n - 1] != 1.0 || mesh.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("mesh must increase strictly from 0 to 1".into()));
        }
        Ok(Self { mesh, c_plus, c_minus, e, a_plus, a_minus, params, spec, diagnostics: None })
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }
    pub fn c_plus(&self) -> &[f64] {
        &self.c_plus
    }
    pub fn c_minus(&self) -> &[f64] {
        &self.c_minus
    }
    pub fn e(&self) -> &[f64] {
        &self.e
    }
    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }
    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }
    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn spec(&self) -> Option<&BoundarySpec> {
        self.spec.as_ref()
    }
    pub fn diagnostics(&self) -> Option<&Diagnostics> {
        self.diagnostics.as_ref()
    }

    pub fn node(&self, k: usize) -> FieldValues {
        FieldValues::new(self.c_plus[k], self.c_minus[k], self.e[k])
    }

    fn slope(&self, k: usize) -> [f64; 3] {
        let y = [self.c_plus[k], self.c_minus[k], self.e[k], self.a_plus, self.a_minus];
        let f = rhs(&y, 1.0 / self.params.lambda2());
        [f[0], f[1], f[2]]
    }

    pub fn to_state(&self) -> SolutionState {
        SolutionState::new(Arc::new(self.clone()), self.a_plus, self.a_minus, self.params, Provenance::Mesh)
    }

    /// Monotonicity of `E` over the nodes.
    pub fn field_monotonicity(&self) -> Monotonicity {
        let w = self.e.windows(2);
        if w.clone().all(|p| p[1] > p[0]) {
            Monotonicity::StrictlyIncreasing
        } else if w.into_iter().all(|p| p[1] < p[0]) {
            Monotonicity::StrictlyDecreasing
        } else {
            Monotonicity::NonMonotone
        }
    }

    pub fn min_concentrations(&self) -> (f64, f64) {
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        (min(&self.c_plus), min(&self.c_minus))
    }

    /// `P − θx` at every node.
    pub fn first_integral(&self) -> Vec<f64> {
        let theta = self.a_plus + self.a_minus;
        let l2 = self.params.lambda2();
        (0..self.mesh.len()).map(|k| pressure_of(&self.node(k), l2) - theta * self.mesh[k]).collect()
    }
}

impl FieldEvaluator for MeshSolution {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} is outside the slab")));
        }
        let n = self.mesh.len();
        let k = self.mesh.partition_point(|&m| m <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.mesh[k], self.mesh[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let (s0, s1) = (self.slope(k), self.slope(k + 1));
        let cubic = |v: &[f64], i: usize| h00 * v[k] + h10 * h * s0[i] + h01 * v[k + 1] + h11 * h * s1[i];
        Ok(FieldValues::new(cubic(&self.c_plus, 0), cubic(&self.c_minus, 1), cubic(&self.e, 2)))
    }
}

/// `f(y)` of the extended system, with `inv_l2 = 1/λ²`.
fn rhs(y: &[f64], inv_l2: f64) -> [f64; COMPONENTS] {
    [y[2] * y[0] + y[3], -y[2] * y[1] + y[4], (y[0] - y[1]) * inv_l2, 0.0, 0.0]
}

type Block = [[f64; COMPONENTS]; COMPONENTS];

fn rhs_jacobian(y: &[f64], inv_l2: f64) -> Block {
    let mut j = [[0.0; COMPONENTS]; COMPONENTS];
    j[0] = [y[2], 0.0, y[0], 1.0, 0.0];
    j[1] = [0.0, -y[2], -y[1], 0.0, 1.0];
    j[2] = [inv_l2, -inv_l2, 0.0, 0.0, 0.0];
    j
}

fn mat_mul(a: &Block, b: &Block) -> Block {
    let mut c = [[0.0; COMPONENTS]; COMPONENTS];
    for i in 0..COMPONENTS {
        for k in 0..COMPONENTS {
            if a[i][k] != 0.0 {
                for j in 0..COMPONENTS {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

/// One boundary equation: residual and its gradient with respect to the
/// five unknowns at the face node.
type BoundaryRow = (f64, [f64; COMPONENTS]);

struct Problem {
    spec: BoundarySpec,
    params: ModelParams,
    n: usize,
    h: f64,
    inv_l2: f64,
}

impl Problem {
    fn new(spec: BoundarySpec, params: ModelParams, n: usize) -> Self {
        Self { spec, params, n, h: 1.0 / n as f64, inv_l2: 1.0 / params.lambda2() }
    }

    fn unknowns(&self) -> usize {
        COMPONENTS * (self.n + 1)
    }

    fn node<'a>(&self, y: &'a [f64], k: usize) -> &'a [f64] {
        &y[COMPONENTS * k..COMPONENTS * (k + 1)]
    }

    fn face_rows(&self, y: &[f64], side: Side) -> [BoundaryRow; 2] {
        let (k, cinf_index) = match side {
            Side::Left => (0, 0),
            Side::Right => (self.n, 1),
        };
        let v = self.node(y, k);
        let (cp, cm, e) = (v[0], v[1], v[2]);
        let lambda = self.params.lambda;
        match self.spec {
            BoundarySpec::ChargeNeutral { c0, c1, .. } => {
                let c = if side == Side::Left { c0 } else { c1 };
                [(cp - c, [1.0, 0.0, 0.0, 0.0, 0.0]), (cm - c, [0.0, 1.0, 0.0, 0.0, 0.0])]
            }
            BoundarySpec::Radiation { c_minus_inf, c_plus_inf, .. } => {
                let c = [c_minus_inf, c_plus_inf][cinf_index];
                let sign = if side == Side::Left { 1.0 } else { -1.0 };
                let g = sign * 2.0 * c * debye_length(lambda, c);
                [(cp + cm - 2.0 * c, [1.0, 1.0, 0.0, 0.0, 0.0]), (cp - cm - g * e, [1.0, -1.0, -g, 0.0, 0.0])]
            }
            BoundarySpec::ExactReservoir { c_minus_inf, c_plus_inf, .. } => {
                let c = [c_minus_inf, c_plus_inf][cinf_index];
                let (tp, tm, d_split) = exact_endpoint_with_slope(side, c, lambda, e);
                let d_even = 0.5 * lambda * lambda * e;
                [
                    (cp - tp, [1.0, 0.0, -(d_even + d_split), 0.0, 0.0]),
                    (cm - tm, [0.0, 1.0, -(d_even - d_split), 0.0, 0.0]),
                ]
            }
        }
    }

    fn current_row(&self, y: &[f64]) -> BoundaryRow {
        let v = self.node(y, 0);
        let p = &self.params;
        (p.alpha_minus * v[4] - p.alpha_plus * v[3] - self.spec.j0(), [0.0, 0.0, 0.0, -p.alpha_plus, p.alpha_minus])
    }

    fn residual(&self, y: &[f64]) -> Vec<f64> {
        let mut r = Vec::with_capacity(self.unknowns());
        let left = self.face_rows(y, Side::Left);
        r.extend([left[0].0, left[1].0, self.current_row(y).0]);
        for k in 0..self.n {
            r.extend(self.interval_residual(y, k));
        }
        let right = self.face_rows(y, Side::Right);
        r.extend([right[0].0, right[1].0]);
        r
    }

    fn midpoint(&self, y0: &[f64], y1: &[f64], f0: &[f64; 5], f1: &[f64; 5]) -> [f64; COMPONENTS] {
        let mut m = [0.0; COMPONENTS];
        for i in 0..COMPONENTS {
            m[i] = 0.5 * (y0[i] + y1[i]) - self.h / 8.0 * (f1[i] - f0[i]);
        }
        m
    }

    fn interval_residual(&self, y: &[f64], k: usize) -> [f64; COMPONENTS] {
        let (y0, y1) = (self.node(y, k), self.node(y, k + 1));
        let (f0, f1) = (rhs(y0, self.inv_l2), rhs(y1, self.inv_l2));
        let fm = rhs(&self.midpoint(y0, y1, &f0, &f1), self.inv_l2);
        let mut r = [0.0; COMPONENTS];
        for i in 0..COMPONENTS {
            r[i] = y1[i] - y0[i] - self.h / 6.0 * (f0[i] + 4.0 * fm[i] + f1[i]);
        }
        r
    }

    fn jacobian(&self, y: &[f64]) -> BandMatrix {
        let mut jac = BandMatrix::zeros(self.unknowns(), 7, 6);
        let left = self.face_rows(y, Side::Left);
        let current = self.current_row(y);
        for (row, (_, grad)) in [left[0], left[1], current].iter().enumerate() {
            for (col, g) in grad.iter().enumerate() {
                if *g != 0.0 {
                    jac.add(row, col, *g);
                }
            }
        }
        let h = self.h;
        for k in 0..self.n {
            let (y0, y1) = (self.node(y, k), self.node(y, k + 1));
            let (f0, f1) = (rhs(y0, self.inv_l2), rhs(y1, self.inv_l2));
            let ym = self.midpoint(y0, y1, &f0, &f1);
            let (j0, j1, jm) = (rhs_jacobian(y0, self.inv_l2), rhs_jacobian(y1, self.inv_l2), rhs_jacobian(&ym, self.inv_l2));
            let mut d0 = [[0.0; COMPONENTS]; COMPONENTS];
            let mut d1 = [[0.0; COMPONENTS]; COMPONENTS];
            for i in 0..COMPONENTS {
                for j in 0..COMPONENTS {
                    let id = if i == j { 1.0 } else { 0.0 };
                    d0[i][j] = 0.5 * id + h / 8.0 * j0[i][j];
                    d1[i][j] = 0.5 * id - h / 8.0 * j1[i][j];
                }
            }
            let (m0, m1) = (mat_mul(&jm, &d0), mat_mul(&jm, &d1));
            let row0 = 3 + COMPONENTS * k;
            for i in 0..COMPONENTS {
                for j in 0..COMPONENTS {
                    let id = if i == j { 1.0 } else { 0.0 };
                    let a = -id - h / 6.0 * (j0[i][j] + 4.0 * m0[i][j]);
                    let b = id - h / 6.0 * (j1[i][j] + 4.0 * m1[i][j]);
                    if a != 0.0 {
                        jac.add(row0 + i, COMPONENTS * k + j, a);
                    }
                    if b != 0.0 {
                        jac.add(row0 + i, COMPONENTS * (k + 1) + j, b);
                    }
                }
            }
        }
        let right = self.face_rows(y, Side::Right);
        let base = 3 + COMPONENTS * self.n;
        for (r, (_, grad)) in right.iter().enumerate() {
            for (col, g) in grad.iter().enumerate() {
                if *g != 0.0 {
                    jac.add(base + r, COMPONENTS * self.n + col, *g);
                }
            }
        }
        jac
    }

    fn initial_guess(&self) -> Vec<f64> {
        let (c0, c1) = self.spec.face_concentrations();
        let theta = 2.0 * (c1 - c0);
        let p = &self.params;
        let a_plus = p.alpha_minus * theta - self.spec.j0();
        let a_minus = p.alpha_plus * theta + self.spec.j0();
        let mut y = Vec::with_capacity(self.unknowns());
        for k in 0..=self.n {
            let x = k as f64 * self.h;
            let c = c0 + (c1 - c0) * x;
            y.extend([c, c, 0.5 * (a_minus - a_plus) / c, a_plus, a_minus]);
        }
        y
    }

    fn to_mesh(&self, y: &[f64], diagnostics: Diagnostics) -> MeshSolution {
        let n = self.n + 1;
        let pick = |i: usize| (0..n).map(|k| y[COMPONENTS * k + i]).collect::<Vec<_>>();
        MeshSolution {
            mesh: (0..n).map(|k| if k == self.n { 1.0 } else { k as f64 * self.h }).collect(),
            c_plus: pick(0),
            c_minus: pick(1),
            e: pick(2),
            a_plus: y[3],
            a_minus: y[4],
            params: self.params,
            spec: Some(self.spec),
            diagnostics: Some(diagnostics),
        }
    }

    fn unknowns_from(&self, m: &MeshSolution) -> Result<Vec<f64>> {
        let mut y = Vec::with_capacity(self.unknowns());
        for k in 0..=self.n {
            let x = if k == self.n { 1.0 } else { k as f64 * self.h };
            let f = m.eval(x)?;
            y.extend([f.c_plus, f.c_minus, f.e, m.a_plus, m.a_minus]);
        }
        Ok(y)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

#[derive(Debug)]
struct NewtonOutcome {
    y: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn newton(problem: &Problem, mut y: Vec<f64>, cfg: &SolverConfig) -> std::result::Result<NewtonOutcome, SolveError> {
    let mut r = problem.residual(&y);
    let mut norm = max_norm(&r);
    for iteration in 0..cfg.max_iter {
        if norm <= cfg.tol {
            return Ok(NewtonOutcome { y, iterations: iteration, residual: norm, converged: true });
        }
        let lu = problem.jacobian(&y).factor().map_err(|_| SolveError::SingularJacobian { iteration })?;
        let mut step: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve(&mut step);
        if step.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::SingularJacobian { iteration });
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = y.iter().zip(&step).map(|(a, d)| a + alpha * d).collect();
            let rt = problem.residual(&trial);
            let nt = max_norm(&rt);
            if nt.is_finite() && nt < norm {
                accepted = Some((trial, rt, nt));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, rt, nt)) => {
                y = trial;
                r = rt;
                norm = nt;
            }
            None => return Ok(NewtonOutcome { y, iterations: iteration + 1, residual: norm, converged: false }),
        }
    }
    let converged = norm <= cfg.tol;
    Ok(NewtonOutcome { y, iterations: cfg.max_iter, residual: norm, converged })
}

fn diagnostics(problem: &Problem, out: &NewtonOutcome, stages: usize, guess: &str, iterations: usize) -> Diagnostics {
    let negative = (0..=problem.n).any(|k| out.y[COMPONENTS * k] < 0.0 || out.y[COMPONENTS * k + 1] < 0.0);
    Diagnostics {
        converged: out.converged,
        iterations,
        residual_norm: out.residual,
        continuation_stages: stages,
        initial_guess: guess.to_string(),
        negative_concentration: negative,
        mesh_size: problem.n,
    }
}

const GUESS_LABEL: &str = "linear concentrations with small-lambda Planck field";

/// Solves the slab problem for `spec`.
pub fn solve(spec: &BoundarySpec, params: &ModelParams, cfg: &SolverConfig) -> std::result::Result<MeshSolution, SolveError> {
    spec.validate()?;
    cfg.validate()?;
    let problem = Problem::new(*spec, *params, cfg.mesh_size);
    let direct = newton(&problem, problem.initial_guess(), cfg);
    let failure = match direct {
        Ok(out) if out.converged => {
            let d = diagnostics(&problem, &out, 0, GUESS_LABEL, out.iterations);
            return Ok(problem.to_mesh(&out.y, d));
        }
        Ok(out) => {
            let d = diagnostics(&problem, &out, 0, GUESS_LABEL, out.iterations);
            SolveError::NonConvergence { last: Box::new(problem.to_mesh(&out.y, d.clone())), diagnostics: d }
        }
        Err(e) => e,
    };
    if !cfg.continuation {
        return Err(failure);
    }
    continuation(spec, params, cfg)
}

/// Solves along `λ_k = f^{1 − k/K} λ`, `k = 0..K`, from the default guess at
/// `λ_0 = fλ`.
fn continuation(spec: &BoundarySpec, params: &ModelParams, cfg: &SolverConfig) -> std::result::Result<MeshSolution, SolveError> {
    let steps = cfg.continuation_steps;
    let mut y = None;
    let mut total = 0;
    let label = format!("continuation in lambda from {}x target, {} stages", cfg.continuation_factor, steps + 1);
    for k in 0..=steps {
        let lambda = params.lambda * cfg.continuation_factor.powf(1.0 - k as f64 / steps as f64);
        let stage_params = params.with_lambda(lambda)?;
        let problem = Problem::new(*spec, stage_params, cfg.mesh_size);
        let guess = y.take().unwrap_or_else(|| problem.initial_guess());
        let out = newton(&problem, guess, cfg)?;
        total += out.iterations;
        if !out.converged || k == steps {
            let d = diagnostics(&problem, &out, k + 1, &label, total);
            let mesh = problem.to_mesh(&out.y, d.clone());
            return if out.converged { Ok(mesh) } else { Err(SolveError::NonConvergence { diagnostics: d, last: Box::new(mesh) }) };
        }
        y = Some(out.y);
    }
    unreachable!("continuation loop returns on its last stage")
}

/// Solves starting from an existing mesh solution (resampled to the new mesh).
pub fn solve_from(
    spec: &BoundarySpec,
    params: &ModelParams,
    cfg: &SolverConfig,
    guess: &MeshSolution,
) -> std::result::Result<MeshSolution, SolveError> {
    spec.validate()?;
    cfg.validate()?;
    let problem = Problem::new(*spec, *params, cfg.mesh_size);
    let out = newton(&problem, problem.unknowns_from(guess)?, cfg)?;
    let d = diagnostics(&problem, &out, 0, "previous solution", out.iterations);
    let mesh = problem.to_mesh(&out.y, d.clone());
    if out.converged {
        Ok(mesh)
    } else {
        Err(SolveError::NonConvergence { diagnostics: d, last: Box::new(mesh) })
    }
}

/// Max-norm of the discrete residual of `m` for its own spec.
pub fn collocation_residual(m: &MeshSolution) -> Result<f64> {
    let spec = m.spec.ok_or_else(|| Error::PreconditionFailed("mesh solution has no boundary spec".into()))?;
    let n = m.mesh.len() - 1;
    let problem = Problem::new(spec, m.params, n);
    let y: Vec<f64> = (0..=n).flat_map(|k| [m.c_plus[k], m.c_minus[k], m.e[k], m.a_plus, m.a_minus]).collect();
    Ok(max_norm(&problem.residual(&y)))
}

/// `λ²E′` at both faces, computed as `c₊ − c₋` there; both vanish under
/// charge-neutral boundary conditions.
pub fn neumann_check(m: &MeshSolution) -> (f64, f64) {
    let last = m.mesh.len() - 1;
    (m.c_plus[0] - m.c_minus[0], m.c_plus[last] - m.c_minus[last])
}

/// Defects `λ₀E′(0) − E(0)` and `λ₁E′(1) + E(1)` of the radiation
/// conditions, with `E′` from the Poisson equation at the faces.
pub fn radiation_check(m: &MeshSolution, c_minus_inf: f64, c_plus_inf: f64) -> (f64, f64) {
    let l = m.params.lambda;
    let l2 = m.params.lambda2();
    let last = m.mesh.len() - 1;
    let de = |k: usize| (m.c_plus[k] - m.c_minus[k]) / l2;
    (
        debye_length(l, c_minus_inf) * de(0) - m.e[0],
        debye_length(l, c_plus_inf) * de(last) + m.e[last],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub e: f64,
}

/// A slab solution continued into both reservoirs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullDomainProfile {
    pub left: Vec<ProfilePoint>,
    pub slab: Vec<ProfilePoint>,
    pub right: Vec<ProfilePoint>,
    pub left_reservoir: ReservoirProfile,
    pub right_reservoir: ReservoirProfile,
    /// Largest field jump at `x = 0` and `x = 1`.
    pub jumps: [f64; 2],
}

/// Attaches reservoir profiles to a reservoir-family slab solution and
/// samples all three pieces: `samples` points on `[x_left, 0]` and on
/// `[1, x_right]`, plus the slab mesh.
pub fn assemble_full_domain(m: &MeshSolution, x_left: f64, x_right: f64, samples: usize) -> Result<FullDomainProfile> {
    if !(x_left < 0.0 && x_right > 1.0 && samples >= 2) {
        return Err(Error::Domain(format!(
            "need x_left < 0 < 1 < x_right and at least 2 samples, got [{x_left}, {x_right}] with {samples}"
        )));
    }
    let spec = m.spec.ok_or_else(|| Error::PreconditionFailed("mesh solution has no boundary spec".into()))?;
    let lambda = m.params.lambda;
    let last = m.mesh.len() - 1;
    let (f0, f1) = (m.node(0), m.node(last));
    let (left, right) = match spec {
        BoundarySpec::ChargeNeutral { .. } => {
            return Err(Error::PreconditionFailed("charge-neutral solutions have no reservoir profile".into()))
        }
        BoundarySpec::Radiation { c_minus_inf, c_plus_inf, .. } => (
            ReservoirProfile::linearized_from_interface(Side::Left, f0.c_plus, f0.c_minus, c_minus_inf, lambda)?,
            ReservoirProfile::linearized_from_interface(Side::Right, f1.c_plus, f1.c_minus, c_plus_inf, lambda)?,
        ),
        BoundarySpec::ExactReservoir { c_minus_inf, c_plus_inf, .. } => {
            for (f, c, face) in [(f0, c_minus_inf, 0), (f1, c_plus_inf, 1)] {
                let defect = f.c_plus * f.c_minus - c * c;
                if defect.abs() > 1e-9 {
                    return Err(Error::Consistency(format!(
                        "c+ c- - c_inf^2 = {defect:e} at x = {face}"
                    )));
                }
            }
            (
                ReservoirProfile::exact_from_interface(Side::Left, f0.c_plus, f0.c_minus, c_minus_inf, lambda)?,
                ReservoirProfile::exact_from_interface(Side::Right, f1.c_plus, f1.c_minus, c_plus_inf, lambda)?,
            )
        }
    };
    let sample = |r: &ReservoirProfile, a: f64, b: f64| -> Result<Vec<ProfilePoint>> {
        (0..samples)
            .map(|k| {
                let x = a + (b - a) * k as f64 / (samples - 1) as f64;
                let x = if k == samples - 1 { b } else { x };
                r.eval(x).map(|p| ProfilePoint { x, c_plus: p.c_plus, c_minus: p.c_minus, e: p.e })
            })
            .collect()
    };
    let left_points = sample(&left, x_left, 0.0)?;
    let right_points = sample(&right, 1.0, x_right)?;
    let slab: Vec<ProfilePoint> = (0..=last)
        .map(|k| ProfilePoint { x: m.mesh[k], c_plus: m.c_plus[k], c_minus: m.c_minus[k], e: m.e[k] })
        .collect();
    let jump = |a: &ProfilePoint, b: &ProfilePoint| {
        (a.c_plus - b.c_plus).abs().max((a.c_minus - b.c_minus).abs()).max((a.e - b.e).abs())
    };
    let jumps = [jump(&left_points[samples - 1], &slab[0]), jump(&slab[last], &right_points[0])];
    if jumps.iter().any(|j| !(*j <= INTERFACE_TOL)) {
        return Err(Error::Consistency(format!("reservoir profiles are discontinuous at the faces: {jumps:?}")));
    }
    Ok(FullDomainProfile { left: left_points, slab, right: right_points, left_reservoir: left, right_reservoir: right, jumps })
}

#[cfg(test)]
mod tests;
