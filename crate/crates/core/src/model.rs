// SPDX-License-Identifier: Apache-2.0

//! Parameters, solution states and the residual operators of the slab system.
//!
//! Everything here is dimensionless. [`DimensionalParams`] exists only to
//! convert fluxes and fields at the boundary of the library.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::transforms::TransformTag;
use crate::{Error, Result};

/// Magnitude below which a denominator counts as a pole.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Default central-difference step for residual checks.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Default probe location for the first integral.
pub const PROBE_POINT: f64 = 0.5;

/// Fallback probe locations, tried in order when [`PROBE_POINT`] is singular.
pub const PROBE_SCAN: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Dimensionless model constants: the Debye-like parameter `λ` and the
/// diffusivity fractions `α± = D± / (D₊ + D₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, alpha_plus: f64, alpha_minus: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        if !(alpha_plus > 0.0 && alpha_minus > 0.0) {
            return Err(Error::Domain(format!(
                "diffusivity fractions must be positive, got alpha+ = {alpha_plus}, alpha- = {alpha_minus}"
            )));
        }
        if (alpha_plus + alpha_minus - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "alpha+ + alpha- must equal 1, got {}",
                alpha_plus + alpha_minus
            )));
        }
        Ok(Self { lambda, alpha_plus, alpha_minus })
    }

    /// Builds parameters from `λ` and `α₊`, with `α₋ = 1 − α₊`.
    pub fn with_alpha_plus(lambda: f64, alpha_plus: f64) -> Result<Self> {
        Self::new(lambda, alpha_plus, 1.0 - alpha_plus)
    }

    /// Parameters from `λ²`, as used by the rational-ladder literature.
    pub fn from_lambda_squared(lambda2: f64, alpha_plus: f64) -> Result<Self> {
        if !(lambda2 > 0.0) {
            return Err(Error::Domain(format!("lambda^2 must be positive, got {lambda2}")));
        }
        Self::with_alpha_plus(lambda2.sqrt(), alpha_plus)
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda * self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.alpha_plus, self.alpha_minus)
    }
}

/// Physical inputs (Gaussian units) for the nondimensionalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    /// Junction width (cm).
    pub delta: f64,
    /// Diffusion constants (cm²/s).
    pub d_plus: f64,
    pub d_minus: f64,
    /// Common valence.
    pub z_tilde: f64,
    /// Absolute temperature (K).
    pub temperature: f64,
    /// Permittivity.
    pub epsilon: f64,
    /// Reference concentration (1/cm³).
    pub c_ref: f64,
    /// Elementary charge.
    pub e_charge: f64,
    /// Boltzmann constant.
    pub k_b: f64,
}

/// Dimensional ionic fluxes `Φ±` (1/cm²·s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxPair {
    pub phi_plus: f64,
    pub phi_minus: f64,
}

/// The dimensionless image of a [`DimensionalParams`] / [`FluxPair`] pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondimensional {
    pub params: ModelParams,
    pub a_plus: f64,
    pub a_minus: f64,
    pub j: f64,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("delta", self.delta),
            ("D+", self.d_plus),
            ("D-", self.d_minus),
            ("valence", self.z_tilde),
            ("temperature", self.temperature),
            ("epsilon", self.epsilon),
            ("c_ref", self.c_ref),
            ("e", self.e_charge),
            ("k_B", self.k_b),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }

    fn charge(&self) -> f64 {
        self.z_tilde * self.e_charge
    }

    /// `λ = √(ε k_B T / 4π (z̃e)² δ² c_ref)`.
    pub fn lambda(&self) -> f64 {
        let q = self.charge();
        (self.epsilon * self.k_b * self.temperature
            / (4.0 * std::f64::consts::PI * q * q * self.delta * self.delta * self.c_ref))
            .sqrt()
    }

    /// Dimensional current density `J = z̃e (Φ₊ − Φ₋)`.
    pub fn current(&self, flux: &FluxPair) -> f64 {
        self.charge() * (flux.phi_plus - flux.phi_minus)
    }

    /// Scale taking dimensional `J` to dimensionless `j`.
    fn current_scale(&self) -> f64 {
        self.delta / (self.charge() * self.c_ref * (self.d_plus + self.d_minus))
    }

    /// Converts a physical point `(x, c₊, c₋, E)` to dimensionless form.
    pub fn fields_to_dimensionless(&self, x: f64, c_plus: f64, c_minus: f64, e: f64) -> [f64; 4] {
        [
            x / self.delta,
            c_plus / self.c_ref,
            c_minus / self.c_ref,
            self.charge() * self.delta * e / (self.k_b * self.temperature),
        ]
    }

    /// Inverse of [`Self::fields_to_dimensionless`].
    pub fn fields_to_dimensional(&self, x: f64, c_plus: f64, c_minus: f64, e: f64) -> [f64; 4] {
        [
            x * self.delta,
            c_plus * self.c_ref,
            c_minus * self.c_ref,
            e * self.k_b * self.temperature / (self.charge() * self.delta),
        ]
    }
}

/// Maps physical constants and fluxes to `(λ, α±, A±, j)`.
pub fn nondimensionalize(d: &DimensionalParams, flux: &FluxPair) -> Result<Nondimensional> {
    d.validate()?;
    let diffusivity = d.d_plus + d.d_minus;
    let params = ModelParams::new(d.lambda(), d.d_plus / diffusivity, d.d_minus / diffusivity)?;
    let a_plus = -flux.phi_plus * d.delta / (d.c_ref * d.d_plus);
    let a_minus = -flux.phi_minus * d.delta / (d.c_ref * d.d_minus);
    let j = d.current_scale() * d.current(flux);
    Ok(Nondimensional { params, a_plus, a_minus, j })
}

/// Recovers the dimensional fluxes from dimensionless flux constants.
pub fn dimensionalize(d: &DimensionalParams, a_plus: f64, a_minus: f64) -> Result<FluxPair> {
    d.validate()?;
    Ok(FluxPair {
        phi_plus: -a_plus * d.c_ref * d.d_plus / d.delta,
        phi_minus: -a_minus * d.c_ref * d.d_minus / d.delta,
    })
}

/// Dimensional current-ladder spacing `ΔJ = z̃e (D₊ + D₋)(Φ₊/D₊ + Φ₋/D₋)`.
pub fn current_ladder_spacing(d: &DimensionalParams, seed: &FluxPair) -> f64 {
    d.charge() * (d.d_plus + d.d_minus) * (seed.phi_plus / d.d_plus + seed.phi_minus / d.d_minus)
}

/// Dimensional fluxes of the `n`-th ladder member grown from `seed`.
pub fn quantized_dimensional_fluxes(d: &DimensionalParams, seed: &FluxPair, n: i64) -> FluxPair {
    let n = n as f64;
    FluxPair {
        phi_plus: (n + 1.0) * seed.phi_plus + n * (d.d_plus / d.d_minus) * seed.phi_minus,
        phi_minus: -(n - 1.0) * seed.phi_minus - n * (d.d_minus / d.d_plus) * seed.phi_plus,
    }
}

/// Point values `(c₊, c₋, E)` of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldValues {
    pub c_plus: f64,
    pub c_minus: f64,
    pub e: f64,
}

impl FieldValues {
    pub fn new(c_plus: f64, c_minus: f64, e: f64) -> Self {
        Self { c_plus, c_minus, e }
    }

    pub fn is_finite(&self) -> bool {
        self.c_plus.is_finite() && self.c_minus.is_finite() && self.e.is_finite()
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &FieldValues) -> f64 {
        (self.c_plus - other.c_plus)
            .abs()
            .max((self.c_minus - other.c_minus).abs())
            .max((self.e - other.e).abs())
    }

    /// Returns `self` if finite, otherwise a singular-evaluation error at `x`.
    pub fn checked(self, x: f64) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::SingularEvaluation { x })
        }
    }
}

/// Pointwise field evaluator behind a [`SolutionState`].
pub trait FieldEvaluator: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64) -> Result<FieldValues>;
}

/// Flux constants of a solution, held as a position on a Bäcklund ladder.
///
/// `step = 0` returns the seed constants verbatim. Otherwise
/// `A₊ = (½ + n)θ + ½φ`, `A₋ = (½ − n)θ − ½φ` with `θ`, `φ` taken from the
/// seed, so constants produced by iterated transforms are the closed-form
/// ladder values bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxLadder {
    pub seed_plus: f64,
    pub seed_minus: f64,
    pub step: i64,
}

impl FluxLadder {
    pub fn new(a_plus: f64, a_minus: f64) -> Self {
        Self { seed_plus: a_plus, seed_minus: a_minus, step: 0 }
    }

    pub fn theta(&self) -> f64 {
        self.seed_plus + self.seed_minus
    }

    pub fn phi(&self) -> f64 {
        self.seed_plus - self.seed_minus
    }

    pub fn a_plus(&self) -> f64 {
        if self.step == 0 {
            self.seed_plus
        } else {
            (0.5 + self.step as f64) * self.theta() + 0.5 * self.phi()
        }
    }

    pub fn a_minus(&self) -> f64 {
        if self.step == 0 {
            self.seed_minus
        } else {
            (0.5 - self.step as f64) * self.theta() - 0.5 * self.phi()
        }
    }

    pub fn shifted(&self, by: i64) -> Self {
        Self { step: self.step + by, ..*self }
    }

    /// Ladder of the conjugate solution: seeds swapped, direction reversed.
    pub fn conjugated(&self) -> Self {
        Self { seed_plus: self.seed_minus, seed_minus: self.seed_plus, step: -self.step }
    }

    /// Ladder of the reflected solution: all constants negated.
    pub fn reflected(&self) -> Self {
        Self { seed_plus: -self.seed_plus, seed_minus: -self.seed_minus, step: self.step }
    }
}

/// Where a [`SolutionState`] came from.
#[derive(Debug, Clone)]
pub enum Provenance {
    Planck,
    Transformed(TransformTag),
    Mesh,
    ReservoirSeed,
    AirySeed,
    /// Any other closed-form or user-supplied evaluator.
    External,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Planck => "planck",
            Provenance::Transformed(_) => "transformed",
            Provenance::Mesh => "mesh",
            Provenance::ReservoirSeed => "reservoir-seed",
            Provenance::AirySeed => "airy-seed",
            Provenance::External => "external",
        }
    }
}

/// A solution `(c₊, c₋, E, A₊, A₋)` of the slab system, represented by a
/// pointwise evaluator with its constants attached.
///
/// States are immutable and cheap to clone. Transforms wrap the source
/// evaluator instead of resampling it.
#[derive(Debug, Clone)]
pub struct SolutionState {
    fields: Arc<dyn FieldEvaluator>,
    fluxes: FluxLadder,
    params: ModelParams,
    provenance: Provenance,
    depth: usize,
    max_depth: usize,
}

/// Default cap on the length of a transform chain.
pub const DEFAULT_MAX_DEPTH: usize = 32;

impl SolutionState {
    pub fn new(
        fields: Arc<dyn FieldEvaluator>,
        a_plus: f64,
        a_minus: f64,
        params: ModelParams,
        provenance: Provenance,
    ) -> Self {
        Self::from_ladder(fields, FluxLadder::new(a_plus, a_minus), params, provenance)
    }

    pub fn from_ladder(
        fields: Arc<dyn FieldEvaluator>,
        fluxes: FluxLadder,
        params: ModelParams,
        provenance: Provenance,
    ) -> Self {
        Self { fields, fluxes, params, provenance, depth: 0, max_depth: DEFAULT_MAX_DEPTH }
    }

    /// Builds the image of `source` under a transform, enforcing the depth cap.
    pub(crate) fn derived(
        source: &SolutionState,
        fields: Arc<dyn FieldEvaluator>,
        fluxes: FluxLadder,
        tag: TransformTag,
    ) -> Result<Self> {
        let depth = source.depth + 1;
        if depth > source.max_depth {
            return Err(Error::DepthExceeded { depth, cap: source.max_depth });
        }
        Ok(Self {
            fields,
            fluxes,
            params: source.params,
            provenance: Provenance::Transformed(tag),
            depth,
            max_depth: source.max_depth,
        })
    }

    /// Same state with a different transform-depth cap for its descendants.
    pub fn with_max_depth(mut self, cap: usize) -> Self {
        self.max_depth = cap;
        self
    }

    pub fn eval(&self, x: f64) -> Result<FieldValues> {
        self.fields.eval(x)
    }

    pub fn a_plus(&self) -> f64 {
        self.fluxes.a_plus()
    }

    pub fn a_minus(&self) -> f64 {
        self.fluxes.a_minus()
    }

    pub fn fluxes(&self) -> FluxLadder {
        self.fluxes
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Number of transforms between this state and its root.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `θ = A₊ + A₋`.
    pub fn theta(&self) -> f64 {
        self.a_plus() + self.a_minus()
    }
}

/// First-integral data of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantPair {
    /// `B = P(x) − θx`.
    pub b: f64,
    /// Resistive force density `θ = A₊ + A₋`.
    pub theta: f64,
    /// Flux asymmetry `φ = A₊ − A₋`.
    pub phi: f64,
}

impl InvariantPair {
    /// Reduces `φ` into `[−|θ|, |θ|)` by whole ladder steps of `2θ`.
    ///
    /// Returns the normalized asymmetry and the ladder index `n` of the
    /// state relative to the normalized seed (`φ = φ₀ + 2nθ`). `None` when
    /// `θ = 0`, where the ladder degenerates.
    pub fn normalized_phi(&self) -> Option<(f64, i64)> {
        if self.theta == 0.0 {
            return None;
        }
        let width = 2.0 * self.theta.abs();
        let shifted = self.phi + self.theta.abs();
        let k = (shifted / width).floor();
        let phi0 = self.phi - k * width;
        let n = (k as i64) * self.theta.signum() as i64;
        Some((phi0, n))
    }
}

/// Central-difference residuals of the three slab equations at `x`.
pub fn system_residual(s: &SolutionState, x: f64, h: f64) -> Result<[f64; 3]> {
    if !(h > 0.0) || x - h <= 0.0 || x + h >= 1.0 {
        return Err(Error::Domain(format!(
            "residual stencil [{}, {}] must lie inside (0, 1)",
            x - h,
            x + h
        )));
    }
    let lo = s.eval(x - h)?;
    let mid = s.eval(x)?;
    let hi = s.eval(x + h)?;
    let d = |a: f64, b: f64| (b - a) / (2.0 * h);
    let dc_plus = d(lo.c_plus, hi.c_plus);
    let dc_minus = d(lo.c_minus, hi.c_minus);
    let de = d(lo.e, hi.e);
    Ok([
        dc_plus - mid.e * mid.c_plus - s.a_plus(),
        dc_minus + mid.e * mid.c_minus - s.a_minus(),
        s.params().lambda2() * de - (mid.c_plus - mid.c_minus),
    ])
}

/// Largest absolute residual component.
pub fn max_residual(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Pressure `P(x) = c₊ + c₋ − ½λ²E²`.
pub fn pressure(s: &SolutionState, x: f64) -> Result<f64> {
    let f = s.eval(x)?;
    Ok(pressure_of(&f, s.params().lambda2()))
}

pub(crate) fn pressure_of(f: &FieldValues, lambda2: f64) -> f64 {
    f.c_plus + f.c_minus - 0.5 * lambda2 * f.e * f.e
}

/// First integral `B`, `θ` and `φ` of `s`, probed at `x = ½` with a scan
/// fallback.
pub fn invariants_of(s: &SolutionState) -> Result<InvariantPair> {
    let theta = s.theta();
    let phi = s.a_plus() - s.a_minus();
    let probe = std::iter::once(PROBE_POINT).chain(PROBE_SCAN);
    for x in probe {
        if let Ok(p) = pressure(s, x) {
            if p.is_finite() {
                return Ok(InvariantPair { b: p - theta * x, theta, phi });
            }
        }
    }
    Err(Error::SingularEvaluation { x: PROBE_POINT })
}

/// Dimensionless current density `j = α₋A₋ − α₊A₊`.
pub fn current_density(s: &SolutionState) -> f64 {
    current_of(s.params(), s.a_plus(), s.a_minus())
}

pub(crate) fn current_of(p: &ModelParams, a_plus: f64, a_minus: f64) -> f64 {
    p.alpha_minus * a_minus - p.alpha_plus * a_plus
}

/// Residual of the scaled Painlevé II equation
/// `λ²E″ − ½λ²E³ − (θx + B)E − (A₊ − A₋)` with `E″` by central differences.
pub fn painleve_residual(s: &SolutionState, x: f64, h: f64) -> Result<f64> {
    let inv = invariants_of(s)?;
    painleve_residual_with(s, &inv, x, h)
}

/// As [`painleve_residual`], reusing precomputed invariants.
pub fn painleve_residual_with(s: &SolutionState, inv: &InvariantPair, x: f64, h: f64) -> Result<f64> {
    let lo = s.eval(x - h)?;
    let mid = s.eval(x)?;
    let hi = s.eval(x + h)?;
    let lambda2 = s.params().lambda2();
    let e2 = (hi.e - 2.0 * mid.e + lo.e) / (h * h);
    Ok(lambda2 * e2
        - 0.5 * lambda2 * mid.e.powi(3)
        - (inv.theta * x + inv.b) * mid.e
        - (s.a_plus() - s.a_minus()))
}

/// Evenly spaced interior sample points `k/(n+1)`, `k = 1..=n`.
pub fn interior_points(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

/// `n` evenly spaced points covering `[0, 1]` inclusive.
pub fn closed_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{planck_seed, PlanckSeedParams};
    use approx::assert_relative_eq;

    fn fig1_params() -> ModelParams {
        ModelParams::from_lambda_squared(0.01, 0.5).unwrap()
    }

    fn planck() -> SolutionState {
        planck_seed(PlanckSeedParams { c0: 1.0 / 3.0, a: 1.0 / 3.0 }, fig1_params()).unwrap()
    }

    /// The first excited state written out in closed form, with its
    /// derivatives worked by hand.
    #[derive(Debug)]
    struct ExcitedUp {
        c0: f64,
        a: f64,
        lambda2: f64,
    }

    impl ExcitedUp {
        fn u(&self, x: f64) -> f64 {
            self.c0 + self.a * x
        }
        fn derivatives(&self, x: f64) -> [f64; 3] {
            let (u, a, l2) = (self.u(x), self.a, self.lambda2);
            [a - 4.0 * l2 * a.powi(3) / u.powi(3), a, 2.0 * a * a / (u * u)]
        }
    }

    impl FieldEvaluator for ExcitedUp {
        fn eval(&self, x: f64) -> Result<FieldValues> {
            let u = self.u(x);
            Ok(FieldValues::new(
                u + 2.0 * self.lambda2 * self.a * self.a / (u * u),
                u,
                -2.0 * self.a / u,
            ))
        }
    }

    fn excited(params: ModelParams) -> (SolutionState, Arc<ExcitedUp>) {
        let ev = Arc::new(ExcitedUp { c0: 1.0 / 3.0, a: 1.0 / 3.0, lambda2: params.lambda2() });
        let s = SolutionState::new(ev.clone(), 1.0, -1.0 / 3.0, params, Provenance::External);
        (s, ev)
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(ModelParams::new(0.0, 0.5, 0.5).is_err());
        assert!(ModelParams::new(0.5, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.6, 0.6).is_err());
        assert!(ModelParams::with_alpha_plus(0.5, 1.2).is_err());
        assert!(ModelParams::with_alpha_plus(0.5, 0.8).is_ok());
    }

    #[test]
    fn planck_residual_is_finite_difference_noise() {
        let r = system_residual(&planck(), 0.5, 1e-5).unwrap();
        assert!(max_residual(&r) < 1e-9, "{r:?}");
    }

    #[test]
    fn excited_state_hand_derivatives_match_system() {
        let params = fig1_params();
        let (s, ev) = excited(params);
        for x in interior_points(11) {
            let f = ev.eval(x).unwrap();
            let [dcp, dcm, de] = ev.derivatives(x);
            assert_relative_eq!(dcp, f.e * f.c_plus + 1.0, epsilon = 1e-13);
            assert_relative_eq!(dcm, -f.e * f.c_minus - 1.0 / 3.0, epsilon = 1e-13);
            assert_relative_eq!(params.lambda2() * de, f.c_plus - f.c_minus, epsilon = 1e-13);
            let r = system_residual(&s, x, DEFAULT_FD_STEP).unwrap();
            assert!(max_residual(&r) < 1e-6);
        }
    }

    #[test]
    fn pressure_of_planck_is_linear() {
        let s = planck();
        for x in closed_grid(11) {
            assert_relative_eq!(pressure(&s, x).unwrap(), 2.0 / 3.0 + 2.0 / 3.0 * x, epsilon = 1e-15);
        }
    }

    #[test]
    fn excited_state_pressure_at_origin() {
        let (s, _) = excited(fig1_params());
        assert_relative_eq!(pressure(&s, 0.0).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        let inv = invariants_of(&s).unwrap();
        assert_relative_eq!(inv.theta, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(inv.b, 2.0 / 3.0, epsilon = 1e-14);
        for x in closed_grid(11) {
            let drift = pressure(&s, x).unwrap() - inv.theta * x - inv.b;
            assert!(drift.abs() < 1e-10);
        }
    }

    #[test]
    fn planck_invariants() {
        let inv = invariants_of(&planck()).unwrap();
        assert_relative_eq!(inv.theta, 2.0 / 3.0);
        assert_eq!(inv.phi, 0.0);
        assert_relative_eq!(inv.b, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn current_density_cases() {
        let p = ModelParams::with_alpha_plus(0.1, 0.8).unwrap();
        let a = 1.0 / 3.0;
        let seed = planck_seed(PlanckSeedParams { c0: 1.0 / 3.0, a }, p).unwrap();
        assert_relative_eq!(current_density(&seed), (p.alpha_minus - p.alpha_plus) * a, epsilon = 1e-15);
        let zero = planck_seed(PlanckSeedParams { c0: 0.5, a: 0.0 }, p).unwrap();
        assert_eq!(current_density(&zero), 0.0);
        let (up, _) = excited(p);
        assert_relative_eq!(
            current_density(&up),
            -(3.0 * p.alpha_plus + p.alpha_minus) * a,
            epsilon = 1e-15
        );
    }

    #[test]
    fn painleve_residual_cases() {
        assert_eq!(painleve_residual(&planck(), 0.5, 1e-4).unwrap(), 0.0);
        let (s, _) = excited(fig1_params());
        for x in interior_points(11) {
            assert!(painleve_residual(&s, x, 1e-4).unwrap().abs() < 1e-5);
        }
    }

    #[test]
    fn invariants_scan_past_singular_probe() {
        #[derive(Debug)]
        struct PoleAtHalf;
        impl FieldEvaluator for PoleAtHalf {
            fn eval(&self, x: f64) -> Result<FieldValues> {
                if (x - 0.5).abs() < 1e-9 {
                    Err(Error::SingularEvaluation { x })
                } else {
                    Ok(FieldValues::new(1.0, 1.0, 0.0))
                }
            }
        }
        let s = SolutionState::new(Arc::new(PoleAtHalf), 0.0, 0.0, fig1_params(), Provenance::External);
        let inv = invariants_of(&s).unwrap();
        assert_relative_eq!(inv.b, 2.0);
    }

    #[test]
    fn residual_stencil_must_be_interior() {
        assert!(matches!(system_residual(&planck(), 1e-6, 1e-5), Err(Error::Domain(_))));
    }

    #[test]
    fn normalized_phi_lands_in_window() {
        let inv = InvariantPair { b: 0.0, theta: 2.0, phi: 9.0 };
        let (phi0, n) = inv.normalized_phi().unwrap();
        assert!((-2.0..2.0).contains(&phi0));
        assert_relative_eq!(phi0 + 2.0 * n as f64 * inv.theta, 9.0);
        assert!(InvariantPair { b: 0.0, theta: 0.0, phi: 1.0 }.normalized_phi().is_none());
    }

    fn sample_dimensional() -> DimensionalParams {
        DimensionalParams {
            delta: 1e-6,
            d_plus: 1.33e-5,
            d_minus: 2.03e-5,
            z_tilde: 1.0,
            temperature: 310.0,
            epsilon: 80.0,
            c_ref: 6.0e19,
            e_charge: 4.803e-10,
            k_b: 1.380649e-16,
        }
    }

    #[test]
    fn zero_fluxes_give_zero_constants() {
        let nd = nondimensionalize(&sample_dimensional(), &FluxPair { phi_plus: 0.0, phi_minus: 0.0 }).unwrap();
        assert_eq!((nd.a_plus, nd.a_minus, nd.j), (0.0, 0.0, 0.0));
    }

    #[test]
    fn equal_diffusivities_split_evenly() {
        let mut d = sample_dimensional();
        d.d_minus = d.d_plus;
        let nd = nondimensionalize(&d, &FluxPair { phi_plus: 1.0, phi_minus: 2.0 }).unwrap();
        assert_eq!(nd.params.alpha_plus, 0.5);
        assert_eq!(nd.params.alpha_minus, 0.5);
    }

    #[test]
    fn nonpositive_constants_are_rejected() {
        let mut d = sample_dimensional();
        d.temperature = 0.0;
        assert!(matches!(
            nondimensionalize(&d, &FluxPair { phi_plus: 0.0, phi_minus: 0.0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dimensionless_current_matches_flux_constants() {
        let d = sample_dimensional();
        let nd = nondimensionalize(&d, &FluxPair { phi_plus: 3.0e12, phi_minus: -1.0e12 }).unwrap();
        let j = current_of(&nd.params, nd.a_plus, nd.a_minus);
        assert_relative_eq!(nd.j, j, max_relative = 1e-12);
    }

    #[test]
    fn ladder_spacing_is_minus_theta_in_physical_units() {
        let d = sample_dimensional();
        let seed = FluxPair { phi_plus: 3.0e12, phi_minus: -1.0e12 };
        let nd = nondimensionalize(&d, &seed).unwrap();
        let scale = d.z_tilde * d.e_charge * d.c_ref * (d.d_plus + d.d_minus) / d.delta;
        let theta = nd.a_plus + nd.a_minus;
        assert_relative_eq!(current_ladder_spacing(&d, &seed), -theta * scale, max_relative = 1e-12);
        let f3 = quantized_dimensional_fluxes(&d, &seed, 3);
        let j3 = d.current(&f3) - d.current(&seed);
        assert_relative_eq!(j3, 3.0 * current_ladder_spacing(&d, &seed), max_relative = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn nondimensional_round_trip(
            delta in 1e-7f64..1e-3,
            d_plus in 1e-6f64..1e-4,
            d_minus in 1e-6f64..1e-4,
            temperature in 250.0f64..350.0,
            c_ref in 1e17f64..1e21,
            phi_plus in -1e14f64..1e14,
            phi_minus in -1e14f64..1e14,
            x in 0.0f64..1e-3,
            c in 1e17f64..1e21,
            e in -1e5f64..1e5,
        ) {
            let d = DimensionalParams { delta, d_plus, d_minus, temperature, c_ref, ..sample_dimensional() };
            let flux = FluxPair { phi_plus, phi_minus };
            let nd = nondimensionalize(&d, &flux).unwrap();
            let back = dimensionalize(&d, nd.a_plus, nd.a_minus).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            proptest::prop_assert!(rel(back.phi_plus, phi_plus) < 1e-12 || phi_plus == 0.0);
            proptest::prop_assert!(rel(back.phi_minus, phi_minus) < 1e-12 || phi_minus == 0.0);
            let star = d.fields_to_dimensionless(x, c, 2.0 * c, e);
            let orig = d.fields_to_dimensional(star[0], star[1], star[2], star[3]);
            for (o, v) in orig.iter().zip([x, c, 2.0 * c, e]) {
                proptest::prop_assert!(rel(*o, v) < 1e-12 || v == 0.0);
            }
        }
    }
}
