// SPDX-License-Identifier: Apache-2.0

//! Closed-form solutions: the Planck seed and its rational ladder, the
//! small-`λ` Planck profile, the Airy seed of the `A₊ = 0` class, and the
//! reservoir profiles used to continue slab solutions to `x → ∓∞`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::airy::airy;
use crate::model::{current_of, FieldEvaluator, FieldValues, ModelParams, Provenance, SolutionState};
use crate::transforms::backlund_power;
use crate::{Error, Result};

/// Data of the zero-field seed `c₊ = c₋ = c₀ + Ax`, `E = 0`, `A₊ = A₋ = A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanckSeedParams {
    pub c0: f64,
    pub a: f64,
}

impl PlanckSeedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0) {
            return Err(Error::Domain(format!("c0 must be positive, got {}", self.c0)));
        }
        if !(self.c0 + self.a > 0.0) {
            return Err(Error::Domain(format!("c0 + A must be positive, got {}", self.c0 + self.a)));
        }
        Ok(())
    }
}

#[derive(Debug)]
struct Planck {
    c0: f64,
    a: f64,
}

impl FieldEvaluator for Planck {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let c = self.c0 + self.a * x;
        Ok(FieldValues::new(c, c, 0.0))
    }
}

pub fn planck_seed(p: PlanckSeedParams, params: ModelParams) -> Result<SolutionState> {
    p.validate()?;
    Ok(SolutionState::new(Arc::new(Planck { c0: p.c0, a: p.a }), p.a, p.a, params, Provenance::Planck))
}

/// The `n`-th member of the rational sequence grown from the Planck seed.
pub fn rational_member(p: PlanckSeedParams, params: ModelParams, n: i64) -> Result<SolutionState> {
    backlund_power(&planck_seed(p, params)?, n)
}

/// Leading-order profile for small `λ`: neutral linear concentration and
/// the field that carries the fluxes.
///
/// Exact only when `A₊ = A₋`; otherwise `c₊ − c₋ = λ²E′` is violated at
/// order `λ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallLambdaProfile {
    pub c0: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub params: ModelParams,
}

pub fn planck_small_lambda(c0: f64, a_plus: f64, a_minus: f64, params: ModelParams) -> Result<SmallLambdaProfile> {
    let slope = 0.5 * (a_plus + a_minus);
    if !(c0 > 0.0 && c0 + slope > 0.0) {
        return Err(Error::Domain(format!(
            "concentration c0 + (A+ + A-)x/2 must stay positive on [0, 1] (c0 = {c0}, c1 = {})",
            c0 + slope
        )));
    }
    Ok(SmallLambdaProfile { c0, a_plus, a_minus, params })
}

impl SmallLambdaProfile {
    pub fn concentration(&self, x: f64) -> f64 {
        self.c0 + 0.5 * (self.a_plus + self.a_minus) * x
    }

    pub fn c1(&self) -> f64 {
        self.concentration(1.0)
    }

    /// `E = (A₋ − A₊) / 2c`.
    pub fn field(&self, x: f64) -> f64 {
        0.5 * (self.a_minus - self.a_plus) / self.concentration(x)
    }

    /// Ohmic part `j / c`.
    pub fn ohmic_field(&self, x: f64) -> f64 {
        current_of(&self.params, self.a_plus, self.a_minus) / self.concentration(x)
    }

    /// Diffusion-potential part `(α₊ − α₋)(c₁ − c₀) / c`.
    pub fn gradient_field(&self, x: f64) -> f64 {
        (self.params.alpha_plus - self.params.alpha_minus) * (self.c1() - self.c0) / self.concentration(x)
    }

    pub fn is_exact(&self) -> bool {
        self.a_plus == self.a_minus
    }

    pub fn eval(&self, x: f64) -> FieldValues {
        let c = self.concentration(x);
        FieldValues::new(c, c, self.field(x))
    }

    pub fn to_state(&self) -> SolutionState {
        let provenance = if self.is_exact() { Provenance::Planck } else { Provenance::External };
        SolutionState::new(Arc::new(*self), self.a_plus, self.a_minus, self.params, provenance)
    }
}

impl FieldEvaluator for SmallLambdaProfile {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        Ok(SmallLambdaProfile::eval(self, x))
    }
}

/// Data for the Airy seed: the Planck constants plus the coefficients of
/// `F = a Ai(s) + b Bi(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirySeedParams {
    pub c0: f64,
    pub a: f64,
    pub ai_coef: f64,
    pub bi_coef: f64,
}

/// Sign-scan resolution for zeros of `F`.
pub const AIRY_SCAN_POINTS: usize = 256;

#[derive(Debug, Clone, Copy)]
struct AirySeed {
    c0: f64,
    a: f64,
    ai_coef: f64,
    bi_coef: f64,
    lambda2: f64,
    scale: f64,
    ds_dx: f64,
}

impl AirySeed {
    fn new(p: AirySeedParams, lambda: f64) -> Self {
        let lambda2 = lambda * lambda;
        let scale = (4.0 * lambda2 * p.a * p.a).cbrt();
        Self {
            c0: p.c0,
            a: p.a,
            ai_coef: p.ai_coef,
            bi_coef: p.bi_coef,
            lambda2,
            scale,
            ds_dx: 2.0 * p.a / scale,
        }
    }

    fn argument(&self, x: f64) -> f64 {
        2.0 * (self.c0 + self.a * x) / self.scale
    }

    /// `(F, F′)` with the derivative taken in `x`.
    fn f(&self, x: f64) -> Result<(f64, f64)> {
        let v = airy(self.argument(x))?;
        let f = self.ai_coef * v.ai + self.bi_coef * v.bi;
        let df = self.ds_dx * (self.ai_coef * v.ai_prime + self.bi_coef * v.bi_prime);
        Ok((f, df))
    }
}

impl FieldEvaluator for AirySeed {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let (f, df) = self.f(x)?;
        if f.abs() < crate::model::SINGULAR_TOL * df.abs().max(1.0) {
            return Err(Error::SingularEvaluation { x });
        }
        let w = df / f;
        FieldValues::new(0.0, 2.0 * self.lambda2 * w * w - 4.0 * self.a * x - 4.0 * self.c0, 2.0 * w).checked(x)
    }
}

/// Solution of the `A₊ = 0` class obtained as the `E ≡ 0` limit of the
/// inverse Gambier map applied to the Planck seed:
/// `c₊ ≡ 0`, `c₋ = 2λ²F′²/F² − 4Ax − 4c₀`, `E = 2F′/F`, `A₋ = −4A`, `B = −4c₀`.
pub fn airy_seed(p: AirySeedParams, params: ModelParams) -> Result<SolutionState> {
    if p.a == 0.0 {
        return Err(Error::Domain("Airy seed needs A != 0".into()));
    }
    if p.ai_coef == 0.0 && p.bi_coef == 0.0 {
        return Err(Error::Domain("Airy seed needs a nonzero combination of Ai and Bi".into()));
    }
    let seed = AirySeed::new(p, params.lambda);
    if let Some(x) = find_zero(&seed)? {
        return Err(Error::PoleOnInterval { x });
    }
    Ok(SolutionState::new(Arc::new(seed), 0.0, -4.0 * p.a, params, Provenance::AirySeed))
}

/// First zero of `F` on `[0, 1]`, located by a sign scan plus bisection.
fn find_zero(seed: &AirySeed) -> Result<Option<f64>> {
    let n = AIRY_SCAN_POINTS;
    let f = |x: f64| seed.f(x).map(|v| v.0);
    let mut x_prev = 0.0;
    let mut f_prev = f(0.0)?;
    if f_prev == 0.0 {
        return Ok(Some(0.0));
    }
    for k in 1..n {
        let x = k as f64 / (n - 1) as f64;
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(Some(x));
        }
        if fx.signum() != f_prev.signum() {
            let (mut lo, mut hi, mut f_lo) = (x_prev, x, f_prev);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid)?;
                if fm.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x ≤ 0`, limiting concentration `c₋∞`.
    Left,
    /// `x ≥ 1`, limiting concentration `c₊∞`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReservoirMode {
    Exact,
    Linearized,
}

/// A field-free-at-infinity reservoir attached to one face of the slab.
///
/// The left profile is written in terms of `u = A e^{x/λ₀}`; the right one
/// is its mirror image under `x → 1 − x`, `E → −E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirProfile {
    pub side: Side,
    pub c_infinity: f64,
    /// `A` of the exact profile; `tanh(φ₀/4)` in linearized mode.
    pub amplitude: f64,
    pub lambda: f64,
    pub lambda0: f64,
    pub mode: ReservoirMode,
    /// Potential at the interface, `φ` measured from the reservoir at infinity.
    pub phi0: f64,
}

/// Fields of a reservoir at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirPoint {
    pub c_plus: f64,
    pub c_minus: f64,
    pub e: f64,
    pub phi: f64,
}

/// Reservoir Debye length `λ/√(2c∞)`.
pub fn debye_length(lambda: f64, c_infinity: f64) -> f64 {
    lambda / (2.0 * c_infinity).sqrt()
}

fn check_reservoir(c_infinity: f64, lambda: f64) -> Result<()> {
    if !(c_infinity > 0.0 && lambda > 0.0) {
        return Err(Error::Domain(format!(
            "reservoir needs c_inf > 0 and lambda > 0, got {c_infinity} and {lambda}"
        )));
    }
    Ok(())
}

impl ReservoirProfile {
    pub fn exact(side: Side, c_infinity: f64, amplitude: f64, lambda: f64) -> Result<Self> {
        check_reservoir(c_infinity, lambda)?;
        if !(amplitude.abs() < 1.0) {
            return Err(Error::Domain(format!("reservoir amplitude must lie in (-1, 1), got {amplitude}")));
        }
        Ok(Self {
            side,
            c_infinity,
            amplitude,
            lambda,
            lambda0: debye_length(lambda, c_infinity),
            mode: ReservoirMode::Exact,
            phi0: 2.0 * ((1.0 + amplitude) / (1.0 - amplitude)).ln(),
        })
    }

    pub fn linearized(side: Side, c_infinity: f64, phi0: f64, lambda: f64) -> Result<Self> {
        check_reservoir(c_infinity, lambda)?;
        if !phi0.is_finite() {
            return Err(Error::Domain(format!("interface potential must be finite, got {phi0}")));
        }
        Ok(Self {
            side,
            c_infinity,
            amplitude: (0.25 * phi0).tanh(),
            lambda,
            lambda0: debye_length(lambda, c_infinity),
            mode: ReservoirMode::Linearized,
            phi0,
        })
    }

    /// Exact profile matching interface concentrations from a slab solution.
    pub fn exact_from_interface(side: Side, c_plus: f64, c_minus: f64, c_infinity: f64, lambda: f64) -> Result<Self> {
        Self::exact(side, c_infinity, amplitude_from_interface(c_plus, c_minus, c_infinity)?, lambda)
    }

    /// Linearized profile matching the interface charge `c₊ − c₋`.
    pub fn linearized_from_interface(side: Side, c_plus: f64, c_minus: f64, c_infinity: f64, lambda: f64) -> Result<Self> {
        Self::linearized(side, c_infinity, -(c_plus - c_minus) / (2.0 * c_infinity), lambda)
    }

    /// Coordinate of the slab face the reservoir is attached to.
    pub fn interface(&self) -> f64 {
        match self.side {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }

    /// Whether `|φ₀|` is small enough for linearization to be meaningful.
    pub fn is_small_amplitude(&self) -> bool {
        self.phi0.abs() < 0.1
    }

    /// Maps `x` to the equivalent left-reservoir coordinate `ξ ≤ 0`.
    fn local(&self, x: f64) -> Result<f64> {
        let xi = match self.side {
            Side::Left => x,
            Side::Right => 1.0 - x,
        };
        if !(xi <= 0.0) {
            return Err(Error::Domain(format!("x = {x} is outside the {:?} reservoir", self.side)));
        }
        Ok(xi)
    }

    fn orient(&self, p: ReservoirPoint) -> ReservoirPoint {
        match self.side {
            Side::Left => p,
            Side::Right => ReservoirPoint { e: -p.e, ..p },
        }
    }

    pub fn eval(&self, x: f64) -> Result<ReservoirPoint> {
        match self.mode {
            ReservoirMode::Exact => reservoir_exact(self, x),
            ReservoirMode::Linearized => reservoir_linearized(self, x),
        }
    }

    /// Residuals of the zero-flux reservoir system `c₊′ = Ec₊`,
    /// `c₋′ = −Ec₋`, `λ²E′ = c₊ − c₋` by central differences.
    pub fn system_residual(&self, x: f64, h: f64) -> Result<[f64; 3]> {
        let (lo, mid, hi) = (self.eval(x - h)?, self.eval(x)?, self.eval(x + h)?);
        let d = |a: f64, b: f64| (b - a) / (2.0 * h);
        Ok([
            d(lo.c_plus, hi.c_plus) - mid.e * mid.c_plus,
            d(lo.c_minus, hi.c_minus) + mid.e * mid.c_minus,
            self.lambda * self.lambda * d(lo.e, hi.e) - (mid.c_plus - mid.c_minus),
        ])
    }

    /// Residual of `−λ²φ″ = c∞(e^{−φ} − e^{φ})`, with `φ″` from the
    /// five-point central stencil of step `h`.
    pub fn poisson_boltzmann_residual(&self, x: f64, h: f64) -> Result<f64> {
        let phi = |k: f64| self.eval(x + k * h).map(|p| p.phi);
        let d2 = (-phi(2.0)? + 16.0 * phi(1.0)? - 30.0 * phi(0.0)? + 16.0 * phi(-1.0)? - phi(-2.0)?) / (12.0 * h * h);
        let mid = phi(0.0)?;
        Ok(-self.lambda * self.lambda * d2 - self.c_infinity * ((-mid).exp() - mid.exp()))
    }
}

/// Exact reservoir fields at `x` (`x ≤ 0` left, `x ≥ 1` right).
pub fn reservoir_exact(r: &ReservoirProfile, x: f64) -> Result<ReservoirPoint> {
    let xi = r.local(x)?;
    let u = r.amplitude * (xi / r.lambda0).exp();
    if !(u.abs() < 1.0) {
        return Err(Error::Domain(format!("reservoir profile has a pole at x = {x}")));
    }
    let ratio = (1.0 - u) / (1.0 + u);
    let c = r.c_infinity;
    Ok(r.orient(ReservoirPoint {
        c_plus: c * ratio * ratio,
        c_minus: c / (ratio * ratio),
        e: -4.0 * u / (r.lambda0 * (1.0 - u * u)),
        phi: -2.0 * ratio.ln(),
    }))
}

/// Linearized reservoir fields `c± = c∞(1 ∓ φ₀e^{ξ/λ₀})`, `E = −φ₀e^{ξ/λ₀}/λ₀`.
pub fn reservoir_linearized(r: &ReservoirProfile, x: f64) -> Result<ReservoirPoint> {
    let xi = r.local(x)?;
    let phi = r.phi0 * (xi / r.lambda0).exp();
    let c = r.c_infinity;
    Ok(r.orient(ReservoirPoint { c_plus: c * (1.0 - phi), c_minus: c * (1.0 + phi), e: -phi / r.lambda0, phi }))
}

/// Recovers the exact-profile amplitude from interface concentrations.
pub fn amplitude_from_interface(c_plus: f64, c_minus: f64, c_infinity: f64) -> Result<f64> {
    if !(c_plus > 0.0 && c_minus > 0.0 && c_infinity > 0.0) {
        return Err(Error::Domain(format!(
            "interface concentrations must be positive, got c+ = {c_plus}, c- = {c_minus}, c_inf = {c_infinity}"
        )));
    }
    let defect = c_plus * c_minus - c_infinity * c_infinity;
    if defect.abs() > 1e-8 {
        return Err(Error::Consistency(format!(
            "c+(0) c-(0) - c_inf^2 = {defect:e} is not consistent with an exact reservoir"
        )));
    }
    let r = (c_plus / c_minus).powf(0.25);
    Ok((1.0 - r) / (1.0 + r))
}

/// Endpoint concentrations of an exact reservoir in terms of the interface
/// field: `c± = c∞ + ¼λ²E² ± ¼λE√(8c∞ + λ²E²)` on the left, with the sign
/// of the last term reversed on the right.
pub fn exact_endpoint_concentrations(side: Side, c_infinity: f64, lambda: f64, e: f64) -> (f64, f64) {
    let (c_plus, c_minus, _) = exact_endpoint_with_slope(side, c_infinity, lambda, e);
    (c_plus, c_minus)
}

/// As [`exact_endpoint_concentrations`], plus the derivative in `E` of the
/// split term `±¼λE√(8c∞ + λ²E²)`.
pub(crate) fn exact_endpoint_with_slope(side: Side, c_infinity: f64, lambda: f64, e: f64) -> (f64, f64, f64) {
    let le = lambda * e;
    let q = 8.0 * c_infinity + le * le;
    let root = q.sqrt();
    let even = c_infinity + 0.25 * le * le;
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let split = sign * 0.25 * le * root;
    let d_split = sign * 0.25 * lambda * (root + le * le / root);
    (even + split, even - split, d_split)
}
