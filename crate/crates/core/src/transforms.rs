// SPDX-License-Identifier: Apache-2.0

//! The discrete group acting on slab solutions.
//!
//! Every transform is a lazy wrapper around the source evaluator, so
//! composed maps are evaluated exactly rather than resampled. The group
//! relations `C² = R² = I`, `B⁻¹B = BB⁻¹ = I`, `CB = B⁻¹C`, `RB = BR` and
//! `RB⁻¹ = B⁻¹R` therefore hold to rounding.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::positivity_scan;
use crate::model::{
    closed_grid, current_of, invariants_of, FieldEvaluator, FieldValues, FluxLadder, ModelParams,
    SolutionState, SINGULAR_TOL,
};
use crate::{Error, Result};

/// Tolerance for the flux-constant preconditions of the Gambier maps.
pub const PRECONDITION_TOL: f64 = 1e-12;

/// `max |E|` over the scan grid below which `E` counts as identically zero.
pub const ZERO_FIELD_TOL: f64 = 1e-13;

/// Grid used for the identically-zero field test.
const ZERO_FIELD_GRID: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformKind {
    Conjugate,
    Reflect,
    Backlund,
    BacklundInv,
    GambierPlus,
    GambierMinus,
    GambierPlusInv,
    GambierMinusInv,
}

/// Records which transform produced a state, and from what.
#[derive(Debug, Clone)]
pub struct TransformTag {
    pub kind: TransformKind,
    pub source: Arc<SolutionState>,
}

fn derive(
    source: &SolutionState,
    kind: TransformKind,
    fields: Arc<dyn FieldEvaluator>,
    fluxes: FluxLadder,
) -> Result<SolutionState> {
    let tag = TransformTag { kind, source: Arc::new(source.clone()) };
    SolutionState::derived(source, fields, fluxes, tag)
}

fn guard(denominator: f64, x: f64) -> Result<()> {
    if denominator.abs() < SINGULAR_TOL {
        Err(Error::SingularEvaluation { x })
    } else {
        Ok(())
    }
}

#[derive(Debug)]
struct Conjugated(SolutionState);

impl FieldEvaluator for Conjugated {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let f = self.0.eval(x)?;
        Ok(FieldValues::new(f.c_minus, f.c_plus, -f.e))
    }
}

/// Charge conjugation `C`: swaps the species and reverses the field.
pub fn conjugate(s: &SolutionState) -> Result<SolutionState> {
    derive(s, TransformKind::Conjugate, Arc::new(Conjugated(s.clone())), s.fluxes().conjugated())
}

#[derive(Debug)]
struct Reflected(SolutionState);

impl FieldEvaluator for Reflected {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let f = self.0.eval(1.0 - x)?;
        Ok(FieldValues::new(f.c_plus, f.c_minus, -f.e))
    }
}

/// Reflection `R`: `x → 1 − x` with the field and both fluxes reversed.
pub fn reflect(s: &SolutionState) -> Result<SolutionState> {
    derive(s, TransformKind::Reflect, Arc::new(Reflected(s.clone())), s.fluxes().reflected())
}

#[derive(Debug)]
struct BacklundUp {
    source: SolutionState,
    a_plus: f64,
    lambda2: f64,
}

impl FieldEvaluator for BacklundUp {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let f = self.source.eval(x)?;
        let (a, l2) = (self.a_plus, self.lambda2);
        guard(f.c_plus, x)?;
        let r = a / f.c_plus;
        FieldValues::new(f.c_minus + 2.0 * l2 * r * f.e + 2.0 * l2 * r * r, f.c_plus, -f.e - 2.0 * r)
            .checked(x)
    }
}

/// Bäcklund transform `B`. Reduces to [`conjugate`] when `A₊ = 0`.
pub fn backlund(s: &SolutionState) -> Result<SolutionState> {
    let fluxes = s.fluxes().shifted(1);
    let a_plus = s.a_plus();
    let fields: Arc<dyn FieldEvaluator> = if a_plus == 0.0 {
        Arc::new(Conjugated(s.clone()))
    } else {
        Arc::new(BacklundUp { source: s.clone(), a_plus, lambda2: s.params().lambda2() })
    };
    derive(s, TransformKind::Backlund, fields, fluxes)
}

#[derive(Debug)]
struct BacklundDown {
    source: SolutionState,
    a_minus: f64,
    lambda2: f64,
}

impl FieldEvaluator for BacklundDown {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let f = self.source.eval(x)?;
        let (a, l2) = (self.a_minus, self.lambda2);
        guard(f.c_minus, x)?;
        let r = a / f.c_minus;
        FieldValues::new(f.c_minus, f.c_plus - 2.0 * l2 * r * f.e + 2.0 * l2 * r * r, -f.e + 2.0 * r)
            .checked(x)
    }
}

/// Inverse Bäcklund transform `B⁻¹`. Reduces to [`conjugate`] when `A₋ = 0`.
pub fn backlund_inv(s: &SolutionState) -> Result<SolutionState> {
    let fluxes = s.fluxes().shifted(-1);
    let a_minus = s.a_minus();
    let fields: Arc<dyn FieldEvaluator> = if a_minus == 0.0 {
        Arc::new(Conjugated(s.clone()))
    } else {
        Arc::new(BacklundDown { source: s.clone(), a_minus, lambda2: s.params().lambda2() })
    };
    derive(s, TransformKind::BacklundInv, fields, fluxes)
}

/// Applies `B` (`n > 0`) or `B⁻¹` (`n < 0`) `|n|` times.
pub fn backlund_power(s: &SolutionState, n: i64) -> Result<SolutionState> {
    let mut state = s.clone();
    for _ in 0..n.unsigned_abs() {
        state = if n > 0 { backlund(&state)? } else { backlund_inv(&state)? };
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Species {
    Plus,
    Minus,
}

#[derive(Debug)]
struct Gambier {
    source: SolutionState,
    /// Species whose flux constant vanishes in the source.
    root: Species,
    /// Nonzero flux constant of the source.
    a: f64,
    b: f64,
    lambda: f64,
}

impl FieldEvaluator for Gambier {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let f = self.source.eval(x)?;
        let c = match self.root {
            Species::Plus => f.c_plus,
            Species::Minus => f.c_minus,
        };
        if c < 0.0 {
            return Err(Error::Domain(format!("negative square-root argument 2c = {} at x = {x}", 2.0 * c)));
        }
        let root = (2.0 * c).sqrt();
        let common = 0.5 * c - 0.25 * (self.a * x + self.b);
        let split = 0.25 * self.lambda * f.e * root;
        let (c_plus, c_minus) = match self.root {
            Species::Plus => (common + split, common - split),
            Species::Minus => (common - split, common + split),
        };
        FieldValues::new(c_plus, c_minus, root / self.lambda).checked(x)
    }
}

fn gambier(s: &SolutionState, root: Species) -> Result<SolutionState> {
    let (zero, a, kind) = match root {
        Species::Plus => (s.a_plus(), s.a_minus(), TransformKind::GambierPlus),
        Species::Minus => (s.a_minus(), s.a_plus(), TransformKind::GambierMinus),
    };
    if zero.abs() > PRECONDITION_TOL {
        return Err(Error::ConstraintViolation(format!(
            "{kind:?} needs a vanishing flux constant, got {zero}"
        )));
    }
    let b = invariants_of(s)?.b;
    let fields = Gambier { source: s.clone(), root, a, b, lambda: s.params().lambda };
    let a_hat = -0.25 * a;
    derive(s, kind, Arc::new(fields), FluxLadder::new(a_hat, a_hat))
}

/// Gambier map `G₊` from the `A₊ = 0` class to the `A₊ = A₋` class; `B̂ = −B/2`.
///
/// The nonnegative square root of `2c₊` is used, so the image field is
/// nonnegative.
pub fn gambier_plus(s: &SolutionState) -> Result<SolutionState> {
    gambier(s, Species::Plus)
}

/// Gambier map `G₋` from the `A₋ = 0` class to the `A₊ = A₋` class.
pub fn gambier_minus(s: &SolutionState) -> Result<SolutionState> {
    gambier(s, Species::Minus)
}

#[derive(Debug)]
struct GambierInverse {
    source: SolutionState,
    /// Species whose flux constant vanishes in the image.
    root: Species,
    a: f64,
    b: f64,
    lambda2: f64,
}

impl FieldEvaluator for GambierInverse {
    fn eval(&self, x: f64) -> Result<FieldValues> {
        let f = self.source.eval(x)?;
        guard(f.e, x)?;
        let l2 = self.lambda2;
        let charge = f.c_plus - f.c_minus;
        let square = 0.5 * l2 * f.e * f.e;
        let vanishing = square;
        let other = -square + 2.0 * charge * charge / (l2 * f.e * f.e) - 4.0 * self.a * x - 2.0 * self.b;
        let e = 2.0 * charge / (l2 * f.e);
        let v = match self.root {
            Species::Plus => FieldValues::new(vanishing, other, e),
            Species::Minus => FieldValues::new(other, vanishing, -e),
        };
        v.checked(x)
    }
}

/// `max |E|` over a uniform grid, skipping singular points.
fn max_abs_field(s: &SolutionState, points: usize) -> f64 {
    closed_grid(points)
        .into_iter()
        .filter_map(|x| s.eval(x).ok())
        .fold(0.0_f64, |m, f| m.max(f.e.abs()))
}

fn gambier_inverse(s: &SolutionState, root: Species) -> Result<SolutionState> {
    let kind = match root {
        Species::Plus => TransformKind::GambierPlusInv,
        Species::Minus => TransformKind::GambierMinusInv,
    };
    let (a_plus, a_minus) = (s.a_plus(), s.a_minus());
    if (a_plus - a_minus).abs() > PRECONDITION_TOL {
        return Err(Error::ConstraintViolation(format!(
            "{kind:?} needs A+ = A-, got {a_plus} and {a_minus}"
        )));
    }
    if max_abs_field(s, ZERO_FIELD_GRID) < ZERO_FIELD_TOL {
        return Err(Error::IdenticallyZeroField);
    }
    let a = a_plus;
    let b = invariants_of(s)?.b;
    let fields = GambierInverse { source: s.clone(), root, a, b, lambda2: s.params().lambda2() };
    let fluxes = match root {
        Species::Plus => FluxLadder::new(0.0, -4.0 * a),
        Species::Minus => FluxLadder::new(-4.0 * a, 0.0),
    };
    derive(s, kind, Arc::new(fields), fluxes)
}

/// Inverse Gambier map `G₊⁻¹` from the `A₊ = A₋` class to the `A₊ = 0`
/// class; `B̂ = −2B`. Fails with [`Error::IdenticallyZeroField`] when
/// `E ≡ 0`, which is the case covered by [`crate::exact::airy_seed`].
pub fn gambier_plus_inv(s: &SolutionState) -> Result<SolutionState> {
    gambier_inverse(s, Species::Plus)
}

/// Inverse Gambier map `G₋⁻¹ = C G₊⁻¹`.
pub fn gambier_minus_inv(s: &SolutionState) -> Result<SolutionState> {
    gambier_inverse(s, Species::Minus)
}

/// Closed-form ladder values for member `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizedFluxes {
    pub a_plus: f64,
    pub a_minus: f64,
    pub j: f64,
    /// `θ = 0`: every member carries the seed constants.
    pub degenerate: bool,
}

/// Flux constants and current of the `n`-th Bäcklund iterate of a seed with
/// constants `(A₊, A₋)`, without constructing any solution.
pub fn quantized_fluxes(seed_a_plus: f64, seed_a_minus: f64, params: &ModelParams, n: i64) -> QuantizedFluxes {
    let ladder = FluxLadder::new(seed_a_plus, seed_a_minus).shifted(n);
    let (a_plus, a_minus) = (ladder.a_plus(), ladder.a_minus());
    QuantizedFluxes {
        a_plus,
        a_minus,
        j: current_of(params, a_plus, a_minus),
        degenerate: ladder.theta() == 0.0,
    }
}

/// One row of a [`SequenceReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub n: i64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub j: f64,
    /// Minima over the regular scan points; `None` when every point was singular.
    pub min_c_plus: Option<f64>,
    pub min_c_minus: Option<f64>,
    pub positive: bool,
    /// Some scan point (or the construction itself) hit a pole.
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub theta: f64,
    pub phi: f64,
    pub scan_points: usize,
    pub entries: Vec<SequenceEntry>,
}

impl SequenceReport {
    pub fn entry(&self, n: i64) -> Option<&SequenceEntry> {
        self.entries.iter().find(|e| e.n == n)
    }

    /// Largest `N` such that every member with `|n| ≤ N` is positive.
    pub fn positive_radius(&self) -> Option<i64> {
        let max = self.entries.iter().map(|e| e.n.abs()).max()?;
        let mut radius = None;
        for r in 0..=max {
            let ok = self.entries.iter().filter(|e| e.n.abs() == r).all(|e| e.positive);
            if !ok {
                break;
            }
            radius = Some(r);
        }
        radius
    }
}

/// Builds the Bäcklund sequence `B^n(seed)` for `n_min ≤ n ≤ n_max` and
/// scans each member for positivity.
pub fn generate_sequence(seed: &SolutionState, n_min: i64, n_max: i64, scan_points: usize) -> Result<SequenceReport> {
    if n_min > 0 || n_max < 0 {
        return Err(Error::PreconditionFailed(format!(
            "sequence range [{n_min}, {n_max}] must contain 0"
        )));
    }
    let mut members: Vec<(i64, Result<SolutionState>)> = vec![(0, Ok(seed.clone()))];
    for (direction, limit) in [(1_i64, n_max), (-1, n_min)] {
        let mut current = Ok(seed.clone());
        for k in 1..=limit.abs() {
            current = current.and_then(|s| if direction > 0 { backlund(&s) } else { backlund_inv(&s) });
            members.push((direction * k, current.clone()));
        }
    }
    members.sort_by_key(|(n, _)| *n);

    let params = *seed.params();
    let entries = members
        .into_iter()
        .map(|(n, member)| {
            let q = quantized_fluxes(seed.a_plus(), seed.a_minus(), &params, n);
            let scan = member.and_then(|s| positivity_scan(&s, scan_points));
            match scan {
                Ok(report) => SequenceEntry {
                    n,
                    a_plus: q.a_plus,
                    a_minus: q.a_minus,
                    j: q.j,
                    min_c_plus: Some(report.min_c_plus),
                    min_c_minus: Some(report.min_c_minus),
                    positive: report.positive && report.singular_points == 0,
                    singular: report.singular_points > 0,
                },
                Err(_) => SequenceEntry {
                    n,
                    a_plus: q.a_plus,
                    a_minus: q.a_minus,
                    j: q.j,
                    min_c_plus: None,
                    min_c_minus: None,
                    positive: false,
                    singular: true,
                },
            }
        })
        .collect();
    Ok(SequenceReport { theta: seed.theta(), phi: seed.a_plus() - seed.a_minus(), scan_points, entries })
}
