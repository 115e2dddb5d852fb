// SPDX-License-Identifier: Apache-2.0

//! Self-check suites over the whole library, used by the `verify` command.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::airy::airy;
use crate::bvp::{solve, BoundarySpec, SolverConfig};
use crate::exact::{
    airy_seed, exact_endpoint_concentrations, planck_seed, rational_member, AirySeedParams, PlanckSeedParams,
    ReservoirProfile, Side,
};
use crate::model::{
    interior_points, invariants_of, max_residual, pressure, system_residual, ModelParams, SolutionState,
};
use crate::transforms::{backlund, backlund_inv, conjugate, reflect};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Group,
    Residuals,
    Reservoir,
    Airy,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" => Ok(Suite::Group),
            "residuals" => Ok(Suite::Residuals),
            "reservoir" => Ok(Suite::Reservoir),
            "airy" => Ok(Suite::Airy),
            "all" => Ok(Suite::All),
            other => Err(Error::Domain(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// Worst observed defect.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(suite: &str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { suite: suite.into(), name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    fn failed(suite: &str, name: impl Into<String>, err: &dyn std::fmt::Display) -> Self {
        Self {
            suite: suite.into(),
            name: format!("{} ({err})", name.into()),
            value: f64::INFINITY,
            tolerance: 0.0,
            passed: false,
        }
    }
}

pub fn run(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Group => group_suite(),
        Suite::Residuals => residual_suite(),
        Suite::Reservoir => reservoir_suite(),
        Suite::Airy => airy_suite(),
        Suite::All => [group_suite(), residual_suite(), reservoir_suite(), airy_suite()].concat(),
    }
}

fn fig1_params() -> ModelParams {
    ModelParams::from_lambda_squared(0.01, 0.5).expect("valid parameters")
}

fn fig1_seed() -> PlanckSeedParams {
    PlanckSeedParams { c0: 1.0 / 3.0, a: 1.0 / 3.0 }
}

/// Planck seed with unequal mobilities and the Fig. 2 charge-neutral solution.
fn sample_states() -> Result<Vec<(&'static str, SolutionState)>> {
    let planck = planck_seed(fig1_seed(), ModelParams::from_lambda_squared(0.01, 0.7)?)?;
    let spec = BoundarySpec::ChargeNeutral { c0: 1.0 / 3.0, c1: 2.0 / 3.0, j0: 0.0 };
    let mesh = solve(&spec, &ModelParams::with_alpha_plus(0.5, 0.8)?, &SolverConfig::default())
        .map_err(|e| Error::Consistency(e.to_string()))?;
    Ok(vec![("planck", planck), ("neutral", mesh.to_state())])
}

/// Largest pointwise difference of fields and constants at 11 points.
pub fn state_distance(a: &SolutionState, b: &SolutionState) -> Result<f64> {
    let mut worst = (a.a_plus() - b.a_plus()).abs().max((a.a_minus() - b.a_minus()).abs());
    for x in interior_points(11) {
        worst = worst.max(a.eval(x)?.max_abs_diff(&b.eval(x)?));
    }
    Ok(worst)
}

type Relation = (&'static str, fn(&SolutionState) -> Result<(SolutionState, SolutionState)>);

const GROUP_RELATIONS: [Relation; 7] = [
    ("C^2 = I", |s| Ok((conjugate(&conjugate(s)?)?, s.clone()))),
    ("R^2 = I", |s| Ok((reflect(&reflect(s)?)?, s.clone()))),
    ("B^-1 B = I", |s| Ok((backlund_inv(&backlund(s)?)?, s.clone()))),
    ("B B^-1 = I", |s| Ok((backlund(&backlund_inv(s)?)?, s.clone()))),
    ("C B = B^-1 C", |s| Ok((conjugate(&backlund(s)?)?, backlund_inv(&conjugate(s)?)?))),
    ("R B = B R", |s| Ok((reflect(&backlund(s)?)?, backlund(&reflect(s)?)?))),
    ("R B^-1 = B^-1 R", |s| Ok((reflect(&backlund_inv(s)?)?, backlund_inv(&reflect(s)?)?))),
];

/// Group identities on two seeds to 1e-12.
pub fn group_suite() -> Vec<Check> {
    const SUITE: &str = "group";
    let states = match sample_states() {
        Ok(s) => s,
        Err(e) => return vec![Check::failed(SUITE, "sample states", &e)],
    };
    let mut out = Vec::new();
    for (label, s) in &states {
        for (name, relation) in GROUP_RELATIONS {
            let name = format!("{name} on {label}");
            match relation(s).and_then(|(l, r)| state_distance(&l, &r)) {
                Ok(d) => out.push(Check::new(SUITE, name, d, 1e-12)),
                Err(e) => out.push(Check::failed(SUITE, name, &e)),
            }
        }
    }
    out
}

/// Spread of `P(x) − θx` over 11 points.
pub fn first_integral_spread(s: &SolutionState) -> Result<f64> {
    let theta = s.theta();
    let values = interior_points(11)
        .into_iter()
        .map(|x| pressure(s, x).map(|p| p - theta * x))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(hi - lo)
}

/// Worst system residual over 11 interior points.
pub fn worst_residual(s: &SolutionState, h: f64) -> Result<f64> {
    let mut worst = 0.0_f64;
    for x in interior_points(11) {
        worst = worst.max(max_residual(&system_residual(s, x, h)?));
    }
    Ok(worst)
}

/// Residuals, first integrals and invariance of `(B, θ)`.
pub fn residual_suite() -> Vec<Check> {
    const SUITE: &str = "residuals";
    let mut out = Vec::new();
    let mut states: Vec<(String, Result<SolutionState>)> = Vec::new();
    for n in -3..=3 {
        states.push((format!("rational member {n}"), rational_member(fig1_seed(), fig1_params(), n)));
    }
    states.push((
        "airy seed".into(),
        airy_seed(AirySeedParams { c0: 1.0 / 3.0, a: 1.0 / 3.0, ai_coef: 1.0, bi_coef: 1.0 }, fig1_params()),
    ));
    match sample_states() {
        Ok(list) => states.extend(list.into_iter().map(|(l, s)| (l.to_string(), Ok(s)))),
        Err(e) => out.push(Check::failed(SUITE, "sample states", &e)),
    }
    for (label, state) in &states {
        let s = match state {
            Ok(s) => s,
            Err(e) => {
                out.push(Check::failed(SUITE, label.clone(), e));
                continue;
            }
        };
        match worst_residual(s, 1e-5) {
            Ok(r) => out.push(Check::new(SUITE, format!("system residual, {label}"), r, 1e-6)),
            Err(e) => out.push(Check::failed(SUITE, format!("system residual, {label}"), &e)),
        }
        match first_integral_spread(s) {
            Ok(d) => out.push(Check::new(SUITE, format!("P - theta x constant, {label}"), d, 1e-8)),
            Err(e) => out.push(Check::failed(SUITE, format!("P - theta x constant, {label}"), &e)),
        }
    }
    for (label, state) in states.iter().filter(|(l, _)| l == "neutral" || l == "rational member 1") {
        let Ok(s) = state else { continue };
        match invariant_defects(s) {
            Ok((under_group, under_reflection)) => {
                out.push(Check::new(SUITE, format!("(B, theta) under C, B, B^-1, {label}"), under_group, 1e-10));
                out.push(Check::new(SUITE, format!("(B, theta) -> (B + theta, -theta) under R, {label}"), under_reflection, 1e-10));
            }
            Err(e) => out.push(Check::failed(SUITE, format!("invariants, {label}"), &e)),
        }
    }
    out
}

/// Worst change of `(B, θ)` under `C`, `B`, `B⁻¹`, and worst defect of the
/// reflection rule.
pub fn invariant_defects(s: &SolutionState) -> Result<(f64, f64)> {
    let base = invariants_of(s)?;
    let mut group = 0.0_f64;
    for t in [conjugate(s)?, backlund(s)?, backlund_inv(s)?] {
        let inv = invariants_of(&t)?;
        group = group.max((inv.b - base.b).abs()).max((inv.theta - base.theta).abs());
    }
    let r = invariants_of(&reflect(s)?)?;
    let refl = (r.b - (base.b + base.theta)).abs().max((r.theta + base.theta).abs());
    Ok((group, refl))
}

/// Exact-reservoir identities at the interface.
pub fn reservoir_suite() -> Vec<Check> {
    const SUITE: &str = "reservoir";
    let mut out = Vec::new();
    let lambda = 0.7;
    for (side, c) in [(Side::Left, 1.0 / 3.0), (Side::Right, 2.0 / 3.0)] {
        for amp in [-0.5, -0.1, 0.2, 0.6] {
            let tag = format!("{side:?} amplitude {amp}");
            let r = match ReservoirProfile::exact(side, c, amp, lambda) {
                Ok(r) => r,
                Err(e) => {
                    out.push(Check::failed(SUITE, tag, &e));
                    continue;
                }
            };
            match reservoir_identities(&r) {
                Ok(d) => {
                    out.push(Check::new(SUITE, format!("c+ c- = c_inf^2, {tag}"), d.product, 1e-12));
                    out.push(Check::new(SUITE, format!("lambda E = sqrt(2c+) - sqrt(2c-), {tag}"), d.field, 1e-12));
                    out.push(Check::new(SUITE, format!("endpoint form, {tag}"), d.endpoint, 1e-12));
                    out.push(Check::new(SUITE, format!("Poisson-Boltzmann residual, {tag}"), d.poisson_boltzmann, 1e-8));
                }
                Err(e) => out.push(Check::failed(SUITE, tag, &e)),
            }
        }
    }
    out
}

/// Interface defects of an exact reservoir profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirDefects {
    pub product: f64,
    /// `λE = ±(√(2c₊) − √(2c₋))` at the face, sign `+` on the left.
    pub field: f64,
    pub endpoint: f64,
    pub poisson_boltzmann: f64,
}

pub fn reservoir_identities(r: &ReservoirProfile) -> Result<ReservoirDefects> {
    let face = r.interface();
    let f = r.eval(face)?;
    let c = r.c_infinity;
    let sign = if r.side == Side::Left { 1.0 } else { -1.0 };
    let root_gap = (2.0 * f.c_plus).sqrt() - (2.0 * f.c_minus).sqrt();
    let (cp, cm) = exact_endpoint_concentrations(r.side, c, r.lambda, f.e);
    let mut pb = 0.0_f64;
    let inward = -sign;
    for k in 1..=20 {
        let x = face + inward * 0.05 * r.lambda0 * k as f64;
        pb = pb.max(r.poisson_boltzmann_residual(x, 2e-3 * r.lambda0)?.abs());
    }
    Ok(ReservoirDefects {
        product: (f.c_plus * f.c_minus - c * c).abs(),
        field: (r.lambda * f.e - sign * root_gap).abs(),
        endpoint: (cp - f.c_plus).abs().max((cm - f.c_minus).abs()),
        poisson_boltzmann: pb,
    })
}

/// Wronskian and ODE checks of the Airy functions.
pub fn airy_suite() -> Vec<Check> {
    const SUITE: &str = "airy";
    let mut wronskian = 0.0_f64;
    let mut ode = 0.0_f64;
    for k in 0..=240 {
        let s = -12.0 + 0.1 * k as f64;
        let mid = match airy(s) {
            Ok(v) => v,
            Err(e) => return vec![Check::failed(SUITE, format!("evaluation at {s}"), &e)],
        };
        wronskian = wronskian.max((mid.wronskian() * PI - 1.0).abs());
        if s.abs() <= 10.0 {
            match airy_ode_defect(s) {
                Ok(d) => ode = ode.max(d),
                Err(e) => return vec![Check::failed(SUITE, format!("evaluation near {s}"), &e)],
            }
        }
    }
    vec![
        Check::new(SUITE, "Wronskian = 1/pi on [-12, 12] (relative)", wronskian, 1e-12),
        Check::new(SUITE, "y' and y'' = s y by differences on [-10, 10]", ode, 1e-8),
    ]
}

/// Defect of `(y)′ = y′` and `(y′)′ = s y` at `s` for `Ai` and `Bi`, with
/// derivatives from the five-point central stencil. `Bi` is measured
/// relative to `max(|Bi|, |Bi′|, 1)`.
pub fn airy_ode_defect(s: f64) -> Result<f64> {
    let h = 1e-3;
    let v = [airy(s - 2.0 * h)?, airy(s - h)?, airy(s)?, airy(s + h)?, airy(s + 2.0 * h)?];
    let d = |f: &dyn Fn(&crate::airy::AiryValues) -> f64| {
        (f(&v[0]) - 8.0 * f(&v[1]) + 8.0 * f(&v[3]) - f(&v[4])) / (12.0 * h)
    };
    let m = v[2];
    let ai = (d(&|a| a.ai) - m.ai_prime).abs().max((d(&|a| a.ai_prime) - s * m.ai).abs());
    let bi = (d(&|a| a.bi) - m.bi_prime).abs().max((d(&|a| a.bi_prime) - s * m.bi).abs());
    Ok(ai.max(bi / m.bi.abs().max(m.bi_prime.abs()).max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        for check in run(Suite::All) {
            assert!(check.passed, "{check:?}");
        }
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("group".parse::<Suite>().unwrap(), Suite::Group);
        assert!("bogus".parse::<Suite>().is_err());
    }
}
