// SPDX-License-Identifier: Apache-2.0

//! Positivity scans and the sign checks that connect transforms to
//! boundary-value solutions.

use serde::{Deserialize, Serialize};

use crate::bvp::{BoundarySpec, MeshSolution};
use crate::model::{closed_grid, current_density, SolutionState};
use crate::transforms::{backlund, backlund_inv, TransformKind};
use crate::{Error, Result};

/// Default number of scan points.
pub const DEFAULT_SCAN_POINTS: usize = 1001;

/// `|j|` below which a state counts as current-free.
pub const ZERO_CURRENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub grid_points: usize,
    pub min_c_plus: f64,
    pub argmin_c_plus: f64,
    pub min_c_minus: f64,
    pub argmin_c_minus: f64,
    pub positive: bool,
    /// Grid points skipped because evaluation failed there.
    pub singular_points: usize,
}

/// Minima of `c±` over `grid_points` uniform points on `[0, 1]`.
pub fn positivity_scan(s: &SolutionState, grid_points: usize) -> Result<PositivityReport> {
    let mut report = PositivityReport {
        grid_points,
        min_c_plus: f64::INFINITY,
        argmin_c_plus: f64::NAN,
        min_c_minus: f64::INFINITY,
        argmin_c_minus: f64::NAN,
        positive: false,
        singular_points: 0,
    };
    for x in closed_grid(grid_points) {
        match s.eval(x) {
            Ok(f) => {
                if f.c_plus < report.min_c_plus {
                    report.min_c_plus = f.c_plus;
                    report.argmin_c_plus = x;
                }
                if f.c_minus < report.min_c_minus {
                    report.min_c_minus = f.c_minus;
                    report.argmin_c_minus = x;
                }
            }
            Err(_) => report.singular_points += 1,
        }
    }
    if report.singular_points == grid_points {
        return Err(Error::AllSingular);
    }
    report.positive = report.min_c_plus > 0.0 && report.min_c_minus > 0.0;
    Ok(report)
}

fn neutral_data(m: &MeshSolution) -> Result<(f64, f64)> {
    match m.spec() {
        Some(BoundarySpec::ChargeNeutral { c0, c1, .. }) => Ok((*c0, *c1)),
        _ => Err(Error::PreconditionFailed("needs a charge-neutral solution".into())),
    }
}

/// For charge-neutral data with `c₁ > c₀`, at least one flux constant is
/// positive. Returns whether that holds for `m`.
pub fn sign_lemma_check(m: &MeshSolution) -> Result<bool> {
    let (c0, c1) = neutral_data(m)?;
    if !(c1 > c0) {
        return Err(Error::PreconditionFailed(format!("sign lemma needs c1 > c0, got {c0} and {c1}")));
    }
    Ok(m.a_plus().max(m.a_minus()) > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurrentReport {
    /// `B` when `α₊ ≥ α₋`, `B⁻¹` otherwise.
    pub direction: TransformKind,
    /// `E A₊ ≥ 0` (resp. `E A₋ ≤ 0`) at every regular scan point.
    pub sign_condition: bool,
    pub source: PositivityReport,
    pub image: PositivityReport,
}

/// Checks that a current-free state is carried to a positive state by the
/// transform direction that opposes the more mobile species.
pub fn j_zero_transform_positivity(s: &SolutionState, grid_points: usize) -> Result<ZeroCurrentReport> {
    let j = current_density(s);
    if j.abs() >= ZERO_CURRENT_TOL {
        return Err(Error::PreconditionFailed(format!("needs j = 0, got {j:e}")));
    }
    let p = s.params();
    let up = p.alpha_plus >= p.alpha_minus;
    let (direction, image) = if up {
        (TransformKind::Backlund, backlund(s)?)
    } else {
        (TransformKind::BacklundInv, backlund_inv(s)?)
    };
    let sign_condition = closed_grid(grid_points).into_iter().filter_map(|x| s.eval(x).ok()).all(|f| {
        if up {
            f.e * s.a_plus() >= 0.0
        } else {
            f.e * s.a_minus() <= 0.0
        }
    });
    Ok(ZeroCurrentReport {
        direction,
        sign_condition,
        source: positivity_scan(s, grid_points)?,
        image: positivity_scan(&image, grid_points)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutralityDefect {
    /// `ĉ₊ − ĉ₋` of the Bäcklund image at `x = 0` and `x = 1`.
    pub left: f64,
    pub right: f64,
}

/// Neutrality tolerance for the source of [`bc_noninvariance_demo`].
pub const NEUTRALITY_TOL: f64 = 1e-8;

/// Shows that charge-neutral face conditions are not preserved by `B`.
pub fn bc_noninvariance_demo(s: &SolutionState) -> Result<NeutralityDefect> {
    for x in [0.0, 1.0] {
        let f = s.eval(x)?;
        if (f.c_plus - f.c_minus).abs() > NEUTRALITY_TOL {
            return Err(Error::PreconditionFailed(format!(
                "source is not neutral at x = {x}: c+ - c- = {:e}",
                f.c_plus - f.c_minus
            )));
        }
    }
    let image = backlund(s)?;
    let defect = |x: f64| image.eval(x).map(|f| f.c_plus - f.c_minus);
    Ok(NeutralityDefect { left: defect(0.0)?, right: defect(1.0)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::{solve, SolverConfig};
    use crate::exact::{planck_seed, rational_member, PlanckSeedParams};
    use crate::model::ModelParams;
    use crate::transforms::conjugate;

    fn fig1() -> (PlanckSeedParams, ModelParams) {
        (PlanckSeedParams { c0: 1.0 / 3.0, a: 1.0 / 3.0 }, ModelParams::from_lambda_squared(0.01, 0.5).unwrap())
    }

    fn neutral(lambda: f64, alpha_plus: f64, j0: f64) -> MeshSolution {
        let spec = BoundarySpec::ChargeNeutral { c0: 1.0 / 3.0, c1: 2.0 / 3.0, j0 };
        solve(&spec, &ModelParams::with_alpha_plus(lambda, alpha_plus).unwrap(), &SolverConfig::default()).unwrap()
    }

    #[test]
    fn planck_is_positive_with_minimum_at_origin() {
        let (p, m) = fig1();
        let r = positivity_scan(&planck_seed(p, m).unwrap(), 1001).unwrap();
        assert!(r.positive);
        assert!((r.min_c_plus - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.argmin_c_plus, 0.0);
    }

    #[test]
    fn positivity_flips_between_seven_and_eight() {
        let (p, m) = fig1();
        for grid in [251, 1001, 4001] {
            for n in -7..=7 {
                assert!(positivity_scan(&rational_member(p, m, n).unwrap(), grid).unwrap().positive, "n = {n}");
            }
            for n in [-8, 8] {
                assert!(!positivity_scan(&rational_member(p, m, n).unwrap(), grid).unwrap().positive);
            }
        }
    }

    #[test]
    fn conjugation_swaps_minima() {
        let (p, m) = fig1();
        let s = rational_member(p, m, 3).unwrap();
        let (a, b) = (positivity_scan(&s, 501).unwrap(), positivity_scan(&conjugate(&s).unwrap(), 501).unwrap());
        assert_eq!(a.min_c_plus, b.min_c_minus);
        assert_eq!(a.min_c_minus, b.min_c_plus);
        assert_eq!(a.positive, b.positive);
    }

    #[test]
    fn all_singular_is_an_error() {
        #[derive(Debug)]
        struct Nowhere;
        impl crate::model::FieldEvaluator for Nowhere {
            fn eval(&self, x: f64) -> Result<crate::FieldValues> {
                Err(Error::SingularEvaluation { x })
            }
        }
        let (_, m) = fig1();
        let s = SolutionState::new(std::sync::Arc::new(Nowhere), 0.0, 0.0, m, crate::Provenance::External);
        assert_eq!(positivity_scan(&s, 11), Err(Error::AllSingular));
    }

    #[test]
    fn sign_lemma_on_figure_three() {
        let left = neutral(0.7, 0.4, 0.16);
        assert!(left.a_plus() > 0.0 && left.a_minus() > 0.0);
        assert!(sign_lemma_check(&left).unwrap());
        let right = neutral(0.7, 0.4, 0.6);
        assert!(right.a_plus() < 0.0 && right.a_minus() > 0.0);
        assert!(sign_lemma_check(&right).unwrap());
        let zero = neutral(0.5, 0.8, 0.0);
        assert!(zero.a_plus() > 0.0 && zero.a_minus() > 0.0);
    }

    #[test]
    fn zero_current_directions() {
        let up = j_zero_transform_positivity(&neutral(0.5, 0.8, 0.0).to_state(), 1001).unwrap();
        assert_eq!(up.direction, TransformKind::Backlund);
        assert!(up.sign_condition && up.source.positive && up.image.positive);
        let down = j_zero_transform_positivity(&neutral(0.5, 0.4, 0.0).to_state(), 1001).unwrap();
        assert_eq!(down.direction, TransformKind::BacklundInv);
        assert!(down.sign_condition && down.image.positive);
        let sym = j_zero_transform_positivity(&neutral(0.5, 0.5, 0.0).to_state(), 1001).unwrap();
        assert!(sym.sign_condition && sym.image.positive);
        assert!(j_zero_transform_positivity(&neutral(0.7, 0.4, 0.16).to_state(), 101).is_err());
    }

    #[test]
    fn neutrality_is_lost_under_backlund() {
        let d = bc_noninvariance_demo(&neutral(0.5, 0.8, 0.0).to_state()).unwrap();
        assert!(d.left.abs() > 1e-3 && d.right.abs() > 1e-3);
        let (p, m) = fig1();
        let d = bc_noninvariance_demo(&planck_seed(p, m).unwrap()).unwrap();
        let expected = 2.0 * m.lambda2() * p.a * p.a / (p.c0 * p.c0);
        assert!((d.left - expected).abs() < 1e-14);
        let airy = crate::exact::airy_seed(
            crate::exact::AirySeedParams { c0: 1.0 / 3.0, a: 1.0 / 3.0, ai_coef: 0.0, bi_coef: 1.0 },
            m,
        )
        .unwrap();
        assert!(bc_noninvariance_demo(&airy).is_err());
    }

    #[test]
    fn zero_flux_source_has_no_defect() {
        let (_, m) = fig1();
        let flat = planck_seed(PlanckSeedParams { c0: 0.5, a: 0.0 }, m).unwrap();
        let d = bc_noninvariance_demo(&flat).unwrap();
        assert_eq!((d.left, d.right), (0.0, 0.0));
    }
}
