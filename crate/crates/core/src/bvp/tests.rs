// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::model::{interior_points, invariants_of, max_residual, painleve_residual, system_residual};

fn neutral(j0: f64) -> BoundarySpec {
    BoundarySpec::ChargeNeutral { c0: 1.0 / 3.0, c1: 2.0 / 3.0, j0 }
}

fn params(lambda: f64, alpha_plus: f64) -> ModelParams {
    ModelParams::with_alpha_plus(lambda, alpha_plus).unwrap()
}

#[test]
fn spec_validation() {
    assert!(neutral(0.0).validate().unwrap());
    assert!(!BoundarySpec::ChargeNeutral { c0: 0.2, c1: 0.5, j0: 0.0 }.validate().unwrap());
    assert!(BoundarySpec::ChargeNeutral { c0: 0.6, c1: 0.4, j0: 0.0 }.validate().is_err());
    assert!(BoundarySpec::ChargeNeutral { c0: 0.0, c1: 0.4, j0: 0.0 }.validate().is_err());
    assert!(BoundarySpec::Radiation { c_minus_inf: 0.2, c_plus_inf: 0.5, j0: 0.0 }.validate().is_err());
    assert!(BoundarySpec::ExactReservoir { c_minus_inf: 0.25, c_plus_inf: 0.75, j0: 0.0 }.validate().is_ok());
    assert!(SolverConfig { mesh_size: 8, ..Default::default() }.validate().is_err());
}

#[test]
fn jacobian_matches_finite_differences() {
    let specs = [
        neutral(0.1),
        BoundarySpec::Radiation { c_minus_inf: 0.3, c_plus_inf: 0.7, j0: 0.2 },
        BoundarySpec::ExactReservoir { c_minus_inf: 0.3, c_plus_inf: 0.7, j0: -0.1 },
    ];
    for spec in specs {
        let problem = Problem::new(spec, params(0.6, 0.3), 16);
        let mut y = problem.initial_guess();
        for (i, v) in y.iter_mut().enumerate() {
            *v += 0.01 * ((i * 7 % 11) as f64 - 5.0);
        }
        let jac = problem.jacobian(&y);
        let h = 1e-7;
        for col in 0..problem.unknowns() {
            let (mut hi, mut lo) = (y.clone(), y.clone());
            hi[col] += h;
            lo[col] -= h;
            let (rh, rl) = (problem.residual(&hi), problem.residual(&lo));
            for row in 0..problem.unknowns() {
                let fd = (rh[row] - rl[row]) / (2.0 * h);
                let exact = jac.get(row, col);
                assert!((fd - exact).abs() < 1e-6, "{} ({row}, {col}): {fd} vs {exact}", spec.family());
            }
        }
    }
}

#[test]
fn planck_data_gives_planck_solution() {
    // Equal mobilities with zero current: the zero-field Planck profile.
    let m = solve(&neutral(0.0), &params(0.5, 0.5), &SolverConfig::default()).unwrap();
    let emax = m.e().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    assert!(emax < 1e-9, "{emax}");
    assert!((m.a_plus() - 1.0 / 3.0).abs() < 1e-9 && (m.a_minus() - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn converged_solution_is_self_consistent() {
    let cfg = SolverConfig::default();
    let m = solve(&neutral(0.0), &params(0.5, 0.8), &cfg).unwrap();
    let d = m.diagnostics().unwrap();
    assert!(d.converged && d.residual_norm <= cfg.tol);
    assert!(collocation_residual(&m).unwrap() <= cfg.tol);
    let s = m.to_state();
    for k in (10..m.mesh().len() - 10).step_by(39) {
        let r = system_residual(&s, m.mesh()[k], 1e-5).unwrap();
        assert!(max_residual(&r) < 10.0 * cfg.tol, "node {k}: {r:?}");
    }
    for x in interior_points(11) {
        assert!(painleve_residual(&s, x, 1e-4).unwrap().abs() < 1e-5);
    }
    let p = m.first_integral();
    let spread = p.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - p.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(spread < 1e-8, "{spread}");
    let (l, r) = neumann_check(&m);
    assert!(l.abs() < 1e-9 && r.abs() < 1e-9);
    let inv = invariants_of(&s).unwrap();
    assert!((inv.theta - (m.a_plus() + m.a_minus())).abs() < 1e-15);
}

#[test]
fn figure_two_values() {
    let cfg = SolverConfig::default();
    let m = solve(&neutral(0.0), &params(0.5, 0.8), &cfg).unwrap();
    let last = m.mesh().len() - 1;
    assert!((m.e()[0] / 3.0 - 0.14706).abs() < 1e-4);
    assert!((2.0 * m.e()[last] / 3.0 - 0.25091).abs() < 1e-4);
    assert_eq!(m.field_monotonicity(), Monotonicity::StrictlyDecreasing);
    let m = solve(&neutral(0.0), &params(0.5, 0.4), &cfg).unwrap();
    assert!((m.e()[0] / 3.0 + 0.048595).abs() < 1e-5);
    assert!((2.0 * m.e()[last] / 3.0 + 0.082888).abs() < 1e-5);
    assert_eq!(m.field_monotonicity(), Monotonicity::StrictlyIncreasing);
}

#[test]
fn mesh_refinement_changes_little() {
    let p = params(0.5, 0.8);
    let coarse = solve(&neutral(0.0), &p, &SolverConfig::default()).unwrap();
    let fine = solve(&neutral(0.0), &p, &SolverConfig { mesh_size: 800, ..Default::default() }).unwrap();
    assert!((coarse.e()[0] - fine.e()[0]).abs() < 1e-6);
}

#[test]
fn radiation_solution_satisfies_its_conditions() {
    let spec = BoundarySpec::Radiation { c_minus_inf: 1.0 / 3.0, c_plus_inf: 2.0 / 3.0, j0: 0.16 };
    let m = solve(&spec, &params(0.7, 0.4), &SolverConfig::default()).unwrap();
    let last = m.mesh().len() - 1;
    assert!((m.c_plus()[0] + m.c_minus()[0] - 2.0 / 3.0).abs() < 1e-9);
    assert!((m.c_plus()[last] + m.c_minus()[last] - 4.0 / 3.0).abs() < 1e-9);
    let (l, r) = radiation_check(&m, 1.0 / 3.0, 2.0 / 3.0);
    assert!(l.abs() < 1e-8 && r.abs() < 1e-8, "{l} {r}");
    let (nl, _) = neumann_check(&m);
    assert!(nl.abs() > 1e-3);
    let full = assemble_full_domain(&m, -8.0, 9.0, 101).unwrap();
    assert!(full.jumps.iter().all(|j| *j < 1e-8));
    let (far_left, far_right) = (full.left[0], full.right[100]);
    assert!((far_left.c_plus - 1.0 / 3.0).abs() < 1e-4 && far_left.e.abs() < 1e-4);
    assert!((far_right.c_minus - 2.0 / 3.0).abs() < 1e-4 && far_right.e.abs() < 1e-4);
}

#[test]
fn exact_reservoir_solution_assembles() {
    let spec = BoundarySpec::ExactReservoir { c_minus_inf: 1.0 / 3.0, c_plus_inf: 2.0 / 3.0, j0: 0.16 };
    let m = solve(&spec, &params(0.7, 0.4), &SolverConfig::default()).unwrap();
    let last = m.mesh().len() - 1;
    assert!((m.c_plus()[0] * m.c_minus()[0] - 1.0 / 9.0).abs() < 1e-9);
    assert!((m.c_plus()[last] * m.c_minus()[last] - 4.0 / 9.0).abs() < 1e-9);
    let full = assemble_full_domain(&m, -1.0, 2.0, 51).unwrap();
    assert!(full.jumps.iter().all(|j| *j < 1e-8));
}

#[test]
fn flat_interfaces_give_flat_reservoirs() {
    let spec = BoundarySpec::Radiation { c_minus_inf: 0.5, c_plus_inf: 0.5, j0: 0.0 };
    let m = solve(&spec, &params(0.7, 0.5), &SolverConfig::default()).unwrap();
    let full = assemble_full_domain(&m, -2.0, 3.0, 11).unwrap();
    for p in full.left.iter().chain(&full.right) {
        assert!((p.c_plus - 0.5).abs() < 1e-12 && p.e.abs() < 1e-12);
    }
}

#[test]
fn charge_neutral_cannot_be_assembled() {
    let m = solve(&neutral(0.0), &params(0.5, 0.8), &SolverConfig::default()).unwrap();
    assert!(matches!(assemble_full_domain(&m, -1.0, 2.0, 11), Err(Error::PreconditionFailed(_))));
}

#[test]
fn non_convergence_returns_last_iterate() {
    let cfg = SolverConfig { max_iter: 1, continuation: false, ..Default::default() };
    match solve(&neutral(0.0), &params(0.3, 0.8), &cfg) {
        Err(SolveError::NonConvergence { diagnostics, last }) => {
            assert!(!diagnostics.converged);
            assert_eq!(last.mesh().len(), cfg.mesh_size + 1);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn resolve_from_previous_solution() {
    let p = params(0.5, 0.8);
    let coarse = solve(&neutral(0.0), &p, &SolverConfig { mesh_size: 64, ..Default::default() }).unwrap();
    let fine = solve_from(&neutral(0.0), &p, &SolverConfig::default(), &coarse).unwrap();
    assert!(fine.diagnostics().unwrap().iterations <= 4);
}

#[test]
fn mesh_interpolation_reproduces_nodes() {
    let m = solve(&neutral(0.0), &params(0.5, 0.8), &SolverConfig { mesh_size: 32, ..Default::default() }).unwrap();
    for (k, &x) in m.mesh().iter().enumerate() {
        assert_eq!(m.eval(x).unwrap(), m.node(k));
    }
    assert!(m.eval(1.5).is_err());
}
