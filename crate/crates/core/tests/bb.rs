mod common;

use std::f64::consts::LN_2;

use backcom_noma::bb::{bb_solve, rect_bounds, sca_feasibility, sra_feasibility, BbConfig, FeasMode, Rect};
use backcom_noma::model::{is_feasible, oma_profile, oma_total, total_power, DEFAULT_RATE_TOL};
use backcom_noma::sca::{sca_solve, ScaOptions};
use backcom_noma::two_user::{solve_two_user, TwoUserInstance};
use backcom_noma::{Error, OracleStats, PowerProfile, SolveStatus, SystemInstance};
use common::{clustered, random_two_user, rng, tri};

fn reference() -> SystemInstance {
    SystemInstance::new(tri(&[&[4.0], &[1.0, 1.0]]), LN_2).unwrap()
}

#[test]
fn rect_bounds_examples() {
    let inst = reference();
    let mut stats = OracleStats::default();
    let unit = Rect::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let b = rect_bounds(&inst, &unit, FeasMode::Sra, 7.0, &mut stats).unwrap();
    assert_eq!((b.lower, b.upper), (0.0, 2.0));
    assert!(b.witness.is_some());

    let tiny = Rect::new(vec![0.0, 0.0], vec![1e-3, 1e-3]).unwrap();
    let b = rect_bounds(&inst, &tiny, FeasMode::Sra, 7.0, &mut stats).unwrap();
    assert_eq!((b.lower, b.upper), (7.0, 7.0));
    assert!(b.witness.is_none());

    let p = oma_profile(&inst).diagonal();
    let point = Rect::new(p.clone(), p.clone()).unwrap();
    let b = rect_bounds(&inst, &point, FeasMode::Sca, 7.0, &mut stats).unwrap();
    assert_eq!(b.lower, b.upper);
    assert_eq!(b.upper, p.iter().sum::<f64>());
}

#[test]
fn oma_vertex_needs_no_reflection() {
    for seed in 0..5 {
        let inst = clustered(2 + seed as usize, 5.0, 15.0, 2.0, seed);
        let p = oma_profile(&inst).diagonal();
        for eta in [
            sra_feasibility(&inst, &p, &mut OracleStats::default()).unwrap(),
            sca_feasibility(&inst, &p, &mut OracleStats::default()).unwrap(),
        ] {
            assert!(eta.packed().iter().all(|&e| e == 0.0), "{eta:?}");
        }
    }
}

#[test]
fn zero_power_is_infeasible() {
    let inst = clustered(3, 5.0, 15.0, 1.0, 3);
    let mut stats = OracleStats::default();
    assert!(matches!(
        sra_feasibility(&inst, &[0.0; 3], &mut stats),
        Err(Error::Infeasible)
    ));
    assert!(matches!(
        sca_feasibility(&inst, &[0.0; 3], &mut stats),
        Err(Error::Infeasible)
    ));
}

#[test]
fn sra_full_reflection_example() {
    let inst = reference();
    let cf = solve_two_user(&TwoUserInstance::from_system(&inst).unwrap()).unwrap();
    let p = cf.report.profile.diagonal();
    let q = 2f64.sqrt() - 1.0;
    assert!((p[0] - q).abs() < 1e-9 && (p[1] - q).abs() < 1e-9, "{p:?}");
    // a hair above the corner so the rate constraints hold with margin
    let pd = [q * (1.0 + 1e-9), q * (1.0 + 1e-9)];
    let eta = sra_feasibility(&inst, &pd, &mut OracleStats::default()).unwrap();
    assert!((eta[(1, 0)] - 1.0).abs() < 1e-6, "{eta:?}");
    let prof = PowerProfile::from_reflection(&pd, &eta).unwrap();
    assert!(is_feasible(&inst, &prof, DEFAULT_RATE_TOL));
}

#[test]
fn sca_feasibility_accepts_sra_zero_witnesses() {
    let mut accepted = 0;
    for seed in 0..30 {
        let inst = clustered(3, 5.0, 15.0, 1.0 + (seed % 4) as f64, seed);
        let p: Vec<f64> = oma_profile(&inst).diagonal().iter().map(|x| x * 1.3).collect();
        if let Ok(eta) = sra_feasibility(&inst, &p, &mut OracleStats::default()) {
            if eta.packed().iter().all(|&e| e == 0.0) {
                accepted += 1;
                assert!(sca_feasibility(&inst, &p, &mut OracleStats::default()).is_ok());
            }
        }
    }
    assert!(accepted > 0);
}

#[test]
fn reference_instance() {
    let inst = reference();
    let cfg = BbConfig {
        xi: Some(1e-3),
        ..Default::default()
    };
    for mode in [FeasMode::Sra, FeasMode::Sca] {
        let sol = bb_solve(&inst, &BbConfig { feas_mode: mode, ..cfg }).unwrap();
        assert_eq!(sol.report.status, SolveStatus::Converged);
        assert!(
            (sol.report.objective - 0.828427).abs() <= 1e-3 + 1e-6,
            "{mode}: {}",
            sol.report.objective
        );
    }
}

#[test]
fn zero_budget_returns_initial_bounds() {
    let inst = clustered(3, 5.0, 15.0, 2.0, 1);
    let sol = bb_solve(
        &inst,
        &BbConfig {
            n_max: 0,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(sol.report.status, SolveStatus::IterLimit);
    assert_eq!(sol.report.iterations, 0);
    assert_eq!(sol.report.lower_bound, 0.0);
    assert_eq!(sol.trace.len(), 1);
}

#[test]
fn invalid_config() {
    let inst = reference();
    assert!(bb_solve(
        &inst,
        &BbConfig {
            xi: Some(0.0),
            ..Default::default()
        }
    )
    .is_err());
    assert!(bb_solve(
        &inst,
        &BbConfig {
            initial_box_scale: 0.5,
            ..Default::default()
        }
    )
    .is_err());
}

#[test]
fn pruning_does_not_change_the_incumbent() {
    for seed in 0..6 {
        let m = 2 + (seed as usize % 2);
        let inst = clustered(m, 5.0, 15.0, 1.0 + (seed % 3) as f64, seed);
        let base = BbConfig {
            n_max: 200,
            ..Default::default()
        };
        let a = bb_solve(&inst, &base).unwrap();
        let b = bb_solve(&inst, &BbConfig { prune: false, ..base }).unwrap();
        assert!((a.report.objective - b.report.objective).abs() <= 1e-12, "seed {seed}");
    }
}

#[test]
fn bounds_are_monotone_and_witness_is_feasible() {
    for seed in 0..8 {
        let m = 2 + (seed as usize % 3);
        let inst = clustered(m, 5.0, 15.0, 1.0 + (seed % 4) as f64, seed);
        let sol = bb_solve(
            &inst,
            &BbConfig {
                n_max: 300,
                ..Default::default()
            },
        )
        .unwrap();
        for w in sol.trace.windows(2) {
            assert!(w[1].upper <= w[0].upper);
            assert!(w[1].lower >= w[0].lower);
            assert!(w[1].lower <= w[1].upper);
        }
        let r = &sol.report;
        assert!(is_feasible(&inst, &r.profile, DEFAULT_RATE_TOL));
        assert_eq!(total_power(&r.profile), r.objective);
        assert_eq!(r.stats.rejected_witnesses, 0);
        assert!(r.objective <= oma_total(&inst) + 1e-12);
    }
}

#[test]
fn two_user_agreement_and_sandwich() {
    let mut r = rng(21);
    for k in 0..40 {
        let t = random_two_user(&mut r, k % 2 == 0);
        let inst = t.to_system();
        let cf = solve_two_user(&TwoUserInstance::from_system(&inst).unwrap())
            .unwrap()
            .report
            .objective;
        let sol = bb_solve(&inst, &BbConfig::default()).unwrap();
        let rep = &sol.report;
        assert_eq!(rep.status, SolveStatus::Converged, "{t:?}");
        assert!(rep.lower_bound <= cf + 1e-9 && cf <= rep.objective + 1e-9, "{t:?}");
        assert!(
            (rep.objective - cf).abs() <= sol.xi + 1e-6,
            "{t:?}: {} vs {cf}",
            rep.objective
        );
    }
}

#[test]
fn near_far_pair() {
    let t = TwoUserInstance::new(446.25, 3132.93, 473.93, 1.0).unwrap();
    let cf = solve_two_user(&t).unwrap().report.objective;
    let sol = bb_solve(&t.to_system(), &BbConfig::default()).unwrap();
    assert!(
        (sol.report.objective - cf).abs() <= sol.xi + 1e-6,
        "{} vs {cf}",
        sol.report.objective
    );
}

#[test]
fn sca_never_beats_the_lower_bound() {
    let mut checked = 0;
    for seed in 0..6 {
        let inst = clustered(3, 5.0, 15.0, 1.0 + (seed % 3) as f64, seed);
        let sol = bb_solve(&inst, &BbConfig::default()).unwrap();
        if sol.report.status != SolveStatus::Converged {
            continue;
        }
        checked += 1;
        let sca = sca_solve(&inst, &oma_profile(&inst), &ScaOptions::default()).unwrap();
        assert!(sca.objective >= sol.report.lower_bound - sol.xi, "seed {seed}");
    }
    assert!(checked >= 3);
}

#[test]
fn sra_is_cheaper_per_call_than_sca_feasibility() {
    let (mut sra, mut sca) = (OracleStats::default(), OracleStats::default());
    for seed in 0..5 {
        let inst = clustered(3, 5.0, 15.0, 2.0, seed);
        let base = BbConfig {
            n_max: 100,
            ..Default::default()
        };
        sra.merge(bb_solve(&inst, &base).unwrap().report.stats);
        sca.merge(
            bb_solve(
                &inst,
                &BbConfig {
                    feas_mode: FeasMode::Sca,
                    ..base
                },
            )
            .unwrap()
            .report
            .stats,
        );
    }
    let per = |s: OracleStats| s.work as f64 / s.calls as f64;
    assert!(per(sra) < per(sca), "sra {} vs sca {}", per(sra), per(sca));
}
