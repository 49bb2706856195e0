mod common;

use approx::assert_relative_eq;
use backcom_noma::kernel::*;
use backcom_noma::Error;
use common::kernel::{as_program, fd_errors, grid_min_sum, random_problem, random_program};
use common::{log_uniform, rng};
use proptest::prelude::*;

#[test]
fn waterfill_symmetric_example() {
    let p = LogSumProblem::new(vec![3.0, 3.0], vec![1.0, 1.0], 4f64.ln()).unwrap();
    let s = waterfill_min_sum(&p).unwrap();
    assert_relative_eq!(s.eta[0], 1.0 / 3.0, epsilon = 1e-12);
    assert_relative_eq!(s.eta[1], 1.0 / 3.0, epsilon = 1e-12);
    let g = grid_min_sum(&p).unwrap();
    assert!((g - 2.0 / 3.0).abs() < 1e-4, "grid {g}");
}

#[test]
fn waterfill_infeasible_and_trivial() {
    let p = LogSumProblem::new(vec![10.0], vec![1.0], 20f64.ln()).unwrap();
    assert!(matches!(waterfill_min_sum(&p), Err(Error::Infeasible)));
    let p = LogSumProblem::new(vec![2.0, 5.0], vec![1.0, 0.5], 0.0).unwrap();
    let s = waterfill_min_sum(&p).unwrap();
    assert_eq!(s.eta, vec![0.0, 0.0]);
    assert_eq!(s.iterations, 0);
}

#[test]
fn waterfill_matches_grid_search() {
    let mut r = rng(1);
    for k in 0..100 {
        let p = random_problem(&mut r, 2 + k % 2);
        let wf = waterfill_min_sum(&p).unwrap();
        let g = grid_min_sum(&p).unwrap();
        assert!(
            wf.total() <= g + 1e-9,
            "waterfill {} above grid {g} on {p:?}",
            wf.total()
        );
        assert!(
            (wf.total() - g).abs() <= 1e-4,
            "waterfill {} vs grid {g} on {p:?}",
            wf.total()
        );
    }
}

#[test]
fn waterfill_matches_barrier() {
    let mut r = rng(2);
    for k in 0..60 {
        let p = random_problem(&mut r, 1 + k % 5);
        let wf = waterfill_min_sum(&p).unwrap();
        let x0: Vec<f64> = p.caps.iter().map(|c| 0.999 * c).collect();
        let b = barrier_solve(&as_program(&p), &x0, &BarrierOptions::default()).unwrap();
        assert!(
            (wf.total() - b.objective).abs() <= 1e-5,
            "waterfill {} barrier {}",
            wf.total(),
            b.objective
        );
    }
}

#[test]
fn barrier_derivatives_match_finite_differences() {
    let mut r = rng(3);
    for _ in 0..50 {
        let (prog, x) = random_program(&mut r);
        let t = log_uniform(&mut r, 0.1, 100.0);
        let e = prog.barrier_eval(t, &x).expect("point inside the domain");
        let (g_err, h_err) = fd_errors(&prog, t, &x);
        assert!(g_err <= 1e-4, "relative gradient error {g_err}");
        assert!(h_err <= 1e-4, "relative hessian error {h_err}");
        let h_norm = e.hessian.norm();
        assert_relative_eq!(
            e.hessian.clone(),
            e.hessian.transpose(),
            epsilon = 1e-12 * h_norm.max(1.0)
        );
    }
}

#[test]
fn barrier_reaches_lp_optimum() {
    let mut prog = ConcaveProgram::new(vec![1.0]);
    prog.add_linear(vec![-1.0], -0.5).unwrap();
    let s = barrier_solve(&prog, &[2.0], &BarrierOptions::default()).unwrap();
    assert!((s.objective - 0.5).abs() < 1e-6);
}

#[test]
fn barrier_accuracy_improves_with_tolerance() {
    let p = LogSumProblem::new(vec![3.0, 1.0, 0.5], vec![1.0; 3], 1.0).unwrap();
    let prog = as_program(&p);
    let mut last = f64::INFINITY;
    for tol in [1e-2, 1e-4, 1e-6] {
        let opts = BarrierOptions {
            tol,
            ..Default::default()
        };
        let s = barrier_solve(&prog, &[0.9; 3], &opts).unwrap();
        assert!(s.objective <= last + 1e-12);
        assert!(s.gap <= tol * 1.0001);
        last = s.objective;
    }
}

#[test]
fn phase_one_examples() {
    let opts = BarrierOptions::default();
    // Admits a large point.
    let p = LogSumProblem::new(vec![2.0, 2.0], vec![5.0, 5.0], 1.0).unwrap();
    let prog = as_program(&p);
    let (x, _) = phase_one(&prog, &[0.0, 0.0], &opts).unwrap();
    assert!(prog.is_strictly_feasible(&x));
    // Contradictory linear rows.
    let mut bad = ConcaveProgram::new(vec![1.0]);
    bad.add_linear(vec![1.0], 1.0).unwrap();
    bad.add_linear(vec![-1.0], -2.0).unwrap();
    assert!(matches!(phase_one(&bad, &[0.5], &opts), Err(Error::Infeasible)));
    // Rate out of reach under small caps.
    let p = LogSumProblem::new(vec![1.0, 1.0], vec![0.1, 0.1], 50.0).unwrap();
    assert!(matches!(
        barrier_solve(&as_program(&p), &[0.05, 0.05], &opts),
        Err(Error::Infeasible)
    ));
}

proptest! {
    #[test]
    fn waterfill_is_tight_unless_saturated(
        coeffs in prop::collection::vec(0.01f64..1e3, 1..6),
        cap_seed in prop::collection::vec(0.05f64..=1.0, 6),
        frac in 0.0f64..1.2,
    ) {
        let caps = cap_seed[..coeffs.len()].to_vec();
        let p0 = LogSumProblem::new(coeffs.clone(), caps.clone(), 0.0).unwrap();
        let rho = frac * p0.saturated_rate();
        let p = LogSumProblem::new(coeffs, caps, rho).unwrap();
        match waterfill_min_sum(&p) {
            Ok(s) => {
                prop_assert!(s.rate >= rho - 1e-12);
                let saturated = s.eta.iter().zip(&p.caps).all(|(e, c)| (e - c).abs() <= 1e-12);
                if !saturated {
                    prop_assert!((s.rate - rho).abs() <= 1e-9, "rate {} vs {}", s.rate, rho);
                }
                for (e, c) in s.eta.iter().zip(&p.caps) {
                    prop_assert!(*e >= 0.0 && *e <= *c);
                }
            }
            Err(Error::Infeasible) => prop_assert!(frac > 1.0),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn larger_slopes_never_cost_more(
        coeffs in prop::collection::vec(0.01f64..1e3, 1..6),
        which in 0usize..6,
        factor in 1.0f64..10.0,
        frac in 0.0f64..1.0,
    ) {
        let n = coeffs.len();
        let caps = vec![1.0; n];
        let rho = frac * LogSumProblem::new(coeffs.clone(), caps.clone(), 0.0).unwrap().saturated_rate();
        let base = waterfill_min_sum(&LogSumProblem::new(coeffs.clone(), caps.clone(), rho).unwrap()).unwrap();
        let mut more = coeffs;
        more[which % n] *= factor;
        let better = waterfill_min_sum(&LogSumProblem::new(more, caps, rho).unwrap()).unwrap();
        prop_assert!(better.total() <= base.total() * (1.0 + 1e-12) + 1e-15);
    }
}
