//! Brute-force oracles and random problems for the convex kernel.

use backcom_noma::kernel::{ConcaveProgram, LogConstraint, LogSumProblem, LogTerm};
use rand::Rng;

use super::log_uniform;

/// Smallest `eta_last` meeting the rate given the other variables, if any.
fn last_needed(p: &LogSumProblem, fixed: &[f64]) -> Option<f64> {
    let n = p.coeffs.len();
    let got: f64 = fixed.iter().zip(&p.coeffs).map(|(e, a)| (a * e).ln_1p()).sum();
    let need = ((p.required_rate - got).max(0.0).exp() - 1.0) / p.coeffs[n - 1];
    (need <= p.caps[n - 1]).then_some(need)
}

fn axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect()
}

/// Grid search over all but the last variable, which is solved exactly;
/// refined once on a 100x finer local grid.
pub fn grid_min_sum(p: &LogSumProblem) -> Option<f64> {
    let n = p.coeffs.len();
    // Solve the steepest variable exactly; gridding it amplifies the step.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| p.coeffs[i].total_cmp(&p.coeffs[j]));
    let p = &LogSumProblem::new(
        order.iter().map(|&i| p.coeffs[i]).collect(),
        order.iter().map(|&i| p.caps[i]).collect(),
        p.required_rate,
    )
    .unwrap();
    assert!((2..=3).contains(&n));
    let coarse = if n == 2 { 2000 } else { 200 };
    let search = |ranges: &[(f64, f64)], steps: usize| -> Option<(f64, Vec<f64>)> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        let axes: Vec<Vec<f64>> = ranges.iter().map(|&(lo, hi)| axis(lo, hi, steps)).collect();
        let mut visit = |pt: Vec<f64>| {
            if let Some(last) = last_needed(p, &pt) {
                let total = pt.iter().sum::<f64>() + last;
                if best.as_ref().is_none_or(|b| total < b.0) {
                    best = Some((total, pt));
                }
            }
        };
        if n == 2 {
            for &x in &axes[0] {
                visit(vec![x]);
            }
        } else {
            for &x in &axes[0] {
                for &y in &axes[1] {
                    visit(vec![x, y]);
                }
            }
        }
        best
    };
    let full: Vec<(f64, f64)> = p.caps[..n - 1].iter().map(|&c| (0.0, c)).collect();
    let (coarse_best, at) = search(&full, coarse)?;
    let local: Vec<(f64, f64)> = at
        .iter()
        .zip(&p.caps)
        .map(|(&x, &c)| {
            let h = 2.0 * c / coarse as f64;
            ((x - h).max(0.0), (x + h).min(c))
        })
        .collect();
    let fine = search(&local, 400).map_or(coarse_best, |f| f.0);
    Some(fine.min(coarse_best))
}

pub fn random_problem<R: Rng>(rng: &mut R, n: usize) -> LogSumProblem {
    let coeffs: Vec<f64> = (0..n).map(|_| log_uniform(rng, 0.1, 100.0)).collect();
    let caps: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..=1.0)).collect();
    let sat: f64 = coeffs.iter().zip(&caps).map(|(a, c)| (a * c).ln_1p()).sum();
    let rho = sat * rng.random_range(0.05..0.95);
    LogSumProblem::new(coeffs, caps, rho).unwrap()
}

pub fn as_program(p: &LogSumProblem) -> ConcaveProgram {
    let n = p.coeffs.len();
    let mut prog = ConcaveProgram::new(vec![1.0; n]);
    let terms = (0..n)
        .map(|i| {
            let mut w = vec![0.0; n];
            w[i] = p.coeffs[i];
            LogTerm {
                constant: 1.0,
                weights: w,
            }
        })
        .collect();
    prog.add_log_constraint(LogConstraint {
        terms,
        affine: vec![0.0; n],
        offset: 0.0,
        rate: p.required_rate,
    })
    .unwrap();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        prog.add_linear(e, p.caps[i]).unwrap();
    }
    prog
}

/// Random program with a few log constraints and a budget row, together
/// with a strictly feasible point.
pub fn random_program<R: Rng>(rng: &mut R) -> (ConcaveProgram, Vec<f64>) {
    let n = rng.random_range(1..=5);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
    let mut prog = ConcaveProgram::new((0..n).map(|_| rng.random_range(0.1..2.0)).collect());
    for _ in 0..rng.random_range(1..=3) {
        let terms: Vec<LogTerm> = (0..rng.random_range(1..=3))
            .map(|_| LogTerm {
                constant: rng.random_range(0.5..2.0),
                weights: (0..n)
                    .map(|_| {
                        if rng.random_bool(0.6) {
                            rng.random_range(0.0..3.0)
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            })
            .collect();
        let affine: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.5)).collect();
        let mut c = LogConstraint {
            terms,
            affine,
            offset: rng.random_range(-0.2..0.2),
            rate: 0.0,
        };
        let slack = c.slack(&x).unwrap();
        c.rate = slack - rng.random_range(0.05..0.5);
        prog.add_log_constraint(c).unwrap();
    }
    let row: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let used: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
    prog.add_linear(row, used + 1.0).unwrap();
    (prog, x)
}

/// Relative errors `(gradient, hessian)` of the barrier derivatives at `x`
/// against central differences with step `1e-6`, each scaled by
/// `max(norm, 1)`.
pub fn fd_errors(prog: &ConcaveProgram, t: f64, x: &[f64]) -> (f64, f64) {
    let e = prog.barrier_eval(t, x).expect("point inside the domain");
    let n = x.len();
    let h = 1e-6;
    let mut g_err = 0.0;
    let mut h_err = 0.0;
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let ep = prog.barrier_eval(t, &xp).unwrap();
        let em = prog.barrier_eval(t, &xm).unwrap();
        g_err += ((ep.value - em.value) / (2.0 * h) - e.gradient[j]).powi(2);
        for i in 0..n {
            h_err += ((ep.gradient[i] - em.gradient[i]) / (2.0 * h) - e.hessian[(i, j)]).powi(2);
        }
    }
    (
        g_err.sqrt() / e.gradient.norm().max(1.0),
        h_err.sqrt() / e.hessian.norm().max(1.0),
    )
}
