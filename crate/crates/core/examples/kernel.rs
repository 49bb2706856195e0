//! The two convex kernels: water-filling for the single-constraint
//! reflection subproblem, and the log-barrier method for general programs
//! with `sum ln(c + w.x) >= rate` constraints. Both solve the same problem
//! here.

use backcom_noma::kernel::{
    barrier_solve, waterfill_min_sum, BarrierOptions, ConcaveProgram, LogConstraint, LogSumProblem, LogTerm,
};

fn main() -> backcom_noma::Result<()> {
    let coeffs = vec![3.0, 1.5, 0.4];
    let caps = vec![1.0, 1.0, 1.0];
    let rate = 1.2;

    let wf = waterfill_min_sum(&LogSumProblem::new(coeffs.clone(), caps.clone(), rate)?)?;
    println!(
        "water-filling: eta = {:?}, sum {:.8}, level {:.6}, {} bisection steps",
        wf.eta,
        wf.total(),
        wf.water_level,
        wf.iterations
    );

    let n = coeffs.len();
    let mut prog = ConcaveProgram::new(vec![1.0; n]);
    let terms = coeffs
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut w = vec![0.0; n];
            w[i] = a;
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
        rate,
    })?;
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        prog.add_linear(e, caps[i])?;
    }
    let sol = barrier_solve(&prog, &[0.5; 3], &BarrierOptions::default())?;
    println!(
        "barrier:       x = {:.6?}, sum {:.8}, {} Newton steps, gap {:.1e}",
        sol.x,
        sol.objective,
        sol.total_newton_steps(),
        sol.gap
    );
    Ok(())
}
