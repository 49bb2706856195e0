//! Successive convex approximation for any number of users.
//!
//! User `m`'s rate in slot `i` is a difference of concave functions,
//!
//! ```text
//! ln(1 + sum_{j >= m} g_ji P_ji) - I_mi,    I_mi = ln(1 + sum_{j > m} g_ji P_ji).
//! ```
//!
//! Replacing `I_mi` by its tangent at the previous iterate over-estimates it,
//! so every subproblem is convex and its feasible set lies inside the true
//! one. Each iterate is therefore feasible, and since the previous iterate is
//! feasible for the next subproblem the objective never increases.

use std::io::Write;

use log::debug;

use crate::error::{Error, Result};
use crate::kernel::{barrier_solve, BarrierOptions, ConcaveProgram, LogConstraint, LogTerm};
use crate::model::{
    is_feasible, oma_profile, total_power, OracleStats, PowerProfile, SolveReport, SolveStatus, SystemInstance,
    DEFAULT_RATE_TOL,
};
use crate::tri::TriMatrix;

/// Tangent of `I_mi` at a reference profile: `I_mi(p) <= sum_j u[j] P_ji + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    /// Coefficient of `P_ji`, indexed by user `j` (zero for `j <= m`).
    pub u: Vec<f64>,
    pub b: f64,
    pub slot: usize,
}

impl Linearization {
    pub fn eval(&self, p: &PowerProfile) -> f64 {
        self.u
            .iter()
            .enumerate()
            .filter(|(_, u)| **u != 0.0)
            .map(|(j, u)| u * p.get(j, self.slot))
            .sum::<f64>()
            + self.b
    }
}

/// `I_mi = ln(1 + sum_{j > m} g_ji P_ji)`.
pub fn interference(inst: &SystemInstance, p: &PowerProfile, m: usize, i: usize) -> f64 {
    (m + 1..inst.num_users())
        .map(|j| inst.gamma(j, i) * p.get(j, i))
        .sum::<f64>()
        .ln_1p()
}

pub fn linearize_interference(
    inst: &SystemInstance,
    p_prev: &PowerProfile,
    m: usize,
    i: usize,
) -> Result<Linearization> {
    let n = inst.num_users();
    if m + 1 >= n || i > m || p_prev.num_users() != n {
        return Err(Error::IndexOutOfRange {
            user: m,
            slot: i,
            num_users: n,
        });
    }
    let x: f64 = (m + 1..n).map(|j| inst.gamma(j, i) * p_prev.get(j, i)).sum();
    let mut u = vec![0.0; n];
    for (j, uj) in u.iter_mut().enumerate().skip(m + 1) {
        *uj = inst.gamma(j, i) / (x + 1.0);
    }
    Ok(Linearization {
        u,
        b: x.ln_1p() - x / (x + 1.0),
        slot: i,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaOptions {
    /// Stop when the relative objective decrease falls below this.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub barrier: BarrierOptions,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-5,
            max_iter: 100,
            barrier: BarrierOptions {
                tol: 1e-10,
                ..Default::default()
            },
        }
    }
}

/// Variable layout: `y[packed(m, i)] = P_mi / s_i` with `s_i = eps / g_ii`,
/// the OMA power of slot `i`'s owner.
struct Layout {
    n: usize,
    scale: Vec<f64>,
}

impl Layout {
    fn idx(&self, m: usize, i: usize) -> usize {
        m * (m + 1) / 2 + i
    }

    fn dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    fn to_vars(&self, p: &PowerProfile) -> Vec<f64> {
        p.matrix().iter().map(|(_, i, v)| v / self.scale[i]).collect()
    }

    fn to_profile(&self, y: &[f64]) -> Result<PowerProfile> {
        let t = TriMatrix::from_fn(self.n, |m, i| y[self.idx(m, i)].max(0.0) * self.scale[i]);
        PowerProfile::new(t).map_err(|_| Error::NumericalFailure("non-finite SCA iterate".into()))
    }
}

fn subproblem(inst: &SystemInstance, lay: &Layout, prev: &PowerProfile) -> Result<ConcaveProgram> {
    let n = lay.n;
    let w: f64 = lay.scale.iter().sum();
    let mut objective = vec![0.0; lay.dim()];
    for m in 0..n {
        objective[lay.idx(m, m)] = lay.scale[m] / w;
    }
    let mut prog = ConcaveProgram::new(objective);

    for m in 0..n {
        let mut terms = Vec::with_capacity(m + 1);
        let mut affine = vec![0.0; lay.dim()];
        let mut offset = 0.0;
        for i in 0..=m {
            let mut weights = vec![0.0; lay.dim()];
            for j in m..n {
                weights[lay.idx(j, i)] = inst.gamma(j, i) * lay.scale[i];
            }
            terms.push(LogTerm { constant: 1.0, weights });
            if m + 1 < n {
                let lin = linearize_interference(inst, prev, m, i)?;
                for j in m + 1..n {
                    affine[lay.idx(j, i)] = lin.u[j] * lay.scale[i];
                }
                offset += lin.b;
            }
        }
        prog.add_log_constraint(LogConstraint {
            terms,
            affine,
            offset,
            rate: inst.target_rate(),
        })?;
    }
    for m in 1..n {
        for i in 0..m {
            let mut a = vec![0.0; lay.dim()];
            a[lay.idx(m, i)] = 1.0;
            a[lay.idx(i, i)] = -1.0;
            prog.add_linear(a, 0.0)?;
        }
    }
    Ok(prog)
}

/// Runs SCA from `init`, which must be feasible (the OMA profile always is).
pub fn sca_solve(inst: &SystemInstance, init: &PowerProfile, opts: &ScaOptions) -> Result<SolveReport> {
    let n = inst.num_users();
    if init.num_users() != n {
        return Err(Error::InvalidInstance("initial profile has the wrong size".into()));
    }
    if !is_feasible(inst, init, DEFAULT_RATE_TOL) {
        return Err(Error::Infeasible);
    }
    if n == 1 || inst.target_rate() == 0.0 {
        let mut report = SolveReport::exact(oma_profile(inst), SolveStatus::Converged);
        report.trace = vec![total_power(init), report.objective];
        return Ok(report);
    }

    let eps = inst.eps();
    let lay = Layout {
        n,
        scale: (0..n).map(|i| eps / inst.gamma(i, i)).collect(),
    };
    let mut current = init.clone();
    let mut objective = total_power(&current);
    let mut trace = vec![objective];
    let mut stats = OracleStats::default();
    let mut status = SolveStatus::IterLimit;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let prog = subproblem(inst, &lay, &current)?;
        let sol = barrier_solve(&prog, &lay.to_vars(&current), &opts.barrier).map_err(|e| match e {
            Error::Infeasible => Error::NumericalFailure("SCA subproblem lost feasibility".into()),
            other => other,
        })?;
        stats.calls += 1;
        stats.work += sol.total_newton_steps() as u64;

        let next = lay.to_profile(&sol.x)?;
        if !is_feasible(inst, &next, DEFAULT_RATE_TOL) {
            return Err(Error::NumericalFailure(format!(
                "SCA iterate {iterations} violates the true constraints"
            )));
        }
        let next_obj = total_power(&next);
        debug!("sca iteration {iterations}: objective {next_obj:.12e}");
        trace.push(next_obj);
        let decrease = (objective - next_obj) / objective;
        // keep the better point if the solver returned a marginally worse one
        if next_obj <= objective {
            current = next;
            objective = next_obj;
        }
        if decrease < opts.rel_tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    Ok(SolveReport {
        objective,
        profile: current,
        status,
        upper_bound: objective,
        lower_bound: objective,
        iterations,
        trace,
        stats,
    })
}

/// Writes `iteration,objective` rows, iteration 0 being the initial point.
pub fn write_trace_csv<W: Write>(trace: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "objective"]).map_err(csv_err)?;
    for (k, v) in trace.iter().enumerate() {
        w.write_record([k.to_string(), v.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
