//! Conventional hybrid NOMA with two users, for contrast.
//!
//! Here user 2 transmits in slot 1 from its own battery instead of
//! reflecting, so its slot-1 power `p0` enters the objective and the
//! `p0 <= p1` coupling disappears:
//!
//! ```text
//! minimize    p1 + p0 + p2
//! subject to  ln(1 + h2 p0) + ln(1 + h2 p2) >= R
//!             ln(1 + h1 p1 / (h2 p0 + 1)) >= R
//! ```
//!
//! At the OMA point a small shift of user 2's power into slot 1 changes the
//! total by `eps (h2/h1 - 1)` per unit, so OMA is optimal exactly when
//! `h2 >= h1`. Pure NOMA (`p2 = 0`) is never optimal.

use crate::error::{Error, Result};
use crate::kernel::{barrier_solve, BarrierOptions, ConcaveProgram, LogConstraint, LogTerm};
use crate::model::{OracleStats, SolveReport, SolveStatus};

use super::TwoUserInstance;

#[derive(Debug, Clone)]
pub struct ConventionalSolution {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    /// `p1 + p0 + p2`.
    pub objective: f64,
    pub oma_total: f64,
    /// Total power of the best pure-NOMA point (`p2 = 0`).
    pub pure_noma_total: f64,
    /// `objective` and the profile `(p1; p0, p2)`. Note the profile's
    /// [`total_power`](crate::model::total_power) omits `p0`.
    pub report: SolveReport,
}

impl ConventionalSolution {
    /// Whether user 2's own-slot power vanishes, relative to `scale`.
    pub fn is_pure_noma(&self, rel_tol: f64) -> bool {
        self.p2 <= rel_tol * self.oma_total
    }
}

/// Solves the conventional problem for noise-normalized direct gains `h1sq`,
/// `h2sq` and rate `rate`.
pub fn solve_conventional_two_user(h1sq: f64, h2sq: f64, rate: f64) -> Result<ConventionalSolution> {
    // validation only; gamma0 plays no role here
    let inst = TwoUserInstance::new(1.0, h1sq, h2sq, rate)?;
    let eps = inst.eps();
    let oma_total = inst.oma_total();

    // scaled variables y = (y1, y0, y2): p1 = eps y1 / h1, p0 = eps y0 / h2,
    // p2 = eps y2 / h2, objective normalized by the OMA total
    let to_power = [eps / h1sq, eps / h2sq, eps / h2sq];
    let mut prog = ConcaveProgram::new(to_power.iter().map(|s| s / oma_total).collect());
    prog.add_log_constraint(LogConstraint {
        terms: vec![
            LogTerm {
                constant: 1.0,
                weights: vec![0.0, eps, 0.0],
            },
            LogTerm {
                constant: 1.0,
                weights: vec![0.0, 0.0, eps],
            },
        ],
        affine: vec![0.0; 3],
        offset: 0.0,
        rate,
    })?;
    // h1 p1 >= eps (h2 p0 + 1)  <=>  -y1 + eps y0 <= -1
    prog.add_linear(vec![-1.0, eps, 0.0], -1.0)?;

    let opts = BarrierOptions {
        tol: 1e-11,
        ..Default::default()
    };
    let start = [1.5, 0.1 / eps.max(1.0), 1.5];
    let sol = barrier_solve(&prog, &start, &opts)?;
    let [p1, p0, p2] = [0, 1, 2].map(|k| sol.x[k] * to_power[k]);
    if !(p1.is_finite() && p0.is_finite() && p2.is_finite()) {
        return Err(Error::NumericalFailure(
            "conventional solve returned non-finite powers".into(),
        ));
    }
    let objective = p1 + p0 + p2;

    let pure_noma_total = (eps + 1.0) * eps / h1sq + eps / h2sq;

    let mut report = SolveReport::exact(inst.profile(p0, p1, p2), SolveStatus::Converged);
    report.objective = objective;
    report.upper_bound = objective;
    report.lower_bound = objective - sol.gap * oma_total;
    report.iterations = sol.outer_iterations;
    report.stats = OracleStats {
        calls: 1,
        work: sol.total_newton_steps() as u64,
        rejected_witnesses: 0,
    };
    report.trace = vec![objective];

    Ok(ConventionalSolution {
        p0,
        p1,
        p2,
        objective,
        oma_total,
        pure_noma_total,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn unit_gains_give_oma() {
        let s = solve_conventional_two_user(1.0, 1.0, LN_2).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-4, "{}", s.objective);
        assert!(!s.is_pure_noma(1e-3));
    }

    #[test]
    fn oma_optimal_when_second_user_is_stronger() {
        let s = solve_conventional_two_user(2.0, 7.0, 3.0).unwrap();
        assert!((s.objective / s.oma_total - 1.0).abs() < 1e-6);
        assert!(s.pure_noma_total > s.oma_total);
    }

    #[test]
    fn hybrid_beats_oma_when_first_user_is_stronger() {
        let s = solve_conventional_two_user(20.0, 1.0, 2.0).unwrap();
        assert!(s.objective < s.oma_total * (1.0 - 1e-3));
        assert!(!s.is_pure_noma(1e-3));
    }
}
