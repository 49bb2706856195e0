//! Log-barrier interior-point method for small dense programs of the form
//!
//! ```text
//! minimize    c^T x
//! subject to  sum_k ln(c_k + w_k^T x) - (u^T x + b) >= rho   (one row per constraint)
//!             a_l^T x <= d_l
//!             x >= 0
//! ```
//!
//! with `w_k >= 0` and `c_k > 0`, so every constraint function is concave and
//! the program is convex. Each centering step is a damped Newton iteration on
//! `t c^T x + phi(x)`, with analytic gradient and Hessian of the barrier `phi`.

use log::trace;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `ln(constant + weights^T x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTerm {
    pub constant: f64,
    pub weights: Vec<f64>,
}

/// `sum_k ln(c_k + w_k^T x) - (affine^T x + offset) >= rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConstraint {
    pub terms: Vec<LogTerm>,
    pub affine: Vec<f64>,
    pub offset: f64,
    pub rate: f64,
}

impl LogConstraint {
    /// Constraint function minus the required rate; `None` if a log argument
    /// is non-positive.
    pub fn slack(&self, x: &[f64]) -> Option<f64> {
        let mut g = -self.offset - self.rate - dot(&self.affine, x);
        for term in &self.terms {
            let z = term.constant + dot(&term.weights, x);
            if !(z > 0.0) {
                return None;
            }
            g += z.ln();
        }
        Some(g)
    }
}

/// `coeffs^T x <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.rhs - dot(&self.coeffs, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveProgram {
    objective: Vec<f64>,
    log_constraints: Vec<LogConstraint>,
    linear: Vec<LinearConstraint>,
    /// Variables exempt from the `x >= 0` bound (phase-one slack only).
    free: Vec<bool>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConcaveProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            log_constraints: Vec::new(),
            linear: Vec::new(),
            free: vec![false; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn log_constraints(&self) -> &[LogConstraint] {
        &self.log_constraints
    }

    pub fn linear_constraints(&self) -> &[LinearConstraint] {
        &self.linear
    }

    pub fn add_log_constraint(&mut self, c: LogConstraint) -> Result<()> {
        let n = self.dim();
        if c.affine.len() != n || c.terms.iter().any(|t| t.weights.len() != n) {
            return Err(Error::InvalidInstance("log constraint dimension mismatch".into()));
        }
        for t in &c.terms {
            if !(t.constant > 0.0) || t.weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
                return Err(Error::InvalidInstance(
                    "log terms need a positive constant and non-negative weights".into(),
                ));
            }
        }
        self.log_constraints.push(c);
        Ok(())
    }

    pub fn add_linear(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidInstance("linear constraint dimension mismatch".into()));
        }
        self.linear.push(LinearConstraint { coeffs, rhs });
        Ok(())
    }

    /// Number of barrier terms; `m / t` bounds the suboptimality of a
    /// central point.
    pub fn num_barrier_terms(&self) -> usize {
        self.log_constraints.len() + self.linear.len() + self.free.iter().filter(|f| !**f).count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    pub fn is_strictly_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.free).all(|(&v, &free)| free || v > 0.0)
            && self.linear.iter().all(|l| l.slack(x) > 0.0)
            && self.log_constraints.iter().all(|c| c.slack(x).is_some_and(|g| g > 0.0))
    }

    /// Largest constraint violation at `x` (non-positive when feasible).
    fn max_violation(&self, x: &[f64]) -> f64 {
        let logs = self
            .log_constraints
            .iter()
            .map(|c| c.slack(x).map_or(f64::INFINITY, |g| -g));
        let lins = self.linear.iter().map(|l| -l.slack(x));
        logs.chain(lins).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Barrier value `t c^T x + phi(x)` with its gradient and Hessian, or
    /// `None` outside the barrier domain.
    pub fn barrier_eval(&self, t: f64, x: &[f64]) -> Option<BarrierEval> {
        let n = self.dim();
        let mut value = t * dot(&self.objective, x);
        let mut grad = DVector::from_iterator(n, self.objective.iter().map(|c| t * c));
        let mut hess = DMatrix::<f64>::zeros(n, n);

        for (i, (&v, &free)) in x.iter().zip(&self.free).enumerate() {
            if free {
                continue;
            }
            if !(v > 0.0) {
                return None;
            }
            value -= v.ln();
            grad[i] -= 1.0 / v;
            hess[(i, i)] += 1.0 / (v * v);
        }

        for l in &self.linear {
            let s = l.slack(x);
            if !(s > 0.0) {
                return None;
            }
            value -= s.ln();
            let a = DVector::from_column_slice(&l.coeffs);
            grad += &a / s;
            hess.ger(1.0 / (s * s), &a, &a, 1.0);
        }

        for c in &self.log_constraints {
            let mut g = -c.offset - c.rate - dot(&c.affine, x);
            let mut grad_g = -DVector::from_column_slice(&c.affine);
            // curvature of the log terms, -hess(g)
            let mut curv = DMatrix::<f64>::zeros(n, n);
            for term in &c.terms {
                let z = term.constant + dot(&term.weights, x);
                if !(z > 0.0) {
                    return None;
                }
                g += z.ln();
                let w = DVector::from_column_slice(&term.weights);
                grad_g.axpy(1.0 / z, &w, 1.0);
                curv.ger(1.0 / (z * z), &w, &w, 1.0);
            }
            if !(g > 0.0) {
                return None;
            }
            value -= g.ln();
            grad.axpy(-1.0 / g, &grad_g, 1.0);
            hess.ger(1.0 / (g * g), &grad_g, &grad_g, 1.0);
            hess += curv / g;
        }

        value.is_finite().then_some(BarrierEval {
            value,
            gradient: grad,
            hessian: hess,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions {
    pub t0: f64,
    pub kappa: f64,
    /// Stop once `m / t` falls below this duality-gap bound.
    pub tol: f64,
    /// Centering stops when half the squared Newton decrement is below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            t0: 1.0,
            kappa: 10.0,
            tol: 1e-8,
            newton_tol: 1e-9,
            max_newton: 50,
            max_outer: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Newton steps in the main phase.
    pub newton_steps: usize,
    /// Newton steps spent finding a strictly feasible start (0 if `x0` was).
    pub phase_one_steps: usize,
    pub outer_iterations: usize,
    /// Final `m / t`.
    pub gap: f64,
}

impl BarrierSolution {
    pub fn total_newton_steps(&self) -> usize {
        self.newton_steps + self.phase_one_steps
    }
}

struct Minimized {
    x: Vec<f64>,
    newton_steps: usize,
    outer: usize,
    gap: f64,
    stopped_early: bool,
}

fn newton_direction(eval: &BarrierEval) -> Option<DVector<f64>> {
    let rhs = -&eval.gradient;
    if let Some(chol) = eval.hessian.clone().cholesky() {
        return Some(chol.solve(&rhs));
    }
    let n = eval.hessian.nrows();
    let scale = (0..n).map(|i| eval.hessian[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
    let regularized = &eval.hessian + DMatrix::<f64>::identity(n, n) * (1e-12 * scale);
    if let Some(chol) = regularized.clone().cholesky() {
        return Some(chol.solve(&rhs));
    }
    regularized.lu().solve(&rhs)
}

fn minimize(
    prog: &ConcaveProgram,
    x0: &[f64],
    opts: &BarrierOptions,
    stop: impl Fn(&[f64]) -> bool,
) -> Result<Minimized> {
    const ALPHA: f64 = 0.25;
    const BETA: f64 = 0.5;

    let m = prog.num_barrier_terms() as f64;
    let mut x = DVector::from_column_slice(x0);
    let mut t = opts.t0;
    let mut newton_steps = 0;
    let mut outer = 0;

    loop {
        outer += 1;
        for _ in 0..opts.max_newton {
            let eval = prog
                .barrier_eval(t, x.as_slice())
                .ok_or_else(|| Error::NumericalFailure("iterate left the barrier domain".into()))?;
            let dx = newton_direction(&eval).ok_or_else(|| Error::NumericalFailure("singular Newton system".into()))?;
            if dx.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalFailure("non-finite Newton step".into()));
            }
            let slope = eval.gradient.dot(&dx);
            let decrement = -slope;
            if decrement / 2.0 <= opts.newton_tol {
                break;
            }
            newton_steps += 1;

            let mut step = 1.0;
            let mut candidate = &x + &dx * step;
            let mut cand_eval = prog.barrier_eval(t, candidate.as_slice());
            while cand_eval.is_none() && step > 1e-20 {
                step *= BETA;
                candidate = &x + &dx * step;
                cand_eval = prog.barrier_eval(t, candidate.as_slice());
            }
            // inside the quadratic region a full step is safe and the Armijo
            // test is dominated by rounding in the barrier value
            if decrement > 1e-3 {
                while let Some(ref ce) = cand_eval {
                    if ce.value <= eval.value + ALPHA * step * slope || step < 1e-20 {
                        break;
                    }
                    step *= BETA;
                    candidate = &x + &dx * step;
                    cand_eval = prog.barrier_eval(t, candidate.as_slice());
                }
            }
            if cand_eval.is_none() || step < 1e-20 {
                // precision floor: the current point is as centered as it gets
                break;
            }
            x = candidate;
            if stop(x.as_slice()) {
                return Ok(Minimized {
                    x: x.as_slice().to_vec(),
                    newton_steps,
                    outer,
                    gap: m / t,
                    stopped_early: true,
                });
            }
        }
        trace!(
            "barrier outer {outer}: t = {t:e}, objective = {:.12e}, gap = {:e}",
            prog.objective_value(x.as_slice()),
            m / t
        );
        if m / t < opts.tol || outer >= opts.max_outer {
            break;
        }
        t *= opts.kappa;
    }

    Ok(Minimized {
        x: x.as_slice().to_vec(),
        newton_steps,
        outer,
        gap: m / t,
        stopped_early: false,
    })
}

/// Finds a strictly feasible point by minimizing a common slack `s` added to
/// every constraint, starting from `x_start` (non-positive entries are lifted
/// to a small positive value). Returns the point and the Newton steps used.
pub fn phase_one(prog: &ConcaveProgram, x_start: &[f64], opts: &BarrierOptions) -> Result<(Vec<f64>, usize)> {
    let n = prog.dim();
    if x_start.len() != n {
        return Err(Error::InvalidInstance("start point dimension mismatch".into()));
    }
    let top = x_start.iter().copied().fold(0.0, f64::max);
    let floor = 1e-6 * (1.0 + top);
    let x: Vec<f64> = x_start
        .iter()
        .zip(&prog.free)
        .map(|(&v, &free)| if free || v > floor { v } else { floor })
        .collect();
    if prog.is_strictly_feasible(&x) {
        return Ok((x, 0));
    }

    // augmented variables (x, s): minimize s with every constraint relaxed by s
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut aug = ConcaveProgram::new(objective);
    aug.free[n] = true;
    for c in &prog.log_constraints {
        let extend = |v: &[f64], last: f64| v.iter().copied().chain([last]).collect::<Vec<_>>();
        aug.log_constraints.push(LogConstraint {
            terms: c
                .terms
                .iter()
                .map(|t| LogTerm {
                    constant: t.constant,
                    weights: extend(&t.weights, 0.0),
                })
                .collect(),
            affine: extend(&c.affine, -1.0),
            offset: c.offset,
            rate: c.rate,
        });
    }
    for l in &prog.linear {
        aug.linear.push(LinearConstraint {
            coeffs: l.coeffs.iter().copied().chain([-1.0]).collect(),
            rhs: l.rhs,
        });
    }

    let violation = prog.max_violation(&x);
    if !violation.is_finite() {
        return Err(Error::NumericalFailure("log argument non-positive at start".into()));
    }
    let mut z = x;
    z.push(violation.max(0.0) + 1.0);

    let res = minimize(&aug, &z, opts, |z| z[n] < 0.0)?;
    let s = res.x[n];
    trace!("phase one: slack {s:e} after {} Newton steps", res.newton_steps);
    let x: Vec<f64> = res.x[..n].to_vec();
    if (res.stopped_early || s < 0.0) && prog.is_strictly_feasible(&x) {
        Ok((x, res.newton_steps))
    } else {
        Err(Error::Infeasible)
    }
}

/// Minimizes `prog` from `x0`. If `x0` is not strictly feasible, a phase-one
/// search runs first and its cost is reported in `phase_one_steps`.
pub fn barrier_solve(prog: &ConcaveProgram, x0: &[f64], opts: &BarrierOptions) -> Result<BarrierSolution> {
    let (start, phase_one_steps) = if prog.is_strictly_feasible(x0) {
        (x0.to_vec(), 0)
    } else {
        phase_one(prog, x0, opts)?
    };
    let res = minimize(prog, &start, opts, |_| false)?;
    Ok(BarrierSolution {
        objective: prog.objective_value(&res.x),
        x: res.x,
        newton_steps: res.newton_steps,
        phase_one_steps,
        outer_iterations: res.outer,
        gap: res.gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> BarrierOptions {
        BarrierOptions {
            tol,
            ..Default::default()
        }
    }

    #[test]
    fn box_only_linear_program() {
        // min x s.t. x >= 0.5
        let mut p = ConcaveProgram::new(vec![1.0]);
        p.add_linear(vec![-1.0], -0.5).unwrap();
        let s = barrier_solve(&p, &[2.0], &opts(1e-9)).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-8, "{}", s.objective);
    }

    #[test]
    fn objective_tightens_with_tolerance() {
        let mut p = ConcaveProgram::new(vec![1.0, 2.0]);
        p.add_log_constraint(LogConstraint {
            terms: vec![
                LogTerm {
                    constant: 1.0,
                    weights: vec![1.0, 0.0],
                },
                LogTerm {
                    constant: 1.0,
                    weights: vec![0.0, 3.0],
                },
            ],
            affine: vec![0.0, 0.0],
            offset: 0.0,
            rate: 2.0,
        })
        .unwrap();
        let mut last = f64::INFINITY;
        for tol in [1e-2, 1e-4, 1e-6] {
            let s = barrier_solve(&p, &[5.0, 5.0], &opts(tol)).unwrap();
            assert!(s.objective <= last + 1e-12);
            last = s.objective;
        }
    }

    #[test]
    fn phase_one_detects_contradiction() {
        // x <= 1 and x >= 2
        let mut p = ConcaveProgram::new(vec![1.0]);
        p.add_linear(vec![1.0], 1.0).unwrap();
        p.add_linear(vec![-1.0], -2.0).unwrap();
        assert!(matches!(
            phase_one(&p, &[0.5], &BarrierOptions::default()),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn phase_one_finds_interior_point() {
        // ln(1 + x) >= 3 has x = 100 as an interior point
        let mut p = ConcaveProgram::new(vec![1.0]);
        p.add_log_constraint(LogConstraint {
            terms: vec![LogTerm {
                constant: 1.0,
                weights: vec![1.0],
            }],
            affine: vec![0.0],
            offset: 0.0,
            rate: 3.0,
        })
        .unwrap();
        let (x, _) = phase_one(&p, &[0.0], &BarrierOptions::default()).unwrap();
        assert!(p.is_strictly_feasible(&x));
    }

    #[test]
    fn phase_one_rejects_unreachable_rate() {
        // ln(1 + x) >= 10 with x <= 1
        let mut p = ConcaveProgram::new(vec![1.0]);
        p.add_log_constraint(LogConstraint {
            terms: vec![LogTerm {
                constant: 1.0,
                weights: vec![1.0],
            }],
            affine: vec![0.0],
            offset: 0.0,
            rate: 10.0,
        })
        .unwrap();
        p.add_linear(vec![1.0], 1.0).unwrap();
        assert!(matches!(
            barrier_solve(&p, &[0.5], &BarrierOptions::default()),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn rejects_negative_weights() {
        let mut p = ConcaveProgram::new(vec![1.0]);
        let bad = LogConstraint {
            terms: vec![LogTerm {
                constant: 1.0,
                weights: vec![-1.0],
            }],
            affine: vec![0.0],
            offset: 0.0,
            rate: 0.0,
        };
        assert!(p.add_log_constraint(bad).is_err());
        assert!(p.add_linear(vec![1.0, 2.0], 0.0).is_err());
    }
}
