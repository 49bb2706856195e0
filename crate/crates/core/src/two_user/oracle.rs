//! Brute-force grid oracle for the two-user problem, independent of the
//! closed forms.
//!
//! For a fixed reflected power `p0` the cheapest feasible `p1` and `p2`
//! follow directly from the constraints:
//!
//! ```text
//! p1 = max(p0, eps (g0 p0 + 1) / g1)
//! p2 = max(0, (e^R / (1 + g0 p0) - 1) / g2)
//! ```
//!
//! so the 3-D search collapses onto a grid over `p0` alone. The grid is
//! uniform on `[0, min(eps/g0, W)]` (`W` the OMA total): a larger `p0`
//! already meets user 2's rate by itself and only costs more `p1`. The best
//! grid point is refined once on a 10x finer grid spanning two coarse steps
//! around it.

use super::TwoUserInstance;

pub const DEFAULT_ORACLE_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOracle {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub objective: f64,
    /// Step of the coarse `p0` grid.
    pub coarse_step: f64,
    /// Step of the refinement grid.
    pub fine_step: f64,
    /// Grid points evaluated.
    pub points: u64,
}

/// Cheapest `(p1, p2)` for a given `p0`.
fn column_minimum(inst: &TwoUserInstance, p0: f64) -> (f64, f64) {
    let eps = inst.eps();
    let p1 = p0.max(eps * (inst.gamma0 * p0 + 1.0) / inst.gamma1);
    let p2 = ((inst.rate - (inst.gamma0 * p0).ln_1p()).exp_m1() / inst.gamma2).max(0.0);
    (p1, p2)
}

fn column_sum(inst: &TwoUserInstance, p0: f64) -> f64 {
    let (p1, p2) = column_minimum(inst, p0);
    p1 + p2
}

fn scan(inst: &TwoUserInstance, lo: f64, step: f64, len: usize) -> (f64, f64) {
    let mut best = (lo, f64::INFINITY);
    for k in 0..len {
        let p0 = lo + step * k as f64;
        let total = column_sum(inst, p0);
        if total < best.1 {
            best = (p0, total);
        }
    }
    best
}

/// Runs the coarse-to-fine search over `max_points` coarse points. Returns
/// `None` only for a budget below two points.
pub fn grid_oracle(inst: &TwoUserInstance, max_points: usize) -> Option<GridOracle> {
    if max_points < 2 {
        return None;
    }
    let hi = (inst.eps() / inst.gamma0).min(inst.oma_total());
    let step = hi / (max_points - 1) as f64;
    let (c0, c_obj) = scan(inst, 0.0, step, max_points);

    let fine = step / 10.0;
    let lo = (c0 - 2.0 * step).max(0.0);
    let len = (((c0 + 2.0 * step).min(hi) - lo) / fine).floor() as usize + 1;
    let (f0, f_obj) = scan(inst, lo, fine, len);
    let p0 = if f_obj < c_obj { f0 } else { c0 };
    let (p1, p2) = column_minimum(inst, p0);
    Some(GridOracle {
        p0,
        p1,
        p2,
        objective: p1 + p2,
        coarse_step: step,
        fine_step: fine,
        points: (max_points + len) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn feasible(inst: &TwoUserInstance, p0: f64, p1: f64, p2: f64) -> bool {
        p0 <= p1 && inst.rate_shortfall(p0, p2) <= 1e-12 && inst.sinr_shortfall(p0, p1) <= 1e-12
    }

    /// Plain triple loop over `[0, 4 W]^3`.
    fn naive(inst: &TwoUserInstance, n: usize) -> f64 {
        let step = 4.0 * inst.oma_total() / (n - 1) as f64;
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (p0, p1, p2) = (a as f64 * step, b as f64 * step, c as f64 * step);
                    if feasible(inst, p0, p1, p2) {
                        best = best.min(p1 + p2);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn oracle_point_is_feasible_and_beats_triple_loop() {
        for t in [
            TwoUserInstance::new(1.0, 4.0, 1.0, LN_2).unwrap(),
            TwoUserInstance::new(4.0, 8.0, 1.0, LN_2).unwrap(),
            TwoUserInstance::new(0.05, 300.0, 2.0, 3.0).unwrap(),
            TwoUserInstance::new(6.3, 4.95, 0.011, 4.38).unwrap(),
        ] {
            let o = grid_oracle(&t, 100_000).unwrap();
            assert!(feasible(&t, o.p0, o.p1, o.p2), "{t:?}");
            let brute = naive(&t, 120);
            assert!(o.objective <= brute + 1e-12, "{t:?}: {} vs {brute}", o.objective);
        }
    }

    #[test]
    fn reference_optimum() {
        let t = TwoUserInstance::new(1.0, 4.0, 1.0, LN_2).unwrap();
        let o = grid_oracle(&t, 1_000_000).unwrap();
        let opt = 2.0 * (2f64.sqrt() - 1.0);
        assert!(o.objective >= opt - 1e-12);
        assert!(o.objective - opt < 1e-9, "{}", o.objective);
    }
}
