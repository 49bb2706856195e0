//! Candidate construction and KKT certification.
//!
//! Lagrangian, with multipliers `l1..l6` in the order of
//! [`TwoUserCandidate::lambda`]:
//!
//! ```text
//! L = p1 + p2 + l1 (R - ln(1+g0 p0) - ln(1+g2 p2)) + l2 (eps g0 p0 + eps - g1 p1)
//!     + l3 (p0 - p1) - l4 p1 - l5 p2 - l6 p0
//! ```
//!
//! Stationarity:
//!
//! ```text
//! dL/dp1 = 1 - g1 l2 - l3 - l4                          = 0
//! dL/dp2 = 1 - l1 g2 / (1 + g2 p2) - l5                 = 0
//! dL/dp0 = -l1 g0 / (1 + g0 p0) + eps g0 l2 + l3 - l6   = 0
//! ```

use log::warn;

use super::{CandidateKind, TwoUserCandidate, TwoUserInstance};

/// Certification tolerance on scaled residuals.
pub const DEFAULT_KKT_TOL: f64 = 1e-7;

/// Relative disagreement between closed-form and recovered multipliers that
/// gets logged.
const MULTIPLIER_WARN_TOL: f64 = 1e-5;

/// Worst scaled residual of each KKT condition group. Every entry is
/// dimensionless; certification requires each to be at most `tol`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub slackness: f64,
    /// Largest negative part of a multiplier.
    pub dual_violation: f64,
    pub primal_violation: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.slackness)
            .max(self.dual_violation)
            .max(self.primal_violation)
    }
}

fn point(kind: CandidateKind, p0: f64, p1: f64, p2: f64) -> TwoUserCandidate {
    TwoUserCandidate {
        kind,
        p0,
        p1,
        p2,
        lambda: [f64::NAN; 6],
        numeric_lambda: [f64::NAN; 6],
        residuals: KktResiduals::default(),
        primal_feasible: false,
        kkt_certified: false,
    }
}

/// All six candidate points. Degenerate forms (a singular denominator) get
/// NaN powers; every candidate's `primal_feasible` flag is set here.
pub fn enumerate_candidates(inst: &TwoUserInstance) -> Vec<TwoUserCandidate> {
    let TwoUserInstance {
        gamma0: g0,
        gamma1: g1,
        gamma2: g2,
        rate,
    } = *inst;
    let eps = inst.eps();
    let er = rate.exp();

    let mut out = Vec::with_capacity(6);
    // P-NOMA I: reflection at full slot-1 power carries user 2 alone
    let p = eps / g0;
    out.push(point(CandidateKind::PNomaI, p, p, 0.0));
    // P-NOMA II: user 1 pays for the interference, user 2 reflects part of it
    out.push(point(CandidateKind::PNomaII, eps / g0, eps * (1.0 + eps) / g1, 0.0));
    // H-NOMA I: both rate constraints tight, reflection below the cap
    let e1 = (eps * er / (g2 * g1)).sqrt();
    out.push(point(
        CandidateKind::HNomaI,
        g1 * e1 / (eps * g0) - 1.0 / g0,
        e1,
        e1 - 1.0 / g2,
    ));
    // H-NOMA II: full reflection, user-1 constraint slack
    let s = (er / (g0 * g2)).sqrt();
    out.push(point(CandidateKind::HNomaII, s - 1.0 / g0, s - 1.0 / g0, s - 1.0 / g2));
    // H-NOMA III: full reflection, all constraints tight
    let d = g1 - eps * g0;
    if d > 0.0 {
        let p = eps / d;
        out.push(point(CandidateKind::HNomaIII, p, p, er * d / (g1 * g2) - 1.0 / g2));
    } else {
        out.push(point(CandidateKind::HNomaIII, f64::NAN, f64::NAN, f64::NAN));
    }
    out.push(point(CandidateKind::Oma, 0.0, eps / g1, eps / g2));

    for c in &mut out {
        let violation = primal_violation(inst, c.p0, c.p1, c.p2);
        c.primal_feasible = violation <= DEFAULT_KKT_TOL;
        c.residuals.primal_violation = violation;
    }
    out
}

/// Largest scaled violation of the primal constraints; infinite for
/// non-finite points.
fn primal_violation(inst: &TwoUserInstance, p0: f64, p1: f64, p2: f64) -> f64 {
    if !(p0.is_finite() && p1.is_finite() && p2.is_finite()) {
        return f64::INFINITY;
    }
    let w = inst.oma_total();
    let eps = inst.eps();
    let sinr_scale = eps + eps * inst.gamma0 * p0.abs() + inst.gamma1 * p1.abs();
    [
        inst.rate_shortfall(p0.max(0.0), p2.max(0.0)) / inst.rate.max(1.0),
        inst.sinr_shortfall(p0, p1) / sinr_scale,
        (p0 - p1) / w,
        -p0 / w,
        -p1 / w,
        -p2 / w,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Closed-form multipliers of each solution form.
fn analytic_multipliers(inst: &TwoUserInstance, kind: CandidateKind) -> [f64; 6] {
    let TwoUserInstance {
        gamma0: g0,
        gamma1: g1,
        gamma2: g2,
        rate,
    } = *inst;
    let eps = inst.eps();
    let er = rate.exp();
    match kind {
        CandidateKind::PNomaI => {
            let l1 = (1.0 + eps) / g0;
            [l1, 0.0, 1.0, 0.0, 1.0 - l1 * g2, 0.0]
        }
        CandidateKind::PNomaII => {
            let l1 = eps * (1.0 + eps) / g1;
            [l1, 1.0 / g1, 0.0, 0.0, 1.0 - l1 * g2, 0.0]
        }
        CandidateKind::HNomaI => {
            let e1 = (eps * er / (g2 * g1)).sqrt();
            [e1, 1.0 / g1, 0.0, 0.0, 0.0, 0.0]
        }
        CandidateKind::HNomaII => [(er / (g0 * g2)).sqrt(), 0.0, 1.0, 0.0, 0.0, 0.0],
        CandidateKind::HNomaIII => {
            let d = g1 - eps * g0;
            let l1 = er * d / (g1 * g2);
            let l2 = 1.0 / d - er * g0 * d / (g1 * g1 * g2);
            [l1, l2, 1.0 - g1 * l2, 0.0, 0.0, 0.0]
        }
        CandidateKind::Oma => {
            let l1 = (1.0 + eps) / g2;
            let l2 = 1.0 / g1;
            [l1, l2, 0.0, 0.0, 0.0, eps * g0 / g1 - g0 * (1.0 + eps) / g2]
        }
    }
}

/// Multipliers recovered from the stationarity equations at the candidate
/// point, using the active set implied by its kind.
fn numeric_multipliers(inst: &TwoUserInstance, c: &TwoUserCandidate) -> [f64; 6] {
    let TwoUserInstance {
        gamma0: g0,
        gamma1: g1,
        gamma2: g2,
        ..
    } = *inst;
    let eps = inst.eps();
    let (a0, a2) = (1.0 + g0 * c.p0, 1.0 + g2 * c.p2);
    match c.kind {
        CandidateKind::PNomaI => {
            let l3 = 1.0;
            let l1 = l3 * a0 / g0;
            [l1, 0.0, l3, 0.0, 1.0 - l1 * g2 / a2, 0.0]
        }
        CandidateKind::PNomaII => {
            let l2 = 1.0 / g1;
            let l1 = eps * l2 * a0;
            [l1, l2, 0.0, 0.0, 1.0 - l1 * g2 / a2, 0.0]
        }
        CandidateKind::HNomaI => [a2 / g2, 1.0 / g1, 0.0, 0.0, 0.0, 0.0],
        CandidateKind::HNomaII => [a2 / g2, 0.0, 1.0, 0.0, 0.0, 0.0],
        CandidateKind::HNomaIII => {
            let l1 = a2 / g2;
            let l2 = (1.0 - l1 * g0 / a0) / (g1 - eps * g0);
            [l1, l2, 1.0 - g1 * l2, 0.0, 0.0, 0.0]
        }
        CandidateKind::Oma => {
            let l1 = a2 / g2;
            let l2 = 1.0 / g1;
            [l1, l2, 0.0, 0.0, 0.0, -l1 * g0 / a0 + eps * g0 * l2]
        }
    }
}

/// Natural magnitude of each multiplier, used to scale dual residuals.
fn multiplier_scales(inst: &TwoUserInstance) -> [f64; 6] {
    let eps = inst.eps();
    let l1 = (1.0 + eps) / inst.gamma2;
    [
        l1,
        1.0 / inst.gamma1,
        1.0,
        1.0,
        1.0,
        inst.gamma0 * (l1 + eps / inst.gamma1),
    ]
}

/// Attaches multipliers to `cand` and checks stationarity, dual feasibility,
/// complementary slackness and primal feasibility, each scaled to be
/// dimensionless.
pub fn certify_kkt(inst: &TwoUserInstance, mut cand: TwoUserCandidate, tol: f64) -> TwoUserCandidate {
    cand.lambda = analytic_multipliers(inst, cand.kind);
    cand.numeric_lambda = numeric_multipliers(inst, &cand);
    let scales = multiplier_scales(inst);

    if !cand.primal_feasible {
        cand.kkt_certified = false;
        return cand;
    }
    for (k, (a, n)) in cand.lambda.iter().zip(&cand.numeric_lambda).enumerate() {
        if (a - n).abs() > MULTIPLIER_WARN_TOL * (a.abs().max(n.abs()).max(scales[k])) {
            warn!(
                "{}: lambda{} closed form {a:e} vs recovered {n:e} ({inst:?})",
                cand.kind,
                k + 1
            );
        }
    }

    let TwoUserInstance {
        gamma0: g0,
        gamma1: g1,
        gamma2: g2,
        ..
    } = *inst;
    let eps = inst.eps();
    let w = inst.oma_total();
    let (p0, p1, p2) = (cand.p0, cand.p1, cand.p2);
    let [l1, l2, l3, l4, l5, l6] = cand.lambda;

    let rel = |terms: &[f64]| {
        let sum: f64 = terms.iter().sum();
        let size = terms.iter().map(|t| t.abs()).fold(1.0, f64::max);
        sum.abs() / size
    };
    let stationarity = [
        rel(&[1.0, -g1 * l2, -l3, -l4]),
        rel(&[1.0, -l1 * g2 / (1.0 + g2 * p2), -l5]),
        rel(&[-l1 * g0 / (1.0 + g0 * p0), eps * g0 * l2, l3, -l6]),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let dual_violation = cand.lambda.iter().zip(&scales).map(|(l, s)| -l / s).fold(0.0, f64::max);

    let sinr_scale = eps + eps * g0 * p0 + g1 * p1;
    let slackness = [
        l1 / scales[0] * inst.rate_shortfall(p0, p2) / inst.rate.max(1.0),
        l2 / scales[1] * inst.sinr_shortfall(p0, p1) / sinr_scale,
        l3 / scales[2] * (p0 - p1) / w,
        l4 * p1 / w,
        l5 * p2 / w,
        l6 / scales[5] * p0 / w,
    ]
    .into_iter()
    .map(f64::abs)
    .fold(0.0, f64::max);

    cand.residuals = KktResiduals {
        stationarity,
        slackness,
        dual_violation,
        primal_violation: cand.residuals.primal_violation,
    };
    cand.kkt_certified = cand.residuals.max() <= tol;
    cand
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn find(c: &[TwoUserCandidate], k: CandidateKind) -> TwoUserCandidate {
        c.iter().find(|c| c.kind == k).unwrap().clone()
    }

    #[test]
    fn table_values_for_reference_instance() {
        let t = TwoUserInstance::new(1.0, 4.0, 1.0, LN_2).unwrap();
        let c = enumerate_candidates(&t);
        let h2 = find(&c, CandidateKind::HNomaII);
        let r = 2f64.sqrt() - 1.0;
        assert!((h2.p0 - r).abs() < 1e-15 && (h2.p1 - r).abs() < 1e-15);
        assert!((h2.p2 - r).abs() < 1e-15);

        let h3 = find(&c, CandidateKind::HNomaIII);
        assert!((h3.p0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((h3.p2 - 0.5).abs() < 1e-15);
        assert!(h3.primal_feasible);
        assert!((h3.objective() - 5.0 / 6.0).abs() < 1e-15);

        let h1 = find(&c, CandidateKind::HNomaI);
        assert!((h1.p0 - (2.0 * 2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((h1.p1 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(!h1.primal_feasible);
    }

    #[test]
    fn singular_type_three_is_flagged() {
        // g1 = eps * g0 with eps = 1
        let t = TwoUserInstance::new(2.0, 2.0, 1.0, LN_2).unwrap();
        let c = find(&enumerate_candidates(&t), CandidateKind::HNomaIII);
        assert!(!c.primal_feasible);
        assert!(!certify_kkt(&t, c, DEFAULT_KKT_TOL).kkt_certified);
    }

    #[test]
    fn pure_noma_region_instances_certify() {
        let t = TwoUserInstance::new(4.0, 8.0, 1.0, LN_2).unwrap();
        let c = find(&enumerate_candidates(&t), CandidateKind::PNomaI);
        assert!(certify_kkt(&t, c, DEFAULT_KKT_TOL).kkt_certified);

        let t = TwoUserInstance::new(1.0, 1.5, 0.5, LN_2).unwrap();
        let c = find(&enumerate_candidates(&t), CandidateKind::PNomaII);
        assert!((c.p0 - 1.0).abs() < 1e-15 && (c.p1 - 4.0 / 3.0).abs() < 1e-15);
        assert!(certify_kkt(&t, c, DEFAULT_KKT_TOL).kkt_certified);
    }

    #[test]
    fn oma_fails_dual_feasibility() {
        let t = TwoUserInstance::new(0.3, 5.0, 2.0, 1.7).unwrap();
        let c = certify_kkt(&t, find(&enumerate_candidates(&t), CandidateKind::Oma), DEFAULT_KKT_TOL);
        assert!(c.primal_feasible);
        assert!(c.lambda[5] < 0.0);
        assert!(!c.kkt_certified);
    }

    #[test]
    fn closed_form_and_recovered_multipliers_agree() {
        for t in [
            TwoUserInstance::new(1.0, 4.0, 1.0, LN_2).unwrap(),
            TwoUserInstance::new(0.2, 30.0, 3.0, 2.5).unwrap(),
            TwoUserInstance::new(7.0, 9.0, 0.5, 0.6).unwrap(),
        ] {
            for c in enumerate_candidates(&t) {
                if !c.primal_feasible {
                    continue;
                }
                let c = certify_kkt(&t, c, DEFAULT_KKT_TOL);
                for (a, n) in c.lambda.iter().zip(&c.numeric_lambda) {
                    assert!((a - n).abs() <= 1e-9 * a.abs().max(1.0), "{:?}: {a} vs {n}", c.kind);
                }
            }
        }
    }
}
