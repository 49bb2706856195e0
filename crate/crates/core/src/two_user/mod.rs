//! Exact solution of the two-user problem.
//!
//! With two users the decision variables reduce to three powers:
//!
//! - `p0`: power user 2 reflects in slot 1,
//! - `p1`: user 1's transmit power in slot 1,
//! - `p2`: user 2's transmit power in slot 2,
//!
//! and the problem reads
//!
//! ```text
//! minimize    p1 + p2
//! subject to  ln(1 + g0 p0) + ln(1 + g2 p2) >= R     (user 2)
//!             eps g0 p0 + eps <= g1 p1               (user 1)
//!             p0 <= p1,  p >= 0
//! ```
//!
//! with `eps = e^R - 1`. The program is convex, and its optimum is always one of
//! five analytic forms (two pure NOMA, three hybrid). [`solve_two_user`]
//! evaluates all of them together with the OMA point, attaches the Lagrange
//! multipliers of each form, and returns the one that passes a full numerical
//! KKT check.
//!
//! Users are numbered as in the rest of the crate: "user 1" is user 0 and owns
//! slot 0, "user 2" is user 1.

mod candidates;
mod conventional;
mod oracle;

pub use candidates::{certify_kkt, enumerate_candidates, KktResiduals, DEFAULT_KKT_TOL};
pub use conventional::{solve_conventional_two_user, ConventionalSolution};
pub use oracle::{grid_oracle, GridOracle, DEFAULT_ORACLE_POINTS};

use std::fmt;

use crate::error::{Error, Result};
use crate::model::PowerProfile;
use crate::model::{SolveReport, SolveStatus, SystemInstance};
use crate::tri::TriMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoUserInstance {
    /// Cascaded gain of user 2 reflecting in slot 1.
    pub gamma0: f64,
    /// Direct gain of user 1.
    pub gamma1: f64,
    /// Direct gain of user 2.
    pub gamma2: f64,
    pub rate: f64,
}

impl TwoUserInstance {
    pub fn new(gamma0: f64, gamma1: f64, gamma2: f64, rate: f64) -> Result<Self> {
        for (name, g) in [("gamma0", gamma0), ("gamma1", gamma1), ("gamma2", gamma2)] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidInstance(format!("{name} = {g} must be positive")));
            }
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidInstance(format!("rate {rate} must be positive")));
        }
        Ok(Self {
            gamma0,
            gamma1,
            gamma2,
            rate,
        })
    }

    pub fn from_system(inst: &SystemInstance) -> Result<Self> {
        if inst.num_users() != 2 {
            return Err(Error::InvalidInstance(format!(
                "two-user solver needs 2 users, got {}",
                inst.num_users()
            )));
        }
        Self::new(inst.gamma(1, 0), inst.gamma(0, 0), inst.gamma(1, 1), inst.target_rate())
    }

    pub fn to_system(&self) -> SystemInstance {
        let g = [[self.gamma1, 0.0], [self.gamma0, self.gamma2]];
        SystemInstance::new(TriMatrix::from_fn(2, |m, i| g[m][i]), self.rate).expect("validated gains")
    }

    pub fn eps(&self) -> f64 {
        self.rate.exp_m1()
    }

    /// Total OMA power `eps/g1 + eps/g2`.
    pub fn oma_total(&self) -> f64 {
        let eps = self.eps();
        eps / self.gamma1 + eps / self.gamma2
    }

    /// Maps `(p0, p1, p2)` onto a [`PowerProfile`]. Negative inputs are
    /// clamped to zero.
    pub fn profile(&self, p0: f64, p1: f64, p2: f64) -> PowerProfile {
        let p = [[p1.max(0.0), 0.0], [p0.max(0.0), p2.max(0.0)]];
        PowerProfile::new(TriMatrix::from_fn(2, |m, i| p[m][i])).expect("finite powers")
    }

    /// User 2's rate shortfall `R - ln(1 + g0 p0) - ln(1 + g2 p2)`.
    pub fn rate_shortfall(&self, p0: f64, p2: f64) -> f64 {
        self.rate - (self.gamma0 * p0).ln_1p() - (self.gamma2 * p2).ln_1p()
    }

    /// User 1's SINR shortfall `eps g0 p0 + eps - g1 p1`.
    pub fn sinr_shortfall(&self, p0: f64, p1: f64) -> f64 {
        let eps = self.eps();
        eps * self.gamma0 * p0 + eps - self.gamma1 * p1
    }
}

/// The six analytic solution forms, in tie-break order (OMA last: it is
/// never optimal when user 1 is the stronger user).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum CandidateKind {
    PNomaI,
    PNomaII,
    HNomaI,
    HNomaII,
    HNomaIII,
    Oma,
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 6] = [
        CandidateKind::PNomaI,
        CandidateKind::PNomaII,
        CandidateKind::HNomaI,
        CandidateKind::HNomaII,
        CandidateKind::HNomaIII,
        CandidateKind::Oma,
    ];

    /// The five NOMA classes, excluding OMA.
    pub const NOMA: [CandidateKind; 5] = [
        CandidateKind::PNomaI,
        CandidateKind::PNomaII,
        CandidateKind::HNomaI,
        CandidateKind::HNomaII,
        CandidateKind::HNomaIII,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CandidateKind::PNomaI => "P-NOMA I",
            CandidateKind::PNomaII => "P-NOMA II",
            CandidateKind::HNomaI => "H-NOMA I",
            CandidateKind::HNomaII => "H-NOMA II",
            CandidateKind::HNomaIII => "H-NOMA III",
            CandidateKind::Oma => "OMA",
        }
    }

    pub fn is_pure_noma(self) -> bool {
        matches!(self, CandidateKind::PNomaI | CandidateKind::PNomaII)
    }
}

impl fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoUserCandidate {
    pub kind: CandidateKind,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    /// Multipliers of, in order: the user-2 rate constraint, the user-1 SINR
    /// constraint, `p0 <= p1`, `p1 >= 0`, `p2 >= 0`, `p0 >= 0`. Filled from
    /// the closed forms by [`certify_kkt`].
    pub lambda: [f64; 6],
    /// The same multipliers recovered from the stationarity equations at the
    /// candidate point, as an independent check on the closed forms.
    pub numeric_lambda: [f64; 6],
    pub residuals: KktResiduals,
    pub primal_feasible: bool,
    pub kkt_certified: bool,
}

impl TwoUserCandidate {
    pub fn objective(&self) -> f64 {
        self.p1 + self.p2
    }

    /// One `key = value` line per field, suitable for fixtures.
    pub fn diagnostic_record(&self) -> String {
        let r = &self.residuals;
        let mut out = format!(
            "kind = {}\np0 = {}\np1 = {}\np2 = {}\nobjective = {}\n",
            self.kind.label(),
            self.p0,
            self.p1,
            self.p2,
            self.objective()
        );
        for (k, (a, n)) in self.lambda.iter().zip(&self.numeric_lambda).enumerate() {
            out.push_str(&format!("lambda{} = {a}\nlambda{}_numeric = {n}\n", k + 1, k + 1));
        }
        out.push_str(&format!(
            "stationarity = {}\nslackness = {}\ndual_violation = {}\nprimal_violation = {}\n",
            r.stationarity, r.slackness, r.dual_violation, r.primal_violation
        ));
        out.push_str(&format!(
            "primal_feasible = {}\nkkt_certified = {}\n",
            self.primal_feasible, self.kkt_certified
        ));
        out
    }
}

#[derive(Debug, Clone)]
pub struct TwoUserSolution {
    pub kind: CandidateKind,
    pub report: SolveReport,
    /// Every evaluated candidate with its certificate.
    pub candidates: Vec<TwoUserCandidate>,
}

impl TwoUserSolution {
    pub fn candidate(&self, kind: CandidateKind) -> &TwoUserCandidate {
        self.candidates
            .iter()
            .find(|c| c.kind == kind)
            .expect("all kinds are enumerated")
    }
}

/// Objectives of co-certified candidates must agree to this relative
/// precision for the tie rule to apply.
const TIE_REL_TOL: f64 = 1e-6;

fn conflict(certified: usize, cands: &[TwoUserCandidate], why: &str) -> Error {
    let details = cands
        .iter()
        .map(|c| c.diagnostic_record())
        .collect::<Vec<_>>()
        .join("\n");
    Error::CertificationConflict {
        certified,
        details: format!("{why}\n{details}"),
    }
}

pub fn solve_two_user(inst: &TwoUserInstance) -> Result<TwoUserSolution> {
    solve_two_user_with_tol(inst, DEFAULT_KKT_TOL)
}

pub fn solve_two_user_with_tol(inst: &TwoUserInstance, tol: f64) -> Result<TwoUserSolution> {
    let cands: Vec<TwoUserCandidate> = enumerate_candidates(inst)
        .into_iter()
        .map(|c| certify_kkt(inst, c, tol))
        .collect();
    let certified: Vec<&TwoUserCandidate> = cands.iter().filter(|c| c.kkt_certified).collect();
    if certified.is_empty() {
        return Err(conflict(0, &cands, "no candidate satisfies the KKT conditions"));
    }

    let scale = inst.oma_total();
    // `certified` is in tie-break order, so a strict comparison keeps the
    // earliest kind among equal objectives
    let best = certified
        .iter()
        .copied()
        .reduce(|a, b| if b.objective() < a.objective() { b } else { a })
        .expect("non-empty");
    if certified
        .iter()
        .any(|c| (c.objective() - best.objective()).abs() > TIE_REL_TOL * scale)
    {
        return Err(conflict(
            certified.len(),
            &cands,
            "certified candidates disagree on the optimal value",
        ));
    }
    if let Some(better) = cands
        .iter()
        .find(|c| c.primal_feasible && c.objective() < best.objective() - TIE_REL_TOL * scale)
    {
        return Err(conflict(
            certified.len(),
            &cands,
            &format!("uncertified {} beats the certified optimum", better.kind),
        ));
    }

    let report = SolveReport::exact(inst.profile(best.p0, best.p1, best.p2), SolveStatus::Optimal);
    Ok(TwoUserSolution {
        kind: best.kind,
        report,
        candidates: cands,
    })
}

/// Solution class of a two-user optimum, as plotted in class-frequency
/// experiments.
pub fn classify_solution(sol: &TwoUserSolution) -> CandidateKind {
    sol.kind
}
