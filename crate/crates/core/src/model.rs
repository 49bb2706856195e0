//! System data model: channel gains, power profiles, achievable rates, and the
//! OMA baseline.
//!
//! Everything here works in noise-normalized units: a gain `gamma[(m, i)]` is
//! the effective SNR per unit power of user `m`'s signal in slot `i`, so all
//! rate expressions see unit noise. Users and slots are zero-based. User `m`
//! owns slot `m`, and may additionally reflect the carrier of any earlier slot
//! `i < m`. The base station decodes each slot in user order, so user `m` is
//! interfered by the reflections of every user `j > m` in that slot.

use crate::error::{Error, Result};
use crate::tri::TriMatrix;

/// Default absolute slack (nats) for rate feasibility checks.
pub const DEFAULT_RATE_TOL: f64 = 1e-8;

/// A problem instance: effective gains and a common target rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemInstance {
    gamma: TriMatrix,
    target_rate: f64,
}

impl SystemInstance {
    /// `gamma[(m, m)]` is the direct gain of user `m`; `gamma[(m, i)]` for
    /// `i < m` is the cascaded gain of user `m` reflecting user `i`'s carrier.
    pub fn new(gamma: TriMatrix, target_rate: f64) -> Result<Self> {
        if gamma.dim() == 0 {
            return Err(Error::InvalidInstance("num_users must be at least 1".into()));
        }
        if let Some((m, i, g)) = gamma.iter().find(|&(_, _, g)| !(g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidInstance(format!(
                "gamma[{m}][{i}] = {g} is not a positive finite number"
            )));
        }
        if !(target_rate >= 0.0 && target_rate.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "target rate {target_rate} must be non-negative and finite"
            )));
        }
        Ok(Self { gamma, target_rate })
    }

    /// Builds an instance from raw channel power gains and a noise power.
    ///
    /// `h_sq[m] = |h_m|^2` (user to base station), `g_sq[(m, i)] = |g_mi|^2`
    /// for `i < m` (user to user; the diagonal of `g_sq` is ignored).
    pub fn from_channels(h_sq: &[f64], g_sq: &TriMatrix, noise_power: f64, target_rate: f64) -> Result<Self> {
        if g_sq.dim() != h_sq.len() {
            return Err(Error::InvalidInstance(
                "inter-user gain matrix dimension does not match user count".into(),
            ));
        }
        if !(noise_power > 0.0) {
            return Err(Error::InvalidInstance("noise power must be positive".into()));
        }
        let gamma = TriMatrix::from_fn(h_sq.len(), |m, i| {
            if m == i {
                h_sq[m] / noise_power
            } else {
                h_sq[m] * g_sq[(m, i)] / noise_power
            }
        });
        Self::new(gamma, target_rate)
    }

    pub fn num_users(&self) -> usize {
        self.gamma.dim()
    }

    pub fn gamma(&self, m: usize, i: usize) -> f64 {
        self.gamma[(m, i)]
    }

    pub fn gains(&self) -> &TriMatrix {
        &self.gamma
    }

    pub fn target_rate(&self) -> f64 {
        self.target_rate
    }

    /// SNR needed for the target rate on an interference-free slot, `e^R - 1`.
    pub fn eps(&self) -> f64 {
        self.target_rate.exp_m1()
    }

    /// Same gains, different target rate.
    pub fn with_target_rate(&self, target_rate: f64) -> Result<Self> {
        Self::new(self.gamma.clone(), target_rate)
    }
}

/// Effective powers `P[(m, i)]`: for `i < m` the power user `m` reflects in
/// slot `i` (`eta_mi * P_ii`), and `P[(m, m)]` user `m`'s own transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    p: TriMatrix,
}

impl PowerProfile {
    pub fn new(p: TriMatrix) -> Result<Self> {
        if let Some((m, i, v)) = p.iter().find(|&(_, _, v)| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInstance(format!(
                "power P[{m}][{i}] = {v} must be non-negative and finite"
            )));
        }
        Ok(Self { p })
    }

    pub fn zeros(num_users: usize) -> Self {
        Self {
            p: TriMatrix::zeros(num_users),
        }
    }

    /// Builds `P_mi = eta_mi * p_diag[i]` with `P_mm = p_diag[m]`. The
    /// diagonal of `eta` is ignored.
    pub fn from_reflection(p_diag: &[f64], eta: &TriMatrix) -> Result<Self> {
        if eta.dim() != p_diag.len() {
            return Err(Error::InvalidInstance(
                "reflection matrix dimension does not match diagonal".into(),
            ));
        }
        Self::new(TriMatrix::from_fn(p_diag.len(), |m, i| {
            if m == i {
                p_diag[m]
            } else {
                eta[(m, i)] * p_diag[i]
            }
        }))
    }

    pub fn num_users(&self) -> usize {
        self.p.dim()
    }

    pub fn get(&self, m: usize, i: usize) -> f64 {
        self.p[(m, i)]
    }

    pub fn matrix(&self) -> &TriMatrix {
        &self.p
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.p.diagonal()
    }
}

/// How a solver run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    /// Exact optimum (closed form, certified).
    Optimal,
    /// Iterative method met its stopping tolerance.
    Converged,
    /// Iteration cap reached first.
    IterLimit,
    Infeasible,
}

/// Feasibility-oracle bookkeeping, used to compare solver cost independently
/// of wall-clock time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleStats {
    /// Number of feasibility-oracle invocations.
    pub calls: u64,
    /// Inner work units: waterfill bisection iterations for successive
    /// allocation, Newton steps for SCA-based checks and barrier solves.
    pub work: u64,
    /// Oracle witnesses that failed the independent feasibility check.
    pub rejected_witnesses: u64,
}

impl OracleStats {
    pub fn merge(&mut self, other: OracleStats) {
        self.calls += other.calls;
        self.work += other.work;
        self.rejected_witnesses += other.rejected_witnesses;
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Total consumed power, the sum of the diagonal of `profile`.
    pub objective: f64,
    pub profile: PowerProfile,
    pub status: SolveStatus,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    /// Per-iteration objective (SCA) or incumbent upper bound (BB).
    pub trace: Vec<f64>,
    pub stats: OracleStats,
}

impl SolveReport {
    /// Report for a single point with no bound gap.
    pub fn exact(profile: PowerProfile, status: SolveStatus) -> Self {
        let objective = total_power(&profile);
        Self {
            objective,
            profile,
            status,
            upper_bound: objective,
            lower_bound: objective,
            iterations: 0,
            trace: vec![objective],
            stats: OracleStats::default(),
        }
    }
}

fn check_indices(inst: &SystemInstance, p: &PowerProfile, m: usize, i: usize) -> Result<()> {
    let n = inst.num_users();
    if m >= n || i > m || p.num_users() != n {
        return Err(Error::IndexOutOfRange {
            user: m,
            slot: i,
            num_users: n,
        });
    }
    Ok(())
}

/// Interference seen by user `m` in slot `i`: reflections of users decoded later.
fn slot_interference(inst: &SystemInstance, p: &PowerProfile, m: usize, i: usize) -> f64 {
    (m + 1..inst.num_users()).map(|j| inst.gamma(j, i) * p.get(j, i)).sum()
}

/// Achievable rate (nats) of user `m` in slot `i` under SIC in user order.
pub fn rate_in_slot(inst: &SystemInstance, p: &PowerProfile, m: usize, i: usize) -> Result<f64> {
    check_indices(inst, p, m, i)?;
    let sinr = inst.gamma(m, i) * p.get(m, i) / (slot_interference(inst, p, m, i) + 1.0);
    Ok(sinr.ln_1p())
}

/// Sum of user `m`'s rates over slots `0..=m`.
pub fn total_rate(inst: &SystemInstance, p: &PowerProfile, m: usize) -> Result<f64> {
    (0..=m).map(|i| rate_in_slot(inst, p, m, i)).sum()
}

/// Battery power drawn by all users. Reflected power is free.
pub fn total_power(p: &PowerProfile) -> f64 {
    (0..p.num_users()).map(|m| p.get(m, m)).sum()
}

/// Whether `p` meets every user's target rate and keeps every reflection
/// within the carrier power of its slot, both up to `rate_tol`.
pub fn is_feasible(inst: &SystemInstance, p: &PowerProfile, rate_tol: f64) -> bool {
    let n = inst.num_users();
    if p.num_users() != n {
        return false;
    }
    // relative slack: powers can sit anywhere from 1e-6 to 1e2
    let reflections_ok = p
        .matrix()
        .iter()
        .all(|(m, i, v)| m == i || v <= p.get(i, i) * (1.0 + rate_tol));
    if !reflections_ok {
        return false;
    }
    (0..n).all(|m| match total_rate(inst, p, m) {
        Ok(r) => r >= inst.target_rate() - rate_tol,
        Err(_) => false,
    })
}

/// Reflection coefficients `eta_mi = P_mi / P_ii` (zero on the diagonal).
pub fn to_reflection(p: &PowerProfile) -> Result<TriMatrix> {
    let n = p.num_users();
    let mut eta = TriMatrix::zeros(n);
    for (m, i, v) in p.matrix().iter() {
        if m == i {
            continue;
        }
        let owner = p.get(i, i);
        if owner == 0.0 {
            if v > 0.0 {
                return Err(Error::InconsistentProfile { user: m, slot: i });
            }
        } else {
            eta[(m, i)] = v / owner;
        }
    }
    Ok(eta)
}

/// Minimum-power orthogonal allocation: every user alone in its own slot.
pub fn oma_profile(inst: &SystemInstance) -> PowerProfile {
    let eps = inst.eps();
    let n = inst.num_users();
    PowerProfile {
        p: TriMatrix::from_fn(n, |m, i| if m == i { eps / inst.gamma(m, m) } else { 0.0 }),
    }
}

/// Total OMA power, `sum_m (e^R - 1) / gamma_mm`.
pub fn oma_total(inst: &SystemInstance) -> f64 {
    total_power(&oma_profile(inst))
}
