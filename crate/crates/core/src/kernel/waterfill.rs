//! Minimum-sum water-filling for a single log-sum rate constraint.
//!
//! Solves
//!
//! ```text
//! minimize    sum_i eta_i
//! subject to  sum_i ln(1 + a_i eta_i) >= rho,   0 <= eta_i <= c_i
//! ```
//!
//! The KKT conditions give `eta_i = clamp(mu - 1/a_i, 0, c_i)` for a common
//! water level `mu`. The achieved rate is non-decreasing in `mu`, so the level
//! is found by bisection.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;
/// Infeasibility margin on the saturated rate.
const INFEASIBLE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LogSumProblem {
    /// Per-variable SNR slopes `a_i > 0`.
    pub coeffs: Vec<f64>,
    /// Upper bounds `c_i > 0`.
    pub caps: Vec<f64>,
    /// Required rate `rho >= 0` (nats).
    pub required_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub eta: Vec<f64>,
    /// Achieved `sum_i ln(1 + a_i eta_i)`.
    pub rate: f64,
    pub water_level: f64,
    /// Bisection iterations spent.
    pub iterations: usize,
}

impl WaterfillSolution {
    pub fn total(&self) -> f64 {
        self.eta.iter().sum()
    }
}

impl LogSumProblem {
    pub fn new(coeffs: Vec<f64>, caps: Vec<f64>, required_rate: f64) -> Result<Self> {
        if coeffs.len() != caps.len() {
            return Err(Error::InvalidInstance("coeffs and caps differ in length".into()));
        }
        if coeffs.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidInstance(
                "coefficients must be positive and finite".into(),
            ));
        }
        if caps.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidInstance("caps must be positive and finite".into()));
        }
        if !(required_rate >= 0.0 && required_rate.is_finite()) {
            return Err(Error::InvalidInstance("required rate must be non-negative".into()));
        }
        Ok(Self {
            coeffs,
            caps,
            required_rate,
        })
    }

    fn allocation(&self, mu: f64) -> impl Iterator<Item = f64> + '_ {
        self.coeffs
            .iter()
            .zip(&self.caps)
            .map(move |(&a, &c)| (mu - 1.0 / a).clamp(0.0, c))
    }

    fn rate_at(&self, mu: f64) -> f64 {
        self.allocation(mu)
            .zip(&self.coeffs)
            .map(|(eta, &a)| (a * eta).ln_1p())
            .sum()
    }

    /// Rate with every variable at its cap.
    pub fn saturated_rate(&self) -> f64 {
        self.coeffs.iter().zip(&self.caps).map(|(&a, &c)| (a * c).ln_1p()).sum()
    }
}

pub fn waterfill_min_sum(prob: &LogSumProblem) -> Result<WaterfillSolution> {
    let n = prob.coeffs.len();
    let rho = prob.required_rate;
    if rho == 0.0 {
        return Ok(WaterfillSolution {
            eta: vec![0.0; n],
            rate: 0.0,
            water_level: 0.0,
            iterations: 0,
        });
    }
    let saturated = prob.saturated_rate();
    if saturated < rho - INFEASIBLE_MARGIN {
        return Err(Error::Infeasible);
    }
    if saturated <= rho {
        return Ok(WaterfillSolution {
            eta: prob.caps.clone(),
            rate: saturated,
            water_level: f64::INFINITY,
            iterations: 0,
        });
    }

    let max_inv = prob.coeffs.iter().map(|a| 1.0 / a).fold(0.0, f64::max);
    let min_a = prob.coeffs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = 0.0;
    let mut hi = max_inv + rho.exp() / min_a;
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS && hi - lo > 1e-15 * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if prob.rate_at(mid) >= rho {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let eta: Vec<f64> = prob.allocation(hi).collect();
    Ok(WaterfillSolution {
        rate: prob.rate_at(hi),
        eta,
        water_level: hi,
        iterations,
    })
}
