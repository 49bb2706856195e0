//! Random clustered deployments.
//!
//! Users are dropped uniformly in a square of side `cluster_side` centered at
//! `(cluster_center, cluster_center)`; the base station sits at the origin.
//! User-to-base-station links see Rayleigh fading, user-to-user links Rician
//! fading, both with distance path loss `max(d, min_distance)^-alpha`. Users are
//! indexed by decreasing direct gain, so user 0 is the strongest.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemInstance;
use crate::tri::TriMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_users: usize,
    /// Side of the square user cluster (m).
    pub cluster_side: f64,
    /// Both coordinates of the cluster center (m).
    pub cluster_center: f64,
    /// Noise power (linear, same unit as transmit power).
    pub noise_power: f64,
    /// Target rate (nats per channel use).
    pub target_rate: f64,
    pub pathloss_exponent: f64,
    /// Rician K-factor of the user-to-user links (linear).
    pub rician_k: f64,
    /// Distances are clamped below at this value (m).
    pub min_distance: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_users: 2,
            cluster_side: 2.0,
            cluster_center: 15.0,
            noise_power: 1e-8,
            target_rate: 2.0,
            pathloss_exponent: 3.0,
            rician_k: 10.0,
            min_distance: 1.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.num_users >= 1, "num_users must be at least 1"),
            (self.cluster_side > 0.0, "cluster_side must be positive"),
            (self.cluster_center > 0.0, "cluster_center must be positive"),
            (self.noise_power > 0.0, "noise_power must be positive"),
            (
                self.target_rate >= 0.0 && self.target_rate.is_finite(),
                "target_rate must be non-negative",
            ),
            (self.pathloss_exponent >= 2.0, "pathloss_exponent must be at least 2"),
            (self.rician_k >= 0.0, "rician_k must be non-negative"),
            (self.min_distance > 0.0, "min_distance must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::Config((*msg).into())),
            None => Ok(()),
        }
    }

    /// A generator seeded from `seed`.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// `|x|^2` for `x ~ CN(0, 1)`.
fn rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    0.5 * (re * re + im * im)
}

/// `|x|^2` for a unit-power Rician variable with K-factor `k`.
fn rician_power<R: Rng + ?Sized>(rng: &mut R, k: f64) -> f64 {
    let los = (k / (k + 1.0)).sqrt();
    let sigma = (0.5 / (k + 1.0)).sqrt();
    let re = los + sigma * rng.sample::<f64, _>(StandardNormal);
    let im = sigma * rng.sample::<f64, _>(StandardNormal);
    re * re + im * im
}

/// Draws one deployment and its fading and returns the noise-normalized
/// instance.
pub fn sample_instance<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<SystemInstance> {
    cfg.validate()?;
    let n = cfg.num_users;
    let half = 0.5 * cfg.cluster_side;
    let loss = |d: f64| d.max(cfg.min_distance).powf(-cfg.pathloss_exponent);

    let pos: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = cfg.cluster_center + rng.random_range(-half..=half);
            let y = cfg.cluster_center + rng.random_range(-half..=half);
            (x, y)
        })
        .collect();
    let h_raw: Vec<f64> = pos
        .iter()
        .map(|&(x, y)| rayleigh_power(rng) * loss(x.hypot(y)))
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| h_raw[b].total_cmp(&h_raw[a]));
    let h_sq: Vec<f64> = order.iter().map(|&k| h_raw[k]).collect();

    let mut g_sq = TriMatrix::zeros(n);
    for m in 1..n {
        for i in 0..m {
            let (a, b) = (pos[order[m]], pos[order[i]]);
            g_sq[(m, i)] = rician_power(rng, cfg.rician_k) * loss((a.0 - b.0).hypot(a.1 - b.1));
        }
    }
    SystemInstance::from_channels(&h_sq, &g_sq, cfg.noise_power, cfg.target_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sorted() {
        let cfg = ScenarioConfig {
            num_users: 5,
            seed: 42,
            ..Default::default()
        };
        let a = sample_instance(&cfg, &mut cfg.rng()).unwrap();
        let b = sample_instance(&cfg, &mut cfg.rng()).unwrap();
        assert_eq!(a, b);
        let d = a.gains().diagonal();
        assert!(d.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_k_is_rayleigh() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| rician_power(&mut rng, 0.0)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
        let mean: f64 = (0..n).map(|_| rician_power(&mut rng, 10.0)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = ScenarioConfig {
            pathloss_exponent: 1.5,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
