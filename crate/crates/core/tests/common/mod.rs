#![allow(dead_code)]

pub mod kernel;

use backcom_noma::channel::{sample_instance, ScenarioConfig};
use backcom_noma::two_user::TwoUserInstance;
use backcom_noma::{SystemInstance, TriMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Gains log-uniform in [1e-2, 1e3], R uniform in [0.5, 5]. With `ordered`
/// the direct gains satisfy gamma1 >= gamma2.
pub fn random_two_user<R: Rng>(rng: &mut R, ordered: bool) -> TwoUserInstance {
    let g0 = log_uniform(rng, 1e-2, 1e3);
    let mut g1 = log_uniform(rng, 1e-2, 1e3);
    let mut g2 = log_uniform(rng, 1e-2, 1e3);
    if ordered && g1 < g2 {
        std::mem::swap(&mut g1, &mut g2);
    }
    let rate = rng.random_range(0.5..5.0);
    TwoUserInstance::new(g0, g1, g2, rate).unwrap()
}

/// Fully random gains, log-uniform in `[lo, hi]`.
pub fn random_system<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64, rate: f64) -> SystemInstance {
    let g = TriMatrix::from_fn(n, |_, _| log_uniform(rng, lo, hi));
    SystemInstance::new(g, rate).unwrap()
}

pub fn clustered(num_users: usize, side: f64, center: f64, rate: f64, seed: u64) -> SystemInstance {
    let cfg = ScenarioConfig {
        num_users,
        cluster_side: side,
        cluster_center: center,
        target_rate: rate,
        ..Default::default()
    };
    sample_instance(&cfg, &mut rng(seed)).unwrap()
}

pub fn tri(rows: &[&[f64]]) -> TriMatrix {
    TriMatrix::from_fn(rows.len(), |m, i| rows[m][i])
}
