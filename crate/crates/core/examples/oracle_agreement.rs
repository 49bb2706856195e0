//! Compares the two feasibility oracles against a brute-force grid over the
//! reflection coefficients on random three-user vertices near the SCA
//! solution.
//!
//! ```text
//! cargo run --release --example oracle_agreement
//! ```

use backcom_noma::bb::{sca_feasibility, sra_feasibility};
use backcom_noma::channel::{sample_instance, ScenarioConfig};
use backcom_noma::model::{is_feasible, oma_profile, DEFAULT_RATE_TOL};
use backcom_noma::sca::{sca_solve, ScaOptions};
use backcom_noma::{OracleStats, PowerProfile, Result, SystemInstance, TriMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: usize = 20;

/// Whether some `eta` on a uniform grid with `STEPS + 1` levels per
/// coefficient makes `p_diag` feasible.
fn grid_feasible(inst: &SystemInstance, p_diag: &[f64]) -> Result<bool> {
    let level = |k: usize| k as f64 / STEPS as f64;
    for a in 0..=STEPS {
        for b in 0..=STEPS {
            for c in 0..=STEPS {
                let eta = TriMatrix::from_packed(3, vec![0.0, level(a), 0.0, level(b), level(c), 0.0]).unwrap();
                if is_feasible(inst, &PowerProfile::from_reflection(p_diag, &eta)?, DEFAULT_RATE_TOL) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut n, mut sra_ok, mut sca_ok, mut grid_ok) = (0, 0, 0, 0);
    let (mut sra_only, mut sca_only, mut grid_only) = (0, 0, 0);
    let (mut sra_stats, mut sca_stats) = (OracleStats::default(), OracleStats::default());
    for trial in 0..300 {
        let cfg = ScenarioConfig {
            num_users: 3,
            cluster_side: 5.0,
            target_rate: 1.0 + (trial % 4) as f64,
            ..Default::default()
        };
        let inst = sample_instance(&cfg, &mut rng)?;
        let near = sca_solve(&inst, &oma_profile(&inst), &ScaOptions::default())?;
        let p: Vec<f64> = near
            .profile
            .diagonal()
            .iter()
            .map(|x| x * rng.random_range(0.97..1.1))
            .collect();
        let sra = sra_feasibility(&inst, &p, &mut sra_stats).is_ok();
        let sca = sca_feasibility(&inst, &p, &mut sca_stats).is_ok();
        let grid = grid_feasible(&inst, &p)?;
        n += 1;
        sra_ok += sra as usize;
        sca_ok += sca as usize;
        grid_ok += grid as usize;
        sra_only += (sra && !sca) as usize;
        sca_only += (sca && !sra) as usize;
        grid_only += (grid && !sra && !sca) as usize;
    }
    println!("vertices            {n}");
    println!("accepted by sra     {sra_ok}");
    println!("accepted by sca     {sca_ok}");
    println!("accepted by grid    {grid_ok}");
    println!("sra but not sca     {sra_only}");
    println!("sca but not sra     {sca_only}");
    println!("grid only           {grid_only}");
    println!(
        "work per call       sra {:.1}, sca {:.1}",
        sra_stats.work as f64 / sra_stats.calls as f64,
        sca_stats.work as f64 / sca_stats.calls as f64
    );
    Ok(())
}
