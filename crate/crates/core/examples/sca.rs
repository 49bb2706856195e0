//! Successive convex approximation on a random four-user cluster, starting
//! from OMA. Prints the objective trace and the final reflection pattern.

use backcom_noma::channel::{sample_instance, ScenarioConfig};
use backcom_noma::model::{is_feasible, oma_profile, oma_total, to_reflection, DEFAULT_RATE_TOL};
use backcom_noma::sca::{sca_solve, ScaOptions};

fn main() -> backcom_noma::Result<()> {
    let cfg = ScenarioConfig {
        num_users: 4,
        cluster_side: 5.0,
        target_rate: 3.0,
        seed: 7,
        ..Default::default()
    };
    let inst = sample_instance(&cfg, &mut cfg.rng())?;
    let report = sca_solve(&inst, &oma_profile(&inst), &ScaOptions::default())?;

    println!("OMA total {:.6e}", oma_total(&inst));
    for (k, v) in report.trace.iter().enumerate() {
        println!("iter {k:>3}  {v:.6e}");
    }
    println!(
        "status {:?}, feasible {}, saving {:.1}%",
        report.status,
        is_feasible(&inst, &report.profile, DEFAULT_RATE_TOL),
        100.0 * (1.0 - report.objective / oma_total(&inst))
    );
    let eta = to_reflection(&report.profile)?;
    println!("\nreflection coefficients (row = user, column = slot):");
    for m in 0..eta.dim() {
        let row: Vec<String> = eta.row(m).iter().map(|v| format!("{v:.3}")).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
