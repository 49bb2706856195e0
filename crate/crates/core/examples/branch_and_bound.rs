//! Branch and bound over the own-slot powers with both feasibility oracles,
//! compared with SCA. Writes the BB-SRA bound trace to `bb_trace.csv`.

use std::fs::File;

use backcom_noma::bb::{bb_solve, write_trace_csv, BbConfig, FeasMode};
use backcom_noma::channel::{sample_instance, ScenarioConfig};
use backcom_noma::model::{oma_profile, oma_total};
use backcom_noma::sca::{sca_solve, ScaOptions};

fn main() -> backcom_noma::Result<()> {
    let cfg = ScenarioConfig {
        num_users: 3,
        cluster_side: 5.0,
        target_rate: 3.0,
        seed: 3,
        ..Default::default()
    };
    let inst = sample_instance(&cfg, &mut cfg.rng())?;
    let oma = oma_total(&inst);
    let sca = sca_solve(&inst, &oma_profile(&inst), &ScaOptions::default())?;
    println!("OMA {oma:.6e}   SCA {:.6e}", sca.objective);

    for mode in [FeasMode::Sra, FeasMode::Sca] {
        let bb = bb_solve(
            &inst,
            &BbConfig {
                feas_mode: mode,
                n_max: 300,
                ..Default::default()
            },
        )?;
        let r = &bb.report;
        println!(
            "BB-{mode}: U {:.6e}  L {:.6e}  {:?} after {} iterations, {} oracle calls, work {}",
            r.upper_bound, r.lower_bound, r.status, r.iterations, r.stats.calls, r.stats.work
        );
        if mode == FeasMode::Sra {
            write_trace_csv(&bb.trace, File::create("bb_trace.csv")?)?;
        }
    }
    Ok(())
}
