//! A small Monte Carlo sweep defined in TOML, written as CSV to stdout.
//! Larger runs go through `backcom-noma sweep` or `backcom-noma fig`.

use backcom_noma::experiment::{run_experiment, write_csv, ExperimentSpec};

const SPEC: &str = r#"
name = "rate-sweep"
trials = 40
solvers = ["oma", "two_user_closed_form", "sca", "bb_sra"]
seed = 11

[scenario]
num_users = 2
cluster_side = 2.0
cluster_center = 15.0

[sweep]
variable = "target_rate"
values = [1.0, 3.0, 5.0]
"#;

fn main() -> backcom_noma::Result<()> {
    let spec = ExperimentSpec::from_toml(SPEC)?;
    let result = run_experiment(&spec, None)?;
    for row in result.power_rows() {
        eprintln!(
            "R = {}  {:<18} mean {:.4e} +- {:.1e}  OMA/this {:.3}",
            row.value,
            row.solver.label(),
            row.power.mean,
            row.power.std_err,
            row.ratio_to_oma.mean
        );
    }
    write_csv(&result, std::io::stdout().lock())
}
