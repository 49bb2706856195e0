//! CSV emission. Each file starts with a `#` comment block echoing the full
//! experiment spec and a SHA-256 of the data section, so plots can be traced
//! back to the exact configuration.

use std::io::Write;

use sha2::{Digest, Sha256};

use super::{ExperimentMode, ExperimentResult};
use crate::error::Result;
use crate::sca::csv_err;

pub fn content_hash(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

fn data_section(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let var = result.spec.sweep.variable.name();
    match result.spec.mode {
        ExperimentMode::Power => {
            w.write_record([
                var,
                "solver",
                "mean_power",
                "std_err",
                "mean_iterations",
                "mean_oracle_calls",
                "mean_oracle_work",
                "mean_gap_to_oma",
                "gap_std_err",
                "mean_ratio_to_oma",
                "n_ok",
                "n_failed",
            ])
            .map_err(csv_err)?;
            for r in result.power_rows() {
                w.write_record([
                    r.value.to_string(),
                    r.solver.label().to_string(),
                    r.power.mean.to_string(),
                    r.power.std_err.to_string(),
                    r.mean_iterations.to_string(),
                    r.mean_oracle_calls.to_string(),
                    r.mean_oracle_work.to_string(),
                    r.gap_to_oma.mean.to_string(),
                    r.gap_to_oma.std_err.to_string(),
                    r.ratio_to_oma.mean.to_string(),
                    r.power.n.to_string(),
                    r.n_failed.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        ExperimentMode::Classes => {
            w.write_record([var, "class", "count", "frequency"]).map_err(csv_err)?;
            for r in result.class_rows() {
                w.write_record([
                    r.value.to_string(),
                    r.class.label().to_string(),
                    r.count.to_string(),
                    r.frequency.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        ExperimentMode::Trace => {
            w.write_record([var, "solver", "iteration", "mean_objective", "mean_ratio_to_oma"])
                .map_err(csv_err)?;
            for r in result.trace_rows() {
                w.write_record([
                    r.value.to_string(),
                    r.solver.label().to_string(),
                    r.iteration.to_string(),
                    r.mean_objective.to_string(),
                    r.mean_ratio_to_oma.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}

pub fn write_csv<W: Write>(result: &ExperimentResult, mut out: W) -> Result<()> {
    let data = data_section(result)?;
    writeln!(out, "# backcom-noma experiment {}", result.spec.name)?;
    for line in result.spec.to_toml().lines() {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# failures = {}", result.failures())?;
    writeln!(out, "# content_sha256 = {}", content_hash(&data))?;
    out.write_all(&data)?;
    Ok(())
}
