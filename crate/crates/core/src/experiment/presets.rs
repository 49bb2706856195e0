//! Built-in experiment presets, one group per figure.

use super::{ExperimentMode, ExperimentSpec, SolverKind, SolverSettings, Sweep, SweepVariable};
use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};

pub const FIGURES: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"];

const TWO_USER_TRIALS: usize = 500;
const MULTI_USER_TRIALS: usize = 100;

fn rates() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 5.0]
}

fn scenario(num_users: usize, side: f64, center: f64, noise: f64) -> ScenarioConfig {
    ScenarioConfig {
        num_users,
        cluster_side: side,
        cluster_center: center,
        noise_power: noise,
        ..Default::default()
    }
}

fn spec(
    name: String,
    mode: ExperimentMode,
    scenario: ScenarioConfig,
    sweep: Sweep,
    trials: usize,
    solvers: Vec<SolverKind>,
) -> ExperimentSpec {
    ExperimentSpec {
        name,
        mode,
        scenario,
        sweep,
        trials,
        solvers,
        seed: 0,
        settings: SolverSettings::default(),
    }
}

fn two_user_power(fig: &str, noise: f64) -> Vec<ExperimentSpec> {
    [2.0, 5.0]
        .into_iter()
        .map(|side| {
            spec(
                format!("{fig}_side{side}"),
                ExperimentMode::Power,
                scenario(2, side, 15.0, noise),
                Sweep {
                    variable: SweepVariable::TargetRate,
                    values: rates(),
                },
                TWO_USER_TRIALS,
                vec![SolverKind::Oma, SolverKind::TwoUserClosedForm, SolverKind::Sca],
            )
        })
        .collect()
}

/// Specs reproducing figure `name` (`fig1` to `fig6`).
pub fn fig_mode(name: &str) -> Result<Vec<ExperimentSpec>> {
    let specs = match name {
        "fig1" => two_user_power("fig1", 1e-8),
        "fig2" => two_user_power("fig2", 1e-7),
        "fig3" => vec![spec(
            "fig3".into(),
            ExperimentMode::Classes,
            scenario(2, 2.0, 15.0, 1e-8),
            Sweep {
                variable: SweepVariable::TargetRate,
                values: rates(),
            },
            TWO_USER_TRIALS,
            vec![SolverKind::TwoUserClosedForm],
        )],
        "fig4" => [15.0, 20.0]
            .into_iter()
            .map(|center| {
                let mut base = scenario(1, 5.0, center, 1e-8);
                base.target_rate = 4.0;
                spec(
                    format!("fig4_center{center}"),
                    ExperimentMode::Power,
                    base,
                    Sweep {
                        variable: SweepVariable::NumUsers,
                        values: vec![1.0, 2.0, 3.0, 4.0, 5.0],
                    },
                    MULTI_USER_TRIALS,
                    vec![SolverKind::Oma, SolverKind::Sca, SolverKind::BbSra],
                )
            })
            .collect(),
        "fig5" => vec![spec(
            "fig5".into(),
            ExperimentMode::Power,
            scenario(5, 5.0, 15.0, 1e-8),
            Sweep {
                variable: SweepVariable::TargetRate,
                values: rates(),
            },
            MULTI_USER_TRIALS,
            vec![SolverKind::Oma, SolverKind::Sca, SolverKind::BbSra],
        )],
        "fig6" => vec![spec(
            "fig6".into(),
            ExperimentMode::Trace,
            scenario(5, 5.0, 20.0, 1e-8),
            Sweep {
                variable: SweepVariable::TargetRate,
                values: vec![4.0],
            },
            MULTI_USER_TRIALS,
            vec![SolverKind::Sca, SolverKind::BbSra],
        )],
        other => {
            return Err(Error::Config(format!(
                "unknown figure {other:?}; expected one of {FIGURES:?}"
            )))
        }
    };
    Ok(specs)
}
