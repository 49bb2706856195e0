use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bb::FeasMode;
use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TargetRate,
    NumUsers,
    ClusterSide,
    ClusterCenter,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::TargetRate => "target_rate",
            SweepVariable::NumUsers => "num_users",
            SweepVariable::ClusterSide => "cluster_side",
            SweepVariable::ClusterCenter => "cluster_center",
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match self {
            SweepVariable::TargetRate => cfg.target_rate = value,
            SweepVariable::NumUsers => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::Config(format!(
                        "num_users value {value} is not a positive integer"
                    )));
                }
                cfg.num_users = value as usize;
            }
            SweepVariable::ClusterSide => cfg.cluster_side = value,
            SweepVariable::ClusterCenter => cfg.cluster_center = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Oma,
    TwoUserClosedForm,
    Sca,
    BbSra,
    BbSca,
    ConventionalTwoUser,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Oma,
        SolverKind::TwoUserClosedForm,
        SolverKind::Sca,
        SolverKind::BbSra,
        SolverKind::BbSca,
        SolverKind::ConventionalTwoUser,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Oma => "OMA",
            SolverKind::TwoUserClosedForm => "TwoUserClosedForm",
            SolverKind::Sca => "SCA",
            SolverKind::BbSra => "BB-SRA",
            SolverKind::BbSca => "BB-SCA",
            SolverKind::ConventionalTwoUser => "ConventionalTwoUser",
        }
    }

    pub fn two_user_only(self) -> bool {
        matches!(self, SolverKind::TwoUserClosedForm | SolverKind::ConventionalTwoUser)
    }

    pub fn feas_mode(self) -> Option<FeasMode> {
        match self {
            SolverKind::BbSra => Some(FeasMode::Sra),
            SolverKind::BbSca => Some(FeasMode::Sca),
            _ => None,
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        SolverKind::ALL
            .into_iter()
            .find(|k| k.label().to_ascii_lowercase().replace('-', "") == key)
            .ok_or_else(|| Error::Config(format!("unknown solver {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    /// Mean total power per solver.
    Power,
    /// Frequency of each two-user solution class.
    Classes,
    /// Mean per-iteration objective of the iterative solvers.
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// BB gap tolerance as a fraction of the instance's OMA total.
    pub xi_rel: f64,
    pub n_max: usize,
    pub initial_box_scale: f64,
    pub sca_rel_tol: f64,
    pub sca_max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            xi_rel: 1e-3,
            n_max: 1000,
            initial_box_scale: 2.0,
            sca_rel_tol: 1e-5,
            sca_max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default = "default_mode")]
    pub mode: ExperimentMode,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    pub sweep: Sweep,
    pub trials: usize,
    pub solvers: Vec<SolverKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub settings: SolverSettings,
}

fn default_mode() -> ExperimentMode {
    ExperimentMode::Power
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// Scenario at each sweep point.
    pub fn scenarios(&self) -> Result<Vec<ScenarioConfig>> {
        self.sweep
            .values
            .iter()
            .map(|&v| self.sweep.variable.apply(&self.scenario, v))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.solvers.is_empty() && self.mode != ExperimentMode::Classes {
            return Err(Error::Config("no solvers selected".into()));
        }
        if !(self.settings.xi_rel > 0.0) || self.settings.initial_box_scale < 1.0 {
            return Err(Error::Config(
                "xi_rel must be positive and the box scale at least 1".into(),
            ));
        }
        let scenarios = self.scenarios()?;
        let two_user_only = self.mode == ExperimentMode::Classes || self.solvers.iter().any(|s| s.two_user_only());
        if two_user_only && scenarios.iter().any(|c| c.num_users != 2) {
            return Err(Error::Config(
                "two-user solvers and class mode need num_users = 2 at every sweep point".into(),
            ));
        }
        Ok(())
    }
}
